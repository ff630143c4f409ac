/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    static first_held_out(): number;
    label(_class: number): string | undefined;
    /**
     * Mirrors `SIZE * SIZE` grayscale bytes through the bank.
     */
    mirror(pixels: Uint8Array): MirrorView;
    /**
     * Draws a fresh two-class dataset; the bank starts untrained.
     */
    constructor(seed: number);
    static per_class(): number;
    sample(_class: number, index: number): Uint8Array;
    static size(): number;
    /**
     * Trains and calibrates the bank; returns one summary line per class.
     */
    train(epochs: number): string;
    trained(): boolean;
}

export class MirrorView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    reconstruction(entry: number): Uint8Array | undefined;
    /**
     * One line per network: distances, verdict and score.
     */
    report(): string;
    winner(): string | undefined;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly __wbg_mirrorview_free: (a: number, b: number) => void;
    readonly demo_first_held_out: () => number;
    readonly demo_label: (a: number, b: number) => [number, number];
    readonly demo_mirror: (a: number, b: number, c: number) => [number, number, number];
    readonly demo_new: (a: number) => [number, number, number];
    readonly demo_per_class: () => number;
    readonly demo_sample: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demo_size: () => number;
    readonly demo_train: (a: number, b: number) => [number, number, number, number];
    readonly demo_trained: (a: number) => number;
    readonly mirrorview_reconstruction: (a: number, b: number) => [number, number];
    readonly mirrorview_report: (a: number) => [number, number];
    readonly mirrorview_winner: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
