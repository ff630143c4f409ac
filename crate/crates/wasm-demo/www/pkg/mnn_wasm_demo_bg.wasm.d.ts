/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const __wbg_mirrorview_free: (a: number, b: number) => void;
export const demo_first_held_out: () => number;
export const demo_label: (a: number, b: number) => [number, number];
export const demo_mirror: (a: number, b: number, c: number) => [number, number, number];
export const demo_new: (a: number) => [number, number, number];
export const demo_per_class: () => number;
export const demo_sample: (a: number, b: number, c: number) => [number, number, number, number];
export const demo_size: () => number;
export const demo_train: (a: number, b: number) => [number, number, number, number];
export const demo_trained: (a: number) => number;
export const mirrorview_reconstruction: (a: number, b: number) => [number, number];
export const mirrorview_report: (a: number) => [number, number];
export const mirrorview_winner: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
