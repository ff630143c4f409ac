use mnn::preprocess::GrayImage;
use mnn_wasm_demo::{to_bytes, Lab, CALIBRATE_END, CLASSES, PER_CLASS, SIZE};

#[test]
fn samples_are_deterministic_and_sized() {
    let a = Lab::new(9).unwrap();
    let b = Lab::new(9).unwrap();
    assert_eq!(a.labels(), ["class0", "class1"]);
    for class in 0..CLASSES {
        for index in [0, PER_CLASS - 1] {
            let img = a.sample(class, index).unwrap();
            assert_eq!((img.width(), img.height()), (SIZE, SIZE));
            assert_eq!(to_bytes(img), to_bytes(b.sample(class, index).unwrap()));
        }
    }
    assert!(a.sample(CLASSES, 0).is_err());
    assert!(a.sample(0, PER_CLASS).is_err());
    assert_ne!(
        to_bytes(a.sample(0, 0).unwrap()),
        to_bytes(Lab::new(10).unwrap().sample(0, 0).unwrap())
    );
}

#[test]
fn mirroring_needs_a_trained_bank() {
    let lab = Lab::new(1).unwrap();
    assert!(!lab.is_trained());
    assert!(lab.mirror(lab.sample(0, 0).unwrap()).is_err());
}

#[test]
fn trained_bank_routes_held_out_samples() {
    let mut lab = Lab::new(4).unwrap();
    let summaries = lab.train(150).unwrap();
    assert_eq!(summaries.len(), CLASSES);
    for s in &summaries {
        assert!(s.final_mse < s.initial_mse, "{s:?}");
    }
    let mut routed = 0;
    let mut total = 0;
    for class in 0..CLASSES {
        for index in CALIBRATE_END..PER_CLASS {
            let m = lab.mirror(lab.sample(class, index).unwrap()).unwrap();
            assert_eq!(m.reconstructions.len(), CLASSES);
            assert_eq!(m.result.records.len(), CLASSES);
            total += 1;
            routed += usize::from(m.result.winner.as_deref() == Some(lab.labels()[class].as_str()));
        }
    }
    // The dataset is small; most, not all, held-out samples must find home.
    assert!(routed * 4 >= total * 3, "{routed}/{total}");
}

#[test]
fn mirror_rejects_wrong_size_and_keeps_shape() {
    let mut lab = Lab::new(2).unwrap();
    lab.train(5).unwrap();
    let small = GrayImage::new(3, 3, vec![0.0; 9]).unwrap();
    assert!(lab.mirror(&small).is_err());
    let flat = GrayImage::new(SIZE, SIZE, vec![90.0; SIZE * SIZE]).unwrap();
    let m = lab.mirror(&flat).unwrap();
    assert!(m.reconstructions.iter().all(|r| r.len() == SIZE * SIZE));
}
