use proptest::prelude::*;
use std::fs;
use thermfuse_core::io::{read_frame, write_frame};
use thermfuse_core::{load_stack, FrameEncoding, FrameFormat, StackManifest, ThermalImage};

fn image(lo: f64, hi: f64) -> impl Strategy<Value = ThermalImage> {
    (1usize..7, 1usize..7).prop_flat_map(move |(w, h)| {
        prop::collection::vec(lo..hi, w * h).prop_map(move |t| ThermalImage::new(w, h, t).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_is_lossless(img in image(-40.0, 400.0)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_frame(&path, &img, FrameEncoding::Csv).unwrap();
        prop_assert_eq!(read_frame(&path, FrameEncoding::Csv).unwrap(), img);
    }

    #[test]
    fn pgm16_within_half_a_step(img in image(0.0, 100.0)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.pgm");
        let enc = FrameEncoding::pgm16(0.0, 100.0).unwrap();
        write_frame(&path, &img, enc).unwrap();
        let back = read_frame(&path, enc).unwrap();
        let step = 100.0 / 65535.0;
        for (a, b) in img.temps().iter().zip(back.temps()) {
            prop_assert!((a - b).abs() <= step / 2.0 + 1e-12);
        }
    }
}

#[test]
fn manifest_loads_frames_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let frames: Vec<ThermalImage> = (0..3)
        .map(|i| ThermalImage::filled(4, 2, 20.0 + i as f64).unwrap())
        .collect();
    let mut names = Vec::new();
    for (i, f) in frames.iter().enumerate() {
        let name = format!("frame_{i:03}.csv");
        write_frame(&dir.path().join(&name), f, FrameEncoding::Csv).unwrap();
        names.push(name);
    }
    let manifest = StackManifest {
        format: FrameFormat::Csv,
        frames: names.into_iter().map(Into::into).collect(),
        lens_positions: Some(vec![0.0, 0.5, 1.0]),
        t_min: None,
        t_max: None,
    };
    let path = dir.path().join("manifest.json");
    manifest.write(&path).unwrap();
    let stack = load_stack(&path).unwrap();
    assert_eq!(stack.frames(), &frames[..]);
    assert_eq!(stack.lens_positions(), Some(&[0.0, 0.5, 1.0][..]));

    fs::write(dir.path().join("frame_001.csv"), "1,2,3,4\n5,6,7\n").unwrap();
    assert!(load_stack(&path).is_err());
}
