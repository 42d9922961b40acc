mod common;

use std::fs;

use lowlight_isp::dataset::{
    calibrate_dirs, chord_slope, compare_exposure_curves, CalibrationBounds,
};
use lowlight_isp::degrade::reduce_exposure;
use lowlight_isp::forward_isp::{process, ForwardParams};
use lowlight_isp::image::PlanarImage;
use lowlight_isp::reverse_isp::{unprocess, ReverseParams};

use common::*;

fn darken(img: &PlanarImage, e: f64) -> PlanarImage {
    let raw = unprocess(img, &ReverseParams::identity()).unwrap();
    process(
        &reduce_exposure(&raw, e).unwrap(),
        &ForwardParams::identity(),
    )
    .unwrap()
}

#[test]
fn identical_directories_give_identity_curves() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    write_sources(&a, 3, 64, 70);
    let curves = compare_exposure_curves(&a, &a).unwrap();
    assert_eq!(curves.len(), 3);
    assert_eq!(curves[0].pair, "src_000");
    for c in &curves {
        // outside the images' luma range the map is an interpolation to the anchors
        for (i, v) in c.curve.iter().enumerate().take(200).skip(60) {
            assert!((v - i as f64 / 255.0).abs() < 1e-6, "{i}: {v}");
        }
        assert!(c.curve.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn darker_inputs_give_steeper_curves() {
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt");
    let sources = write_sources(&gt, 4, 64, 80);
    let mut medians = Vec::new();
    for e in [0.5, 2.0, 4.0] {
        let low = dir.path().join(format!("low_{e}"));
        fs::create_dir_all(&low).unwrap();
        for s in &sources {
            let img = lowlight_isp::dataset::io::ingest(s).unwrap();
            save_png8(&darken(&img, e), &low.join(s.file_name().unwrap()));
        }
        let mut slopes: Vec<f64> = compare_exposure_curves(&low, &gt)
            .unwrap()
            .iter()
            .map(|c| chord_slope(&c.curve, 0.1))
            .collect();
        medians.push(median(&mut slopes));
    }
    assert!(
        medians[0] < medians[1] && medians[1] < medians[2],
        "{medians:?}"
    );
}

#[test]
fn calibration_closes_the_loop() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    let sources = write_sources(&src, 8, 64, 90);
    let refs = dir.path().join("refs");
    fs::create_dir_all(&refs).unwrap();
    for s in &sources {
        let img = lowlight_isp::dataset::io::ingest(s).unwrap();
        save_png8(&darken(&img, 2.0), &refs.join(s.file_name().unwrap()));
    }
    let cal = calibrate_dirs(&refs, &src, CalibrationBounds::default()).unwrap();
    let r = cal.suggested;
    assert!(r.e_lo >= 1.5 && r.e_hi <= 2.5, "{r:?}");
    assert_eq!(cal.histogram.iter().sum::<u64>(), 8 * 64 * 64);

    let same = calibrate_dirs(&src, &src, CalibrationBounds::default()).unwrap();
    assert!(same.suggested.e_lo.abs() < 0.05 && same.suggested.e_hi.abs() < 0.05);

    let black = dir.path().join("black");
    fs::create_dir_all(&black).unwrap();
    image::RgbImage::new(16, 16)
        .save(black.join("b.png"))
        .unwrap();
    let bounds = CalibrationBounds {
        e_min: 0.0,
        e_max: 15.0,
    };
    assert_eq!(
        calibrate_dirs(&black, &src, bounds).unwrap().suggested.e_hi,
        15.0
    );
}
