//! Unprocessing: sRGB back to a simulated RGGB mosaic, undoing the forward
//! stages in reverse order.

use crate::color::{check_blend, CameraProfile};
use crate::error::{Error, Result};
use crate::forward_isp::{unapply_gain, ForwardParams, WbGains, GAMMA_EXPONENT, GAMMA_OFFSET};
use crate::image::{clip01, BayerImage, Cfa, ColorState, PlanarImage};
use crate::tone_curve::ToneCurve;

/// Decoded sRGB values at or below this are on the linear segment.
const DECODE_LINEAR_CUTOFF: f64 = 0.04045;

/// Parameters of the forward rendering being undone.
#[derive(Debug, Clone, PartialEq)]
pub struct ReverseParams {
    pub tone_curve: ToneCurve,
    pub profile: CameraProfile,
    pub blend_g: f64,
    pub wb_gains: WbGains,
}

impl ReverseParams {
    pub fn identity() -> Self {
        ForwardParams::identity().into()
    }

    pub fn validate(&self) -> Result<()> {
        self.wb_gains.validate()?;
        check_blend(self.blend_g)
    }
}

impl From<ForwardParams> for ReverseParams {
    fn from(p: ForwardParams) -> Self {
        Self {
            tone_curve: p.tone_curve,
            profile: p.profile,
            blend_g: p.blend_g,
            wb_gains: p.wb_gains,
        }
    }
}

#[inline]
pub fn gamma_decode(x: f64) -> f64 {
    if x <= DECODE_LINEAR_CUTOFF {
        x / 12.92
    } else {
        ((x + GAMMA_OFFSET) / (1.0 + GAMMA_OFFSET)).powf(GAMMA_EXPONENT)
    }
}

pub fn inverse_gamma(img: &PlanarImage) -> Result<PlanarImage> {
    img.expect_state("inverse_gamma", ColorState::SrgbNonlinear)?;
    Ok(img
        .map_samples(|v| gamma_decode((v as f64).clamp(0.0, 1.0)) as f32)
        .with_state(ColorState::SrgbLinear))
}

pub fn invert_tone_curve(img: &PlanarImage, curve: &ToneCurve) -> Result<PlanarImage> {
    img.expect_state("invert_tone_curve", ColorState::SrgbLinear)?;
    Ok(img
        .map_channels(|c, v| curve.invert(c, v))
        .with_state(ColorState::CieXyz))
}

pub fn inverse_cst(
    img: &PlanarImage,
    profile: &CameraProfile,
    blend_g: f64,
) -> Result<PlanarImage> {
    img.expect_state("inverse_cst", ColorState::CieXyz)?;
    check_blend(blend_g)?;
    let blended = profile.blend(blend_g);
    let inv = blended.inverse().ok_or_else(|| Error::SingularMatrix {
        profile: profile.id.clone(),
        blend_g,
        det: blended.det(),
    })?;
    Ok(img
        .map_pixels(|p| inv.apply(p))
        .with_state(ColorState::CameraRgb))
}

pub fn inverse_white_balance(img: &PlanarImage, gains: WbGains) -> Result<PlanarImage> {
    img.expect_state("inverse_white_balance", ColorState::CameraRgb)?;
    gains.validate()?;
    Ok(img.map_channels(|c, v| unapply_gain(v as f64, gains.0[c]) as f32))
}

/// Keeps one color per site following the RGGB layout.
pub fn mosaic(img: &PlanarImage) -> Result<BayerImage> {
    img.expect_state("mosaic", ColorState::CameraRgb)?;
    let (h, w) = (img.height(), img.width());
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::OddDimensions {
            height: h,
            width: w,
        });
    }
    let mut data = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            data.push(img.plane(Cfa::at(y, x).channel())[y * w + x]);
        }
    }
    BayerImage::new(h, w, data)
}

/// Full reverse pipeline, ending with a clip to `[0, 1]`.
pub fn unprocess(img: &PlanarImage, params: &ReverseParams) -> Result<BayerImage> {
    params.validate()?;
    let linear = inverse_gamma(img)?;
    let xyz = invert_tone_curve(&linear, &params.tone_curve)?;
    let cam = inverse_cst(&xyz, &params.profile, params.blend_g)?;
    let cam = inverse_white_balance(&cam, params.wb_gains)?;
    clip01(&mosaic(&cam)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::Mat3;
    use crate::forward_isp::{cst, demosaic, gamma_encode, white_balance};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn srgb(h: usize, w: usize, data: Vec<f32>) -> PlanarImage {
        PlanarImage::new(h, w, data, ColorState::SrgbNonlinear).unwrap()
    }

    #[test]
    fn inverse_gamma_examples() {
        assert_eq!(gamma_decode(0.0), 0.0);
        assert!((gamma_decode(1.0) - 1.0).abs() < 1e-15);
        assert!((gamma_decode(0.5) - 0.21404).abs() < 1e-5);
    }

    #[test]
    fn gamma_round_trip_grid() {
        for i in 0..=10_000 {
            let x = i as f64 / 10_000.0;
            assert!((gamma_encode(gamma_decode(x)) - x).abs() <= 1e-6);
        }
    }

    #[test]
    fn inverse_tone_curve_examples() {
        let sq = ToneCurve::from_fn(256, |x| x * x).unwrap();
        let img = PlanarImage::filled(1, 1, [0.25; 3], ColorState::SrgbLinear);
        let out = invert_tone_curve(&img, &sq).unwrap();
        assert!((out.data()[0] - 0.5).abs() < 1e-4);
        assert_eq!(out.state(), ColorState::CieXyz);
    }

    #[test]
    fn inverse_cst_identity_and_endpoint() {
        let img = PlanarImage::filled(2, 2, [0.1, 0.6, 0.3], ColorState::CieXyz);
        let out = inverse_cst(&img, &CameraProfile::identity("i"), 0.7).unwrap();
        assert_eq!(out.data(), img.data());

        let low = Mat3([[1.5, -0.3, -0.2], [-0.1, 1.3, -0.2], [0.0, -0.4, 1.4]]);
        let high = Mat3([[2.0, -0.8, -0.2], [-0.2, 1.4, -0.2], [0.1, -0.5, 1.4]]);
        let p = CameraProfile::new("p", low, high).unwrap();
        let out = inverse_cst(&img, &p, 1.0).unwrap();
        let want = p.ccm_low.inverse().unwrap().apply([0.1, 0.6, 0.3]);
        assert_eq!(out.pixel(0, 0), want);
    }

    #[test]
    fn inverse_cst_singular_blend() {
        // blending a matrix with its negation through g = 0.5 gives zero
        let m = Mat3([[2.0, -0.5, -0.5], [-0.5, 2.0, -0.5], [-0.5, -0.5, 2.0]]);
        let neg = Mat3([[-2.0, 0.5, 0.5], [0.5, -2.0, 0.5], [0.5, 0.5, -2.0]]);
        let p = CameraProfile {
            id: "degenerate".into(),
            ccm_low: m,
            ccm_high: neg,
        };
        let img = PlanarImage::filled(2, 2, [0.5; 3], ColorState::CieXyz);
        match inverse_cst(&img, &p, 0.5) {
            Err(Error::SingularMatrix {
                profile, blend_g, ..
            }) => {
                assert_eq!(profile, "degenerate");
                assert_eq!(blend_g, 0.5);
            }
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn inverse_cst_round_trip_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 100 {
            let mut m = [[0.0; 3]; 3];
            for (i, row) in m.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = rng.random_range(-0.6..0.6) + if i == j { 1.5 } else { 0.0 };
                }
            }
            let Ok(p) = CameraProfile::new("r", Mat3(m), Mat3::IDENTITY) else {
                continue;
            };
            let g = rng.random::<f64>();
            if p.blend(g).det().abs() < 0.05 {
                continue;
            }
            let px = [rng.random::<f32>(), rng.random(), rng.random()];
            let cam = PlanarImage::filled(1, 2, px, ColorState::CameraRgb);
            let back = inverse_cst(&cst(&cam, &p, g).unwrap(), &p, g).unwrap();
            for (b, p) in back.pixel(0, 1).iter().zip(px) {
                assert!((b - p).abs() <= 1e-5);
            }
            checked += 1;
        }
    }

    #[test]
    fn inverse_white_balance_examples() {
        let img = PlanarImage::new(
            1,
            2,
            vec![0.4, 1.0, 0.3, 0.3, 0.9, 0.9],
            ColorState::CameraRgb,
        )
        .unwrap();
        assert_eq!(inverse_white_balance(&img, WbGains::UNIT).unwrap(), img);
        let out = inverse_white_balance(&img, WbGains([2.0, 1.0, 1.0])).unwrap();
        assert!((out.data()[0] - 0.2).abs() < 1e-7);
        assert_eq!(out.data()[1], 1.0);
        assert!(inverse_white_balance(&img, WbGains([1.0, -1.0, 1.0])).is_err());
    }

    #[test]
    fn white_balance_pair_inverts() {
        let gains = WbGains([2.7, 1.9, 1.0]);
        let data: Vec<f32> = (0..48).map(|i| i as f32 / 47.0).collect();
        let img = PlanarImage::new(4, 4, data, ColorState::CameraRgb).unwrap();
        let back = white_balance(&inverse_white_balance(&img, gains).unwrap(), gains).unwrap();
        for (a, b) in back.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn mosaic_examples() {
        let gray = PlanarImage::filled(4, 4, [0.3; 3], ColorState::CameraRgb);
        assert!(mosaic(&gray).unwrap().data().iter().all(|&v| v == 0.3));

        let red = PlanarImage::filled(4, 4, [1.0, 0.0, 0.0], ColorState::CameraRgb);
        let m = mosaic(&red).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                let want = if Cfa::at(y, x) == Cfa::Red { 1.0 } else { 0.0 };
                assert_eq!(m.get(y, x), want);
            }
        }
        let odd = PlanarImage::filled(3, 4, [0.3; 3], ColorState::CameraRgb);
        assert!(matches!(mosaic(&odd), Err(Error::OddDimensions { .. })));
    }

    #[test]
    fn unprocess_identity_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data: Vec<f32> = (0..3 * 36).map(|_| rng.random()).collect();
        let img = srgb(6, 6, data);
        let got = unprocess(&img, &ReverseParams::identity()).unwrap();
        let want = mosaic(
            &inverse_gamma(&img)
                .unwrap()
                .with_state(ColorState::CameraRgb),
        )
        .unwrap();
        for (a, b) in got.data().iter().zip(want.data()) {
            assert!((a - b).abs() <= 1e-6);
        }
        let black = unprocess(&srgb(4, 4, vec![0.0; 48]), &ReverseParams::identity()).unwrap();
        assert!(black.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unprocess_rejects_linear_input() {
        let img = PlanarImage::filled(4, 4, [0.5; 3], ColorState::SrgbLinear);
        assert!(matches!(
            unprocess(&img, &ReverseParams::identity()),
            Err(Error::StateMismatch {
                op: "inverse_gamma",
                ..
            })
        ));
    }

    proptest! {
        #[test]
        fn demosaic_preserves_mosaic(v in proptest::collection::vec(0.0f32..1.0, 64)) {
            let raw = BayerImage::new(8, 8, v).unwrap();
            let again = mosaic(&demosaic(&raw)).unwrap();
            prop_assert_eq!(again, raw);
        }

        #[test]
        fn unprocess_stays_in_unit_range(v in proptest::collection::vec(0.0f32..1.0, 48), g in 0.0f64..1.0) {
            let p = ReverseParams {
                tone_curve: ToneCurve::from_fn(64, |x| x * x * (3.0 - 2.0 * x)).unwrap(),
                profile: CameraProfile::new(
                    "p",
                    Mat3([[1.7, -0.5, -0.2], [-0.2, 1.5, -0.3], [0.0, -0.6, 1.6]]),
                    Mat3([[1.9, -0.7, -0.2], [-0.3, 1.6, -0.3], [0.1, -0.6, 1.5]]),
                ).unwrap(),
                blend_g: g,
                wb_gains: WbGains([2.5, 1.4, 1.0]),
            };
            let raw = unprocess(&srgb(4, 4, v), &p).unwrap();
            prop_assert!(raw.data().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
