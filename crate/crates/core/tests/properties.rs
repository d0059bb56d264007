//! Cross-module properties exercised through the public API.

use headtwin_core::beamform::{mvdr_weights, CVec2, Hermitian2, NoiseScm};
use headtwin_core::metrics::itd_from_renders;
use headtwin_core::scene::{itd_seconds, render_static_source, substream, white_noise, SceneConfig};
use num_complex::Complex64;
use proptest::prelude::*;

fn hermitian_pd() -> impl Strategy<Value = Hermitian2> {
    (prop::array::uniform8(-3.0f64..3.0), 1e-3f64..1.0).prop_map(|(b, load)| {
        let c = |i: usize| Complex64::new(b[2 * i], b[2 * i + 1]);
        let (b00, b01, b10, b11) = (c(0), c(1), c(2), c(3));
        let d0 = b00.norm_sqr() + b01.norm_sqr() + load;
        let d1 = b10.norm_sqr() + b11.norm_sqr() + load;
        Hermitian2::new(d0, d1, b10 * b00.conj() + b11 * b01.conj())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// The reference-channel selector `e0` is distortionless for `h = (1, z)`,
    /// so MVDR can never pass more noise than the unprocessed reference.
    #[test]
    fn mvdr_never_beats_reference_on_noise(r in hermitian_pd(), re in -5.0f64..5.0, im in -5.0f64..5.0) {
        let h: CVec2 = [Complex64::new(1.0, 0.0), Complex64::new(re, im)];
        let scm = NoiseScm::from_matrices([r]).unwrap();
        let w = mvdr_weights(&scm, 0, &h).unwrap();
        let out = r.quad_form(&w);
        prop_assert!(out <= r.d0 * (1.0 + 1e-12), "{out} > {}", r.d0);
    }

    /// With the shadow filter off, the rendered broadband ITD is the spherical-head delay.
    #[test]
    fn rendered_itd_follows_head_model(az in -90.0f64..90.0) {
        let mut scene = SceneConfig::default();
        scene.duration_s = 0.25;
        scene.head.shadow = false;
        let probe = white_noise(&mut substream(5, "itd-prop", 0), scene.num_samples());
        let y = render_static_source(&scene, az, 1.0, 1.0, &probe).unwrap();
        let est = itd_from_renders(&y.channel(0).to_vec(), &y.channel(1).to_vec(), scene.sample_rate).unwrap();
        let model = itd_seconds(az, scene.head.radius_m, scene.speed_of_sound_mps);
        prop_assert!((est - model).abs() < 0.5 / scene.sample_rate as f64, "az {az}: {est} vs {model}");
    }
}
