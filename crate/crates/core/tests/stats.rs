use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use shielding::stats::{bootstrap_sigma_se, gaussian_fit, ks_distance, linear_fit, normality_test, power_law_fit};
use shielding::types::C64;

#[test]
fn bootstrap_error_matches_asymptotic_formula() {
    // complex Gaussian with E|z|^2 = 2: sigma^2 ~ Gamma, SE(sigma) ~ sigma / (2 sqrt n)
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 400;
    let normal = Normal::new(0.0, 1.0).unwrap();
    let z: Vec<C64> = (0..n).map(|_| C64::new(normal.sample(&mut rng), normal.sample(&mut rng))).collect();
    let fit = gaussian_fit(&z).unwrap();
    let se = bootstrap_sigma_se(&z, 500, 1).unwrap();
    let expected = fit.sigma / (2.0 * (n as f64).sqrt());
    assert!((se / expected - 1.0).abs() < 0.2, "{se} vs {expected}");
}

#[test]
fn normality_p_values_are_roughly_uniform_under_the_null() {
    let normal = Normal::new(3.0, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let rejected = (0..400)
        .filter(|_| {
            let v: Vec<f64> = (0..200).map(|_| normal.sample(&mut rng)).collect();
            normality_test(&v).unwrap().p_value < 0.05
        })
        .count();
    // binomial(400, 0.05): mean 20, sd 4.4
    assert!((7..=35).contains(&rejected), "{rejected} rejections");
}

proptest! {
    #[test]
    fn power_law_is_scale_equivariant(alpha in 0.2f64..2.0, c0 in 0.01f64..10.0, k in 0.1f64..10.0,
                                      noise in prop::collection::vec(-0.05f64..0.05, 4)) {
        let ns = [50.0f64, 100.0, 200.0, 400.0];
        let sig: Vec<f64> = ns.iter().zip(&noise).map(|(n, e)| c0 * n.powf(-alpha) * e.exp()).collect();
        let scaled: Vec<f64> = sig.iter().map(|s| s * k).collect();
        let a = power_law_fit(&ns, &sig).unwrap();
        let b = power_law_fit(&ns, &scaled).unwrap();
        prop_assert!((a.alpha - b.alpha).abs() < 1e-12);
        prop_assert!((b.constant / a.constant / k - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_power_law_is_recovered(alpha in 0.2f64..2.0, c0 in 0.01f64..10.0) {
        let ns = [50.0f64, 100.0, 200.0, 400.0];
        let sig: Vec<f64> = ns.iter().map(|n| c0 * n.powf(-alpha)).collect();
        let fit = power_law_fit(&ns, &sig).unwrap();
        prop_assert!((fit.alpha - alpha).abs() < 1e-12 && (fit.constant / c0 - 1.0).abs() < 1e-10);
        prop_assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn gaussian_fit_equivariance(pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..60),
                                 shift_re in -3.0f64..3.0, shift_im in -3.0f64..3.0, k in 0.1f64..10.0) {
        let z: Vec<C64> = pts.iter().map(|&(a, b)| C64::new(a, b)).collect();
        let shift = C64::new(shift_re, shift_im);
        let moved: Vec<C64> = z.iter().map(|v| v * k + shift).collect();
        let a = gaussian_fit(&z).unwrap();
        let b = gaussian_fit(&moved).unwrap();
        prop_assert!((b.mean - (a.mean * k + shift)).norm() < 1e-9);
        prop_assert!((b.sigma - k * a.sigma).abs() < 1e-9 * (1.0 + k * a.sigma));
    }

    #[test]
    fn linear_fit_recovers_lines(slope in -5.0f64..5.0, intercept in -5.0f64..5.0) {
        let x: Vec<f64> = (0..10).map(|v| v as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| slope * v + intercept).collect();
        let fit = linear_fit(&x, &y).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-10 && (fit.intercept - intercept).abs() < 1e-10);
    }

    #[test]
    fn ks_distance_is_a_symmetric_fraction(a in prop::collection::vec(-10.0f64..10.0, 1..40),
                                           b in prop::collection::vec(-10.0f64..10.0, 1..40)) {
        let d = ks_distance(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((d - ks_distance(&b, &a).unwrap()).abs() < 1e-15);
        prop_assert_eq!(ks_distance(&a, &a).unwrap(), 0.0);
    }
}
