use std::ffi::CStr;
use std::ptr;

use shielding_ffi::*;

fn c(re: f64, im: f64) -> ShieldingComplex {
    ShieldingComplex { re, im }
}

fn last_error() -> Option<String> {
    let p = shielding_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

fn spectrum(z: &[ShieldingComplex], cs: &[ShieldingComplex]) -> *mut ShieldingSpectrum {
    let mut s = ptr::null_mut();
    let rc = unsafe { shielding_spectrum_new(z.as_ptr(), cs.as_ptr(), z.len(), &mut s) };
    assert_eq!(rc, SHIELDING_OK, "{:?}", last_error());
    s
}

#[test]
fn one_pole_matches_closed_form() {
    let z0 = c(0.3, 0.8);
    let c0 = c(1.1, -0.4);
    let s = spectrum(&[z0], &[c0]);
    assert_eq!(unsafe { shielding_spectrum_len(s) }, 1);
    for &(x, t) in &[(0.0, 0.0), (-1.2, 0.3), (2.0, -0.5)] {
        let mut psi = c(0.0, 0.0);
        let mut cond = 0.0;
        let mut exact = c(0.0, 0.0);
        unsafe {
            assert_eq!(shielding_evaluate_psi(s, x, t, &mut psi, &mut cond), SHIELDING_OK);
            assert_eq!(shielding_one_soliton(z0, c0, x, t, &mut exact), SHIELDING_OK);
        }
        assert!(cond >= 1.0);
        let err = ((psi.re - exact.re).powi(2) + (psi.im - exact.im).powi(2)).sqrt();
        assert!(err < 1e-12, "x={x} t={t} err={err}");
    }
    unsafe { shielding_spectrum_free(s) };
}

#[test]
fn field_agrees_with_pointwise_evaluation() {
    let s = spectrum(&[c(0.2, 0.5), c(-0.4, 0.9)], &[c(1.0, 0.0), c(0.5, 0.5)]);
    let (nx, nt) = (7, 3);
    let mut field = vec![c(0.0, 0.0); nx * nt];
    let rc = unsafe { shielding_evaluate_field(s, -2.0, 2.0, nx, 0.0, 1.0, nt, field.as_mut_ptr(), field.len()) };
    assert_eq!(rc, SHIELDING_OK);
    let mut psi = c(0.0, 0.0);
    // row 2 (t = 1), column 5 (x = 1.333..)
    let x = -2.0 + 5.0 * 4.0 / 6.0;
    unsafe { shielding_evaluate_psi(s, x, 1.0, &mut psi, ptr::null_mut()) };
    let v = field[2 * nx + 5];
    assert!((v.re - psi.re).abs() < 1e-13 && (v.im - psi.im).abs() < 1e-13);

    let mut short = vec![c(0.0, 0.0); nx * nt - 1];
    let rc = unsafe { shielding_evaluate_field(s, -2.0, 2.0, nx, 0.0, 1.0, nt, short.as_mut_ptr(), short.len()) };
    assert_eq!(rc, SHIELDING_ERR_BUFFER_TOO_SMALL);
    assert!(last_error().unwrap().contains("needs 21"));
    unsafe { shielding_spectrum_free(s) };
}

#[test]
fn y_has_unit_determinant() {
    let s = spectrum(&[c(0.1, 0.7), c(0.6, 0.3), c(-0.5, 1.2)], &[c(1.0, 0.2), c(-0.3, 0.8), c(0.7, -0.1)]);
    let mut y = [c(0.0, 0.0); 4];
    let rc = unsafe { shielding_evaluate_y(s, 0.4, 0.2, c(1.5, 2.5), y.as_mut_ptr()) };
    assert_eq!(rc, SHIELDING_OK);
    let mul = |a: ShieldingComplex, b: ShieldingComplex| c(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
    let (p, q) = (mul(y[0], y[3]), mul(y[1], y[2]));
    assert!((p.re - q.re - 1.0).abs() < 1e-10 && (p.im - q.im).abs() < 1e-10);
    unsafe { shielding_spectrum_free(s) };
}

#[test]
fn library_errors_carry_their_codes() {
    let mut s = ptr::null_mut();
    let z = [c(0.0, -1.0)];
    let cs = [c(1.0, 0.0)];
    let rc = unsafe { shielding_spectrum_new(z.as_ptr(), cs.as_ptr(), 1, &mut s) };
    assert_eq!(rc, shielding::Error::InvariantViolation(String::new()).code());
    assert!(s.is_null());
    assert!(last_error().unwrap().contains("upper half-plane"));

    let mut k = 0.0;
    assert_eq!(unsafe { shielding_elliptic_k(0.0, &mut k) }, SHIELDING_OK);
    assert!(last_error().is_none());
    assert!((k - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    assert_eq!(unsafe { shielding_elliptic_k(1.5, &mut k) }, 1);
}

#[test]
fn null_pointers_are_rejected() {
    let z = [c(0.0, 1.0)];
    unsafe {
        assert_eq!(shielding_spectrum_new(z.as_ptr(), z.as_ptr(), 1, ptr::null_mut()), SHIELDING_ERR_NULL_POINTER);
        assert_eq!(
            shielding_spectrum_new(ptr::null(), z.as_ptr(), 1, &mut ptr::null_mut()),
            SHIELDING_ERR_NULL_POINTER
        );
        let mut psi = c(0.0, 0.0);
        assert_eq!(shielding_evaluate_psi(ptr::null(), 0.0, 0.0, &mut psi, ptr::null_mut()), SHIELDING_ERR_NULL_POINTER);
        assert_eq!(shielding_elliptic_k(0.5, ptr::null_mut()), SHIELDING_ERR_NULL_POINTER);
        assert_eq!(shielding_spectrum_len(ptr::null()), 0);
        shielding_spectrum_free(ptr::null_mut());
        shielding_points_free(ptr::null_mut());
    }
}

#[test]
fn two_fekete_points_are_antipodal() {
    let mut pts = ptr::null_mut();
    assert_eq!(unsafe { shielding_fekete_points(2, 1e-9, 100_000, 3, &mut pts) }, SHIELDING_OK);
    assert_eq!(unsafe { shielding_points_len(pts) }, 2);
    let mut buf = [c(0.0, 0.0); 2];
    assert_eq!(unsafe { shielding_points_copy(pts, buf.as_mut_ptr(), 2) }, SHIELDING_OK);
    for p in &buf {
        assert!(((p.re * p.re + p.im * p.im).sqrt() - 0.5f64.sqrt()).abs() < 1e-6);
    }
    assert!((buf[0].re + buf[1].re).abs() < 1e-6 && (buf[0].im + buf[1].im).abs() < 1e-6);
    let mut second = c(0.0, 0.0);
    assert_eq!(unsafe { shielding_points_get(pts, 1, &mut second) }, SHIELDING_OK);
    assert_eq!(second, buf[1]);
    assert_eq!(unsafe { shielding_points_get(pts, 2, &mut second) }, SHIELDING_ERR_OUT_OF_RANGE);
    assert_eq!(unsafe { shielding_points_copy(pts, buf.as_mut_ptr(), 1) }, SHIELDING_ERR_BUFFER_TOO_SMALL);
    unsafe { shielding_points_free(pts) };

    let mut none = ptr::null_mut();
    let rc = unsafe { shielding_fekete_points(30, 1e-14, 3, 1, &mut none) };
    assert_eq!(rc, shielding::Error::MaxIterationsExceeded { iterations: 0, gradient_norm: 0.0 }.code());
    assert!(none.is_null());
}

#[test]
fn ginibre_sample_is_reproducible() {
    let draw = |seed| {
        let mut pts = ptr::null_mut();
        assert_eq!(unsafe { shielding_ginibre_sample(40, seed, &mut pts) }, SHIELDING_OK);
        let mut buf = vec![c(0.0, 0.0); 40];
        unsafe {
            shielding_points_copy(pts, buf.as_mut_ptr(), buf.len());
            shielding_points_free(pts);
        }
        buf
    };
    assert_eq!(draw(9), draw(9));
    assert_ne!(draw(9), draw(10));
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(shielding_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
