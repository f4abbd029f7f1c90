//! Dense complex linear algebra on top of `faer`.
//!
//! Factorization and products come from `faer`; this module adds a
//! Hager-Higham estimate of `||A^-1||_inf` and a solve with iterative
//! refinement whose residuals are accumulated in double-double arithmetic,
//! which recovers working accuracy up to condition numbers near `1/eps`.
//! Together they give the diagnostics the soliton engine attaches to every
//! evaluation.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;

use crate::types::C64;

/// Refinement sweeps allowed per solve.
pub const MAX_REFINEMENT_STEPS: usize = 10;

/// Square complex matrix.
#[derive(Debug, Clone)]
pub struct CMatrix {
    m: Mat<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { m: Mat::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: Mat::identity(n, n) }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self { m: Mat::from_fn(n, n, f) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.m[(i, j)] = v;
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (j, xj) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.m.col_as_slice(j)) {
                *o += a * xj;
            }
        }
        out
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        Self { m: &self.m * &other.m }
    }

    /// Max row sum of moduli.
    pub fn norm_inf(&self) -> f64 {
        let n = self.dim();
        let mut sums = vec![0.0; n];
        for j in 0..n {
            for (s, a) in sums.iter_mut().zip(self.m.col_as_slice(j)) {
                *s += a.norm();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    fn row_abs_max(&self) -> Vec<f64> {
        let n = self.dim();
        let mut maxes = vec![0.0f64; n];
        for j in 0..n {
            for (s, a) in maxes.iter_mut().zip(self.m.col_as_slice(j)) {
                *s = s.max(a.norm());
            }
        }
        maxes
    }

    /// Multiplies row `i` by `scale[i]` for every row.
    pub fn scale_rows(&mut self, scale: &[f64]) {
        for j in 0..self.dim() {
            for (a, s) in self.m.col_as_slice_mut(j).iter_mut().zip(scale) {
                *a *= s;
            }
        }
    }
}

/// LU factors `P A = L U` with partial pivoting.
pub struct LuFactors {
    lu: PartialPivLu<C64>,
    n: usize,
}

/// Pivot too small to continue: the matrix is numerically singular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroPivot {
    pub column: usize,
}

fn to_col(b: &[C64]) -> Mat<C64> {
    Mat::from_fn(b.len(), 1, |i, _| b[i])
}

fn from_col(m: Mat<C64>) -> Vec<C64> {
    m.col_as_slice(0).to_vec()
}

impl LuFactors {
    pub fn factor(a: &CMatrix) -> Result<Self, ZeroPivot> {
        let n = a.dim();
        let lu = a.m.partial_piv_lu();
        let u = lu.U();
        if let Some(column) = (0..n).find(|&k| {
            let d = u[(k, k)];
            d == C64::new(0.0, 0.0) || !(d.re.is_finite() && d.im.is_finite())
        }) {
            return Err(ZeroPivot { column });
        }
        Ok(Self { lu, n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x = to_col(b);
        self.lu.solve_in_place(&mut x);
        from_col(x)
    }

    /// Solves `A^H x = b`.
    pub fn solve_adjoint(&self, b: &[C64]) -> Vec<C64> {
        let mut x = to_col(b);
        self.lu.solve_adjoint_in_place(&mut x);
        from_col(x)
    }

    /// Hager-Higham estimate of `||A^-1||_inf` (= `||A^-H||_1`).
    pub fn inverse_norm_inf_estimate(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 0.0;
        }
        let one_norm = |v: &[C64]| v.iter().map(|z| z.norm()).sum::<f64>();
        let sign = |z: C64| {
            let r = z.norm();
            if r == 0.0 {
                C64::new(1.0, 0.0)
            } else {
                z / r
            }
        };
        // the 1-norm estimator is run on B = A^-H, so B x uses solve_adjoint and B^H x uses solve
        let mut x = vec![C64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve_adjoint(&x);
            let new_est = one_norm(&y);
            if new_est <= est && last_j != usize::MAX {
                break;
            }
            est = new_est;
            let xi: Vec<C64> = y.iter().map(|&v| sign(v)).collect();
            let zv = self.solve(&xi);
            let (j, zmax) = zv
                .iter()
                .enumerate()
                .map(|(k, v)| (k, v.re))
                .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            let ztx: f64 = zv.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if zmax <= ztx || j == last_j {
                break;
            }
            last_j = j;
            x = vec![C64::new(0.0, 0.0); n];
            x[j] = C64::new(1.0, 0.0);
        }
        // Higham's alternating-sign safeguard vector
        let alt: Vec<C64> = (0..n)
            .map(|k| {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                C64::new(s * (1.0 + k as f64 / (n.max(2) - 1) as f64), 0.0)
            })
            .collect();
        let w = self.solve_adjoint(&alt);
        let alt_est = 2.0 * one_norm(&w) / (3.0 * n as f64);
        est.max(alt_est)
    }
}

/// Outcome of a monitored solve.
#[derive(Debug, Clone)]
pub struct MonitoredSolution {
    pub x: Vec<C64>,
    /// `||A||_inf * ||A^-1||_inf` estimate for the row-equilibrated matrix.
    pub condition_estimate: f64,
    /// `||b - A x||_inf / (||A||_inf ||x||_inf + ||b||_inf)` after refinement,
    /// with the residual evaluated in extended precision.
    pub relative_residual: f64,
}

/// Reasons a monitored solve can fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveFailure {
    ZeroPivot,
    IllConditioned(f64),
}

/// Error-free product `a * b = p + e` (Dekker).
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    const SPLIT: f64 = 134_217_729.0; // 2^27 + 1
    let p = a * b;
    let split = |v: f64| {
        let t = SPLIT * v;
        let hi = t - (t - v);
        (hi, v - hi)
    };
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

/// Double-double accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    #[inline]
    fn add(self, v: f64, err: f64) -> Self {
        let s = self.hi + v;
        let bb = s - self.hi;
        let e = (self.hi - (s - bb)) + (v - bb) + self.lo + err;
        let hi = s + e;
        Self { hi, lo: e - (hi - s) }
    }

    #[inline]
    fn add_prod(self, a: f64, b: f64) -> Self {
        let (p, e) = two_prod(a, b);
        self.add(p, e)
    }

    #[inline]
    fn sub_prod(self, a: f64, b: f64) -> Self {
        let (p, e) = two_prod(a, b);
        self.add(-p, -e)
    }
}

/// `b - A x` accumulated in double-double and rounded once.
pub fn residual_extended(a: &CMatrix, x: &[C64], b: &[C64]) -> Vec<C64> {
    let mut re: Vec<Dd> = b.iter().map(|v| Dd { hi: v.re, lo: 0.0 }).collect();
    let mut im: Vec<Dd> = b.iter().map(|v| Dd { hi: v.im, lo: 0.0 }).collect();
    for (j, xj) in x.iter().enumerate() {
        for ((r, i), a) in re.iter_mut().zip(im.iter_mut()).zip(a.m.col_as_slice(j)) {
            *r = r.sub_prod(a.re, xj.re).add_prod(a.im, xj.im);
            *i = i.sub_prod(a.re, xj.im).sub_prod(a.im, xj.re);
        }
    }
    re.iter().zip(&im).map(|(r, i)| C64::new(r.hi + r.lo, i.hi + i.lo)).collect()
}

/// Row-equilibrates by powers of two, factors, estimates the condition
/// number, solves, and refines with extended-precision residuals until the
/// correction stalls or drops below working precision.
pub fn monitored_solve(mut a: CMatrix, mut b: Vec<C64>, condition_limit: f64) -> Result<MonitoredSolution, SolveFailure> {
    let scale: Vec<f64> = a
        .row_abs_max()
        .into_iter()
        .map(|m| if m > 0.0 && m.is_finite() { (-m.log2().round()).exp2() } else { 1.0 })
        .collect();
    a.scale_rows(&scale);
    for (v, s) in b.iter_mut().zip(&scale) {
        *v *= s;
    }
    let a_norm = a.norm_inf();
    let lu = LuFactors::factor(&a).map_err(|_| SolveFailure::ZeroPivot)?;
    let condition_estimate = (a_norm * lu.inverse_norm_inf_estimate()).max(1.0);
    if !condition_estimate.is_finite() || condition_estimate > condition_limit {
        return Err(SolveFailure::IllConditioned(condition_estimate));
    }
    let inf = |v: &[C64]| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut x = lu.solve(&b);
    let mut last = f64::INFINITY;
    for _ in 0..MAX_REFINEMENT_STEPS {
        let d = lu.solve(&residual_extended(&a, &x, &b));
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += di;
        }
        let step = inf(&d);
        if step <= f64::EPSILON * inf(&x) || step > 0.5 * last {
            break;
        }
        last = step;
    }
    let r = residual_extended(&a, &x, &b);
    let denom = a_norm * inf(&x) + inf(&b);
    let relative_residual = if denom > 0.0 { inf(&r) / denom } else { 0.0 };
    Ok(MonitoredSolution { x, condition_estimate, relative_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    }

    fn random_matrix(n: usize, seed: u64) -> CMatrix {
        let mut s = seed;
        CMatrix::from_fn(n, |_, _| c(lcg(&mut s), lcg(&mut s)))
    }

    #[test]
    fn solves_random_system() {
        for n in [1, 2, 5, 17, 40, 150] {
            let a = random_matrix(n, n as u64);
            let mut s = 99;
            let x_true: Vec<C64> = (0..n).map(|_| c(lcg(&mut s), lcg(&mut s))).collect();
            let b = a.mul_vec(&x_true);
            let sol = monitored_solve(a.clone(), b, 1e12).unwrap();
            for (u, v) in sol.x.iter().zip(&x_true) {
                assert!((u - v).norm() < 1e-10 * sol.condition_estimate.max(1.0));
            }
            assert!(sol.relative_residual < 1e-14);
        }
    }

    #[test]
    fn adjoint_solve() {
        let n = 12;
        let a = random_matrix(n, 7);
        let lu = LuFactors::factor(&a).unwrap();
        let mut s = 3;
        let b: Vec<C64> = (0..n).map(|_| c(lcg(&mut s), lcg(&mut s))).collect();
        let x = lu.solve_adjoint(&b);
        let ah = CMatrix::from_fn(n, |i, j| a.get(j, i).conj());
        let r = ah.mul_vec(&x);
        for (u, v) in r.iter().zip(&b) {
            assert!((u - v).norm() < 1e-11);
        }
    }

    #[test]
    fn condition_estimate_brackets_exact_inverse_norm() {
        let n = 10;
        let a = random_matrix(n, 11);
        let lu = LuFactors::factor(&a).unwrap();
        let mut exact: f64 = 0.0;
        let cols: Vec<Vec<C64>> = (0..n)
            .map(|j| {
                let mut e = vec![c(0.0, 0.0); n];
                e[j] = c(1.0, 0.0);
                lu.solve(&e)
            })
            .collect();
        for i in 0..n {
            exact = exact.max((0..n).map(|j| cols[j][i].norm()).sum());
        }
        let est = lu.inverse_norm_inf_estimate();
        assert!(est <= exact * (1.0 + 1e-12));
        assert!(est >= exact / 10.0);
    }

    #[test]
    fn singular_and_ill_conditioned() {
        let a = CMatrix::from_fn(3, |i, _| c(i as f64 + 1.0, 0.0));
        assert!(monitored_solve(a, vec![c(1.0, 0.0); 3], 1e12).is_err());
        let eps = 1e-14;
        let a = CMatrix::from_fn(2, |i, j| if i == 1 && j == 1 { c(1.0 + eps, 0.0) } else { c(1.0, 0.0) });
        assert!(matches!(
            monitored_solve(a, vec![c(1.0, 0.0); 2], 1e12),
            Err(SolveFailure::IllConditioned(_))
        ));
    }

    #[test]
    fn matmul_matches_naive() {
        let a = random_matrix(6, 1);
        let b = random_matrix(6, 2);
        let p = a.matmul(&b);
        for i in 0..6 {
            for j in 0..6 {
                let v: C64 = (0..6).map(|k| a.get(i, k) * b.get(k, j)).sum();
                assert!((p.get(i, j) - v).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn two_prod_is_exact() {
        let a = 1.0 + 2f64.powi(-30);
        let (p, e) = two_prod(a, a);
        assert_eq!(p, 1.0 + 2f64.powi(-29));
        assert_eq!(e, 2f64.powi(-60));
    }

    #[test]
    fn refinement_reaches_working_accuracy_on_hilbert() {
        let n = 10;
        let a = CMatrix::from_fn(n, |i, j| c(1.0 / (i + j + 1) as f64, 0.0));
        let b: Vec<C64> = (0..n).map(|k| c(1.0, k as f64)).collect();
        let sol = monitored_solve(a.clone(), b.clone(), 1e16).unwrap();
        assert!(sol.condition_estimate > 1e12);
        assert!(sol.relative_residual < 1e-15, "{}", sol.relative_residual);
        let r = residual_extended(&a, &sol.x, &b);
        let scale = sol.x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(r.iter().all(|v| v.norm() < 1e-14 * scale));
    }
}
