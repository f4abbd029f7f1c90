//! Exact N-soliton evaluation.
//!
//! `Y(z) = I + sum_j A_j/(z - z_j) + sum_j B_j/(z - conj z_j)` with
//! `A_j = [[f_j, 0], [g_j, 0]]` and `B_j = [[0, -conj g_j], [0, conj f_j]]`.
//! Imposing the residue conditions with `gamma_j = c_j exp(2 theta(z_j))` gives
//!
//! ```text
//! g_j     - gamma_j       sum_l conj(f_l) / (z_j - conj z_l) = gamma_j
//! conj f_k + conj gamma_k sum_l g_l       / (conj z_k - z_l) = 0
//! ```
//!
//! and the field is `psi = -2i sum_j conj(g_j)`. The full 2N system is the
//! default; eliminating `conj f` gives the N x N system
//! `(I + Gamma D conj(Gamma) conj(D)) g = gamma` with `D_jl = 1/(z_j - conj z_l)`.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{monitored_solve, CMatrix, SolveFailure};
use crate::types::{EvaluationPoint, Grid, ScatteringData, C64};

/// Solves whose condition estimate exceeds this are rejected.
pub const DEFAULT_CONDITION_LIMIT: f64 = 1e12;

/// Minimum distance between a spectral argument of `Y` and any pole.
pub const POLE_EXCLUSION: f64 = 1e-8;

/// Header of the field CSV.
pub const FIELD_CSV_HEADER: &str = "x,t,re_psi,im_psi,abs_psi";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemForm {
    /// 2N x 2N system in `(g, conj f)`.
    #[default]
    Full,
    /// N x N Schur complement in `g`; about half the work.
    Reduced,
    /// Reduced first; falls back to the full system when the reduced
    /// condition estimate exceeds [`ADAPTIVE_REDUCED_LIMIT`].
    Adaptive,
}

/// Largest reduced-system condition estimate trusted by [`SystemForm::Adaptive`].
pub const ADAPTIVE_REDUCED_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineOptions {
    pub form: SystemForm,
    pub condition_limit: f64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self { form: SystemForm::Full, condition_limit: DEFAULT_CONDITION_LIMIT }
    }
}

impl EngineOptions {
    pub fn reduced() -> Self {
        Self { form: SystemForm::Reduced, ..Self::default() }
    }

    pub fn adaptive() -> Self {
        Self { form: SystemForm::Adaptive, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub condition_estimate: f64,
    pub linear_residual: f64,
    pub n: usize,
}

impl SolveDiagnostics {
    /// Component-wise worst case.
    pub fn worst(self, other: Self) -> Self {
        Self {
            condition_estimate: self.condition_estimate.max(other.condition_estimate),
            linear_residual: self.linear_residual.max(other.linear_residual),
            n: self.n.max(other.n),
        }
    }
}

/// `psi` sampled on a grid, indexed `[t][x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub grid: Grid,
    pub psi: Vec<Vec<C64>>,
    pub diagnostics: SolveDiagnostics,
}

impl FieldSample {
    /// Writes the CSV form: one row per grid point, `t` outer, `x` inner.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{FIELD_CSV_HEADER}")?;
        for (t, row) in self.grid.t_values().iter().zip(&self.psi) {
            for (x, p) in self.grid.x_values().iter().zip(row) {
                writeln!(out, "{},{},{},{},{}", num(*x), num(*t), num(p.re), num(p.im), num(p.norm()))?;
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// Shortest round-trip decimal; negative zero prints as `0`.
pub(crate) fn num(v: f64) -> String {
    let mut s = String::new();
    write!(s, "{}", v + 0.0).unwrap();
    s
}

/// 2 x 2 matrix `Y(z; x, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixY {
    pub entries: [[C64; 2]; 2],
}

impl MatrixY {
    pub fn det(&self) -> C64 {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }
}

/// Parameters of the closed-form one-soliton.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub a: f64,
    pub b: f64,
    pub x0: f64,
    pub phi0: f64,
}

/// `theta(z, x, t) = i (z^2 t + z x)`.
pub fn theta(z: C64, x: f64, t: f64) -> C64 {
    C64::i() * (z * z * t + z * x)
}

/// Solved residue coefficients at one `(x, t)`.
#[derive(Debug, Clone)]
pub struct Coefficients {
    pub g: Vec<C64>,
    /// `conj(f_j)`.
    pub f_conj: Vec<C64>,
    pub diagnostics: SolveDiagnostics,
}

impl Coefficients {
    pub fn psi(&self) -> C64 {
        let s: C64 = self.g.iter().map(|g| g.conj()).sum();
        C64::new(0.0, -2.0) * s
    }
}

fn gammas(data: &ScatteringData, at: EvaluationPoint) -> Result<Vec<C64>> {
    let g: Vec<C64> = data
        .points()
        .iter()
        .map(|p| p.c * (theta(p.z, at.x, at.t) * 2.0).exp())
        .collect();
    if g.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::SingularSystem { x: at.x, t: at.t, condition: f64::INFINITY });
    }
    Ok(g)
}

/// Solves the residue system for `(g, conj f)` at `at`.
pub fn solve_coefficients(data: &ScatteringData, at: EvaluationPoint, opts: &EngineOptions) -> Result<Coefficients> {
    if opts.form == SystemForm::Adaptive {
        let first = EngineOptions {
            form: SystemForm::Reduced,
            condition_limit: opts.condition_limit.min(ADAPTIVE_REDUCED_LIMIT),
        };
        if let Ok(c) = solve_coefficients(data, at, &first) {
            return Ok(c);
        }
        return solve_coefficients(data, at, &EngineOptions { form: SystemForm::Full, ..*opts });
    }
    let n = data.len();
    let z: Vec<C64> = data.poles().collect();
    let gamma = gammas(data, at)?;
    let singular = |condition: f64| Error::SingularSystem { x: at.x, t: at.t, condition };
    let map_failure = |f: SolveFailure| match f {
        SolveFailure::ZeroPivot => singular(f64::INFINITY),
        SolveFailure::IllConditioned(c) => singular(c),
    };
    let zero = C64::new(0.0, 0.0);
    match opts.form {
        SystemForm::Full => {
            let a = CMatrix::from_fn(2 * n, |r, col| match (r < n, col < n) {
                (true, true) => if r == col { C64::new(1.0, 0.0) } else { zero },
                (true, false) => {
                    let l = col - n;
                    -gamma[r] / (z[r] - z[l].conj())
                }
                (false, true) => {
                    let k = r - n;
                    gamma[k].conj() / (z[k].conj() - z[col])
                }
                (false, false) => if r == col { C64::new(1.0, 0.0) } else { zero },
            });
            let mut b = gamma.clone();
            b.extend(std::iter::repeat_n(zero, n));
            let sol = monitored_solve(a, b, opts.condition_limit).map_err(map_failure)?;
            let (g, f_conj) = sol.x.split_at(n);
            Ok(Coefficients {
                g: g.to_vec(),
                f_conj: f_conj.to_vec(),
                diagnostics: SolveDiagnostics {
                    condition_estimate: sol.condition_estimate,
                    linear_residual: sol.relative_residual,
                    n,
                },
            })
        }
        SystemForm::Reduced | SystemForm::Adaptive => {
            let d = CMatrix::from_fn(n, |j, l| (z[j] - z[l].conj()).inv());
            // conj(Gamma) C with C_kl = 1/(conj z_k - z_l)
            let q = CMatrix::from_fn(n, |k, l| gamma[k].conj() / (z[k].conj() - z[l]));
            let p = d.matmul(&q);
            let m = CMatrix::from_fn(n, |j, l| {
                let v = gamma[j] * p.get(j, l);
                if j == l { v + 1.0 } else { v }
            });
            let sol = monitored_solve(m, gamma.clone(), opts.condition_limit).map_err(map_failure)?;
            let g = sol.x;
            let f_conj: Vec<C64> = q.mul_vec(&g).into_iter().map(|v| -v).collect();
            Ok(Coefficients {
                g,
                f_conj,
                diagnostics: SolveDiagnostics {
                    condition_estimate: sol.condition_estimate,
                    linear_residual: sol.relative_residual,
                    n,
                },
            })
        }
    }
}

/// `psi_N(x, t)` with the default (full-system) solver.
pub fn evaluate_psi(data: &ScatteringData, at: EvaluationPoint) -> Result<(C64, SolveDiagnostics)> {
    evaluate_psi_with(data, at, &EngineOptions::default())
}

pub fn evaluate_psi_with(
    data: &ScatteringData,
    at: EvaluationPoint,
    opts: &EngineOptions,
) -> Result<(C64, SolveDiagnostics)> {
    let coeffs = solve_coefficients(data, at, opts)?;
    Ok((coeffs.psi(), coeffs.diagnostics))
}

/// Evaluates the field on every grid point.
///
/// Points are solved independently in parallel; results and the reported
/// error (the first failing point in row-major order) do not depend on the
/// schedule.
pub fn evaluate_field(data: &ScatteringData, grid: &Grid) -> Result<FieldSample> {
    evaluate_field_with(data, grid, &EngineOptions::default())
}

pub fn evaluate_field_with(data: &ScatteringData, grid: &Grid, opts: &EngineOptions) -> Result<FieldSample> {
    let nx = grid.nx();
    let points: Vec<EvaluationPoint> = grid
        .t_values()
        .iter()
        .flat_map(|&t| grid.x_values().iter().map(move |&x| EvaluationPoint { x, t }))
        .collect();
    let results: Vec<Result<(C64, SolveDiagnostics)>> =
        points.par_iter().map(|&at| evaluate_psi_with(data, at, opts)).collect();
    let mut values = Vec::with_capacity(results.len());
    let mut diagnostics = SolveDiagnostics { condition_estimate: 1.0, linear_residual: 0.0, n: data.len() };
    for r in results {
        let (psi, d) = r?;
        diagnostics = diagnostics.worst(d);
        values.push(psi);
    }
    let psi = values.chunks(nx).map(|row| row.to_vec()).collect();
    Ok(FieldSample { grid: grid.clone(), psi, diagnostics })
}

/// `Y(z; x, t)` away from the spectrum.
pub fn evaluate_y(data: &ScatteringData, at: EvaluationPoint, z: C64) -> Result<MatrixY> {
    evaluate_y_with(data, at, z, &EngineOptions::default())
}

pub fn evaluate_y_with(data: &ScatteringData, at: EvaluationPoint, z: C64, opts: &EngineOptions) -> Result<MatrixY> {
    let distance = data
        .poles()
        .flat_map(|p| [(z - p).norm(), (z - p.conj()).norm()])
        .fold(f64::INFINITY, f64::min);
    if distance <= POLE_EXCLUSION {
        return Err(Error::PoleTooClose { distance });
    }
    let coeffs = solve_coefficients(data, at, opts)?;
    let one = C64::new(1.0, 0.0);
    let mut e = [[one, C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), one]];
    for ((p, g), fc) in data.poles().zip(&coeffs.g).zip(&coeffs.f_conj) {
        let up = (z - p).inv();
        let down = (z - p.conj()).inv();
        e[0][0] += fc.conj() * up;
        e[1][0] += g * up;
        e[0][1] -= g.conj() * down;
        e[1][1] += fc * down;
    }
    Ok(MatrixY { entries: e })
}

/// `2b sech(2b(x + 2at - x0)) exp(-2i[a x + (a^2 - b^2) t + phi0/2])`.
pub fn one_soliton_closed_form(params: SolitonParams, at: EvaluationPoint) -> C64 {
    let SolitonParams { a, b, x0, phi0 } = params;
    let EvaluationPoint { x, t } = at;
    let amp = 2.0 * b / (2.0 * b * (x + 2.0 * a * t - x0)).cosh();
    let phase = -2.0 * (a * x + (a * a - b * b) * t + 0.5 * phi0);
    C64::from_polar(amp, phase)
}

/// One-soliton parameters of the single pole `z0` with constant `c0`:
/// `x0 = ln(|c0| / 2b) / 2b`, `phi0 = pi/2 + arg c0`.
pub fn soliton_params_from_constant(z0: C64, c0: C64) -> Result<SolitonParams> {
    if z0.im <= 0.0 || !z0.im.is_finite() {
        return Err(Error::InvalidInput(format!("pole {z0} not in the upper half-plane")));
    }
    if c0.norm() == 0.0 {
        return Err(Error::ZeroConstant);
    }
    let (a, b) = (z0.re, z0.im);
    Ok(SolitonParams {
        a,
        b,
        x0: (c0.norm() / (2.0 * b)).ln() / (2.0 * b),
        phi0: FRAC_PI_2 + c0.arg(),
    })
}

fn uniform_step(v: &[f64], axis: &'static str) -> Result<f64> {
    let h = (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64;
    let tol = 1e-9 * h.abs().max(f64::MIN_POSITIVE);
    if v.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > tol.max(1e-12 * w[1].abs())) {
        return Err(Error::NonUniformGrid { axis });
    }
    Ok(h)
}

/// Max over interior points of `|i psi_t + psi_xx / 2 + |psi|^2 psi|` using
/// second-order central differences. `interior_margin` (at least 1) points
/// are skipped at every edge.
pub fn fnls_residual(field: &FieldSample, interior_margin: usize) -> Result<f64> {
    const MIN_POINTS: usize = 5;
    let (nx, nt) = (field.grid.nx(), field.grid.nt());
    let got = nx.min(nt);
    if got < MIN_POINTS {
        return Err(Error::GridTooSmall { needed: MIN_POINTS, got });
    }
    let margin = interior_margin.max(1);
    if 2 * margin >= nx || 2 * margin >= nt {
        return Err(Error::GridTooSmall { needed: 2 * margin + 1, got });
    }
    let hx = uniform_step(field.grid.x_values(), "x")?;
    let ht = uniform_step(field.grid.t_values(), "t")?;
    let psi = &field.psi;
    let mut worst: f64 = 0.0;
    for i in margin..nt - margin {
        for j in margin..nx - margin {
            let p = psi[i][j];
            let dt = (psi[i + 1][j] - psi[i - 1][j]) / (2.0 * ht);
            let dxx = (psi[i][j + 1] - p * 2.0 + psi[i][j - 1]) / (hx * hx);
            let r = C64::i() * dt + dxx * 0.5 + p * p.norm_sqr();
            worst = worst.max(r.norm());
        }
    }
    Ok(worst)
}
