//! Matrix Riccati equations with the limit datum `V⁻¹ → 0` as `t → 0⁺`.
//!
//! Solutions are obtained from the linear lift
//! `d/dt (M; N) = [[−Aᵀ, −R(t)], [B, A]] (M; N)`, `M(0) = I`, `N(0) = 0`,
//! integrated with fixed-step RK4, and `V = M N⁻¹`.
//!
//! `V` blows up like `t^{−(c_i + c_j + 1)}` where `c` is the column of a
//! box. Every solution therefore also carries the congruence-normalized
//! matrix `D V D`, `D = diag(s^{c + 1/2})`, `s = min(t, 1)`, which is
//! `O(1)` near `t = 0`. Loewner comparisons are made on it, which is
//! legitimate because congruence preserves the order.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LqdError, Result};
use crate::grid::GridSpec;
use crate::linalg::{self, asymmetry, max_eigenvalue, min_eigenvalue, Mat};
use crate::tolerances;
use crate::young::YoungDiagram;

pub type MatFn = Arc<dyn Fn(f64) -> Mat + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Curvature `R(t)` along a geodesic together with the volume derivative
/// `ρ(t)` and its time derivative.
#[derive(Clone)]
pub struct CurvatureProfile {
    dim: usize,
    k: usize,
    diagram: Option<YoungDiagram>,
    columns: Option<Vec<usize>>,
    curvature: MatFn,
    rho: ScalarFn,
    rho_dot: ScalarFn,
}

impl fmt::Debug for CurvatureProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurvatureProfile")
            .field("dim", &self.dim)
            .field("k", &self.k)
            .field("diagram", &self.diagram)
            .finish_non_exhaustive()
    }
}

fn zero_fn() -> ScalarFn {
    Arc::new(|_| 0.0)
}

impl CurvatureProfile {
    pub fn constant(y: &YoungDiagram, r: Mat) -> Result<Self> {
        if r.shape() != (y.n(), y.n()) {
            return Err(LqdError::ShapeMismatch(format!("R is {:?}, diagram has {} boxes", r.shape(), y.n())));
        }
        Ok(Self::from_fn(y, move |_| r.clone()))
    }

    pub(crate) fn constant_with_columns(r: Mat, k: usize, columns: Option<Vec<usize>>) -> Self {
        CurvatureProfile {
            dim: r.nrows(),
            k,
            diagram: None,
            columns,
            curvature: Arc::new(move |_| r.clone()),
            rho: zero_fn(),
            rho_dot: zero_fn(),
        }
    }

    pub fn from_fn(y: &YoungDiagram, curvature: impl Fn(f64) -> Mat + Send + Sync + 'static) -> Self {
        CurvatureProfile {
            dim: y.n(),
            k: y.k(),
            diagram: Some(y.clone()),
            columns: Some(y.box_columns()),
            curvature: Arc::new(curvature),
            rho: zero_fn(),
            rho_dot: zero_fn(),
        }
    }

    pub fn with_weight(
        mut self,
        rho: impl Fn(f64) -> f64 + Send + Sync + 'static,
        rho_dot: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.rho = Arc::new(rho);
        self.rho_dot = Arc::new(rho_dot);
        self
    }

    /// Profile from samples, linearly interpolated and held constant
    /// outside the sampled range.
    pub fn from_samples(
        y: &YoungDiagram,
        times: Vec<f64>,
        r: Vec<Mat>,
        rho: Vec<f64>,
        rho_dot: Vec<f64>,
    ) -> Result<Self> {
        let m = times.len();
        if m == 0 || r.len() != m || rho.len() != m || rho_dot.len() != m {
            return Err(LqdError::ShapeMismatch("sample arrays must share a nonzero length".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LqdError::InvalidInput("sample times must increase".into()));
        }
        if r.iter().any(|x| x.shape() != (y.n(), y.n())) {
            return Err(LqdError::ShapeMismatch("sample matrix size differs from the diagram".into()));
        }
        let times = Arc::new(times);
        let locate = {
            let times = times.clone();
            move |t: f64| -> (usize, f64) {
                if m == 1 || t <= times[0] {
                    return (0, 0.0);
                }
                if t >= times[m - 1] {
                    return (m - 2, 1.0);
                }
                let j = times.partition_point(|&s| s <= t) - 1;
                (j, (t - times[j]) / (times[j + 1] - times[j]))
            }
        };
        let lerp = move |v: Vec<f64>| {
            let locate = locate.clone();
            move |t: f64| {
                let (j, w) = locate(t);
                if m == 1 {
                    v[0]
                } else {
                    v[j] * (1.0 - w) + v[j + 1] * w
                }
            }
        };
        let r = Arc::new(r);
        let times_r = times.clone();
        let curvature = move |t: f64| {
            if m == 1 || t <= times_r[0] {
                return r[0].clone();
            }
            if t >= times_r[m - 1] {
                return r[m - 1].clone();
            }
            let j = times_r.partition_point(|&s| s <= t) - 1;
            let w = (t - times_r[j]) / (times_r[j + 1] - times_r[j]);
            &r[j] * (1.0 - w) + &r[j + 1] * w
        };
        Ok(Self::from_fn(y, curvature).with_weight(lerp(rho), lerp(rho_dot)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    /// Rank of the distribution.
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn diagram(&self) -> Option<&YoungDiagram> {
        self.diagram.as_ref()
    }
    pub fn columns(&self) -> Option<&[usize]> {
        self.columns.as_deref()
    }
    pub fn curvature(&self, t: f64) -> Mat {
        (self.curvature)(t)
    }
    pub fn rho(&self, t: f64) -> f64 {
        (self.rho)(t)
    }
    pub fn rho_dot(&self, t: f64) -> f64 {
        (self.rho_dot)(t)
    }
    pub fn is_weighted_at(&self, t: f64) -> bool {
        self.rho(t) != 0.0 || self.rho_dot(t) != 0.0
    }

    /// Largest asymmetry of `R(t)` over `times`.
    pub fn symmetry_defect(&self, times: &[f64]) -> f64 {
        times.iter().map(|&t| asymmetry(&self.curvature(t))).fold(0.0, f64::max)
    }

    /// Largest `|(ρ(t+h) − ρ(t−h))/2h − ρ̇(t)|` over `points`.
    pub fn rho_dot_defect(&self, points: &[f64], h: f64) -> f64 {
        points
            .iter()
            .map(|&t| ((self.rho(t + h) - self.rho(t - h)) / (2.0 * h) - self.rho_dot(t)).abs())
            .fold(0.0, f64::max)
    }

    /// Trace of `R(t)` over superbox `(level, col)`.
    pub fn superbox_ricci(&self, t: f64, level: usize, col: usize) -> Result<f64> {
        let y = self.diagram.as_ref().ok_or_else(|| LqdError::InvalidInput("profile has no diagram".into()))?;
        let r = self.curvature(t);
        Ok(y.superbox(level, col).into_iter().map(|j| r[(j, j)]).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiOptions {
    pub step: f64,
    /// Also solve with twice the step and report the Richardson estimate.
    pub richardson: bool,
}

impl Default for RiccatiOptions {
    fn default() -> Self {
        RiccatiOptions { step: tolerances::RK4_STEP, richardson: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSolution {
    pub times: Vec<f64>,
    pub v: Vec<Mat>,
    /// `D V D` with `D = diag(s^{c+1/2})`.
    pub normalized: Vec<Mat>,
    pub limit_initial: bool,
    /// `max ‖W_h − W_{2h}‖_∞ / 15` on the normalized solution.
    pub richardson_error: Option<f64>,
}

impl RiccatiSolution {
    pub fn symmetry_defect(&self) -> f64 {
        self.v.iter().map(|v| asymmetry(v) / v.amax().max(1.0)).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of `V` at the first node exceeds `1/(10 t₁)`.
    pub fn limit_condition_holds(&self) -> bool {
        min_eigenvalue(&self.v[0]) > 1.0 / (10.0 * self.times[0])
    }
}

fn lift_rhs(a: &Mat, at: &Mat, b: &Mat, r: &Mat, m: &Mat, n: &Mat) -> (Mat, Mat) {
    (-(at * m) - r * n, b * m + a * n)
}

/// `(M, N)` at each of the increasing positive `times`, by RK4 from
/// `(I, 0)` at `t = 0` with steps at most `min(step, t/256)`.
pub fn integrate_lift(a: &Mat, b: &Mat, profile: &CurvatureProfile, times: &[f64], step: f64) -> Vec<(Mat, Mat)> {
    let n = a.nrows();
    let at = a.transpose();
    let mut m = Mat::identity(n, n);
    let mut nn = Mat::zeros(n, n);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        // near t = 0 the solution is resolved relative to its own time scale
        let h_max = step.min(tolerances::RK4_RELATIVE_STEP * target);
        let steps = ((target - t) / h_max).ceil().max(0.0) as usize;
        if steps > 0 {
            let h = (target - t) / steps as f64;
            for i in 0..steps {
                let t0 = t + h * i as f64;
                let r0 = profile.curvature(t0);
                let rh = profile.curvature(t0 + 0.5 * h);
                let r1 = profile.curvature(t0 + h);
                let (k1m, k1n) = lift_rhs(a, &at, b, &r0, &m, &nn);
                let (k2m, k2n) = lift_rhs(a, &at, b, &rh, &(&m + &k1m * (0.5 * h)), &(&nn + &k1n * (0.5 * h)));
                let (k3m, k3n) = lift_rhs(a, &at, b, &rh, &(&m + &k2m * (0.5 * h)), &(&nn + &k2n * (0.5 * h)));
                let (k4m, k4n) = lift_rhs(a, &at, b, &r1, &(&m + &k3m * h), &(&nn + &k3n * h));
                m += (k1m + k2m * 2.0 + k3m * 2.0 + k4m) * (h / 6.0);
                nn += (k1n + k2n * 2.0 + k3n * 2.0 + k4n) * (h / 6.0);
            }
            t = target;
        }
        out.push((m.clone(), nn.clone()));
    }
    out
}

/// `(W, V)` from `(M, N)` at time `t`.
fn normalize(m: &Mat, n: &Mat, t: f64, columns: Option<&[usize]>) -> Result<(Mat, Mat)> {
    let dim = m.nrows();
    let s = if columns.is_some() { t.min(1.0) } else { 1.0 };
    let c: Vec<f64> = match columns {
        Some(cols) => cols.iter().map(|&c| c as f64).collect(),
        None => vec![0.0; dim],
    };
    let pw: Vec<f64> = c.iter().map(|&ci| s.powf(ci)).collect();
    let m_t = Mat::from_fn(dim, dim, |i, j| pw[i] * m[(i, j)] / pw[j]);
    let n_t = Mat::from_fn(dim, dim, |i, j| n[(i, j)] / (pw[i] * s * pw[j]));
    let scale = m_t.amax().max(n_t.amax());
    if n_t.clone().singular_values().min() < 1e-12 * scale {
        return Err(LqdError::SingularN { t });
    }
    let x = n_t
        .transpose()
        .lu()
        .solve(&m_t.transpose())
        .ok_or(LqdError::SingularN { t })?;
    let w = linalg::symmetrize(&x.transpose());
    let v = Mat::from_fn(dim, dim, |i, j| w[(i, j)] / (pw[i] * pw[j] * s));
    Ok((w, v))
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() || times[0] <= 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LqdError::InvalidInput("times must be positive and strictly increasing".into()));
    }
    Ok(())
}

fn check_dims(a: &Mat, b: &Mat, profile: &CurvatureProfile) -> Result<()> {
    let n = profile.dim();
    if a.shape() != (n, n) || b.shape() != (n, n) {
        return Err(LqdError::ShapeMismatch(format!(
            "A {:?}, B {:?}, profile dimension {n}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

pub fn solve_riccati_limit(
    a: &Mat,
    b: &Mat,
    profile: &CurvatureProfile,
    times: &[f64],
    opts: RiccatiOptions,
) -> Result<RiccatiSolution> {
    check_dims(a, b, profile)?;
    check_times(times)?;
    let cols = profile.columns();
    let lift = integrate_lift(a, b, profile, times, opts.step);
    let mut v = Vec::with_capacity(times.len());
    let mut w = Vec::with_capacity(times.len());
    for (&t, (m, n)) in times.iter().zip(&lift) {
        let (wi, vi) = normalize(m, n, t, cols)?;
        w.push(wi);
        v.push(vi);
    }
    let richardson_error = if opts.richardson {
        let coarse = integrate_lift(a, b, profile, times, 2.0 * opts.step);
        let mut err: f64 = 0.0;
        for ((&t, (m, n)), wi) in times.iter().zip(&coarse).zip(&w) {
            let (wc, _) = normalize(m, n, t, cols)?;
            err = err.max((wi - wc).amax() / 15.0);
        }
        Some(err)
    } else {
        None
    };
    Ok(RiccatiSolution { times: times.to_vec(), v, normalized: w, limit_initial: true, richardson_error })
}

/// Largest `s·‖D X D‖_∞` over `times`, where
/// `X = V̇ + AᵀV + VA + VBV + R` and `V̇` is a relative central difference.
pub fn riccati_residual(a: &Mat, b: &Mat, profile: &CurvatureProfile, times: &[f64]) -> Result<f64> {
    let stencil = Stencil::solve(a, b, profile, times)?;
    let mut worst: f64 = 0.0;
    for &t in times {
        let v = stencil.at(t);
        let vdot = stencil.derivative(t, |x| x.clone());
        let x = vdot + a.transpose() * v + v * a + v * b * v + profile.curvature(t);
        worst = worst.max(scaled_norm(&x, t, profile.columns()));
    }
    Ok(worst)
}

/// Riccati solution on `t(1 + jη)`, `j = −2..=2`, for five-point derivatives.
struct Stencil {
    sol: RiccatiSolution,
}

impl Stencil {
    const ETA: f64 = 1e-3;
    const OFFSETS: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];

    fn solve(a: &Mat, b: &Mat, profile: &CurvatureProfile, times: &[f64]) -> Result<Self> {
        let mut all: Vec<f64> = times
            .iter()
            .flat_map(|&t| std::iter::once(t).chain(Self::OFFSETS.iter().map(move |&j| t * (1.0 + j * Self::ETA))))
            .collect();
        all.sort_by(|x, y| x.partial_cmp(y).unwrap());
        all.dedup();
        Ok(Stencil { sol: solve_riccati_limit(a, b, profile, &all, RiccatiOptions::default())? })
    }

    fn at(&self, t: f64) -> &Mat {
        let j = self.sol.times.iter().position(|&s| s == t).expect("stencil node");
        &self.sol.v[j]
    }

    /// `d/dt f(V(t), t)` by the fourth-order central difference.
    fn derivative(&self, t: f64, f: impl Fn(&Mat) -> Mat) -> Mat {
        self.derivative_t(t, |v, _| f(v))
    }

    fn derivative_t(&self, t: f64, f: impl Fn(&Mat, f64) -> Mat) -> Mat {
        let h = t * Self::ETA;
        let g = |j: f64| {
            let s = t * (1.0 + j * Self::ETA);
            f(self.at(s), s)
        };
        (g(-2.0) - g(-1.0) * 8.0 + g(1.0) * 8.0 - g(2.0)) / (12.0 * h)
    }
}

/// `s·‖D X D‖_∞` for a matrix scaling like `V̇`.
fn scaled_norm(x: &Mat, t: f64, columns: Option<&[usize]>) -> f64 {
    normalize_like_v(x, t, columns).amax() * if columns.is_some() { t.min(1.0) } else { 1.0 }
}

/// `D X D` with `D = diag(s^{c+1/2})`.
pub fn normalize_like_v(x: &Mat, t: f64, columns: Option<&[usize]>) -> Mat {
    match columns {
        None => x.clone(),
        Some(cols) => {
            let s = t.min(1.0);
            Mat::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] * s.powf(cols[i] as f64 + cols[j] as f64 + 1.0))
        }
    }
}

/// Verification report shared by the comparison checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub check: String,
    pub grid: GridSpec,
    pub min_eig: f64,
    pub tol: f64,
    pub verdict: bool,
}

/// Solves both limit problems and reports `min_t λ_min(V₂ − V₁)` on the
/// normalized solutions. Requires `R₁ ⪰ R₂` on the grid.
pub fn riccati_comparison_check(
    a: &Mat,
    b: &Mat,
    r1: &CurvatureProfile,
    r2: &CurvatureProfile,
    grid: &[f64],
    tol: f64,
) -> Result<ComparisonReport> {
    for &t in grid {
        let gap = min_eigenvalue(&(r1.curvature(t) - r2.curvature(t)));
        if gap < -tolerances::HYPOTHESIS {
            return Err(LqdError::HypothesisViolated(format!(
                "R1 - R2 has eigenvalue {gap:e} at t = {t}"
            )));
        }
    }
    let s1 = solve_riccati_limit(a, b, r1, grid, RiccatiOptions::default())?;
    let s2 = solve_riccati_limit(a, b, r2, grid, RiccatiOptions::default())?;
    let min_eig = s1
        .normalized
        .iter()
        .zip(&s2.normalized)
        .map(|(w1, w2)| min_eigenvalue(&(w2 - w1)))
        .fold(f64::INFINITY, f64::min);
    Ok(ComparisonReport {
        check: "riccati-comparison".into(),
        grid: GridSpec::of(grid),
        min_eig,
        tol,
        verdict: min_eig >= -tol,
    })
}

/// Data of the weighted Riccati inequality with parameter `N > n`.
#[derive(Debug, Clone)]
pub struct BakryEmery {
    pub a_bar: Mat,
    pub b_bar: Mat,
    /// `R_μ^N(t) = R(t) − (ρ̇/k + n/(N−n)·ρ²/k²) B`, with `ρ ≡ 0`.
    pub profile: CurvatureProfile,
    pub n_param: f64,
}

pub fn bakry_emery_transform(a: &Mat, b: &Mat, profile: &CurvatureProfile, n_param: f64) -> Result<BakryEmery> {
    check_dims(a, b, profile)?;
    let n = profile.dim() as f64;
    if !(n_param > n) {
        return Err(LqdError::InvalidInput(format!("N = {n_param} must exceed n = {n}")));
    }
    let k = profile.k() as f64;
    let inner = profile.clone();
    let bb = b.clone();
    let curvature = move |t: f64| {
        let rho = inner.rho(t);
        let c = inner.rho_dot(t) / k + n / (n_param - n) * rho * rho / (k * k);
        inner.curvature(t) - &bb * c
    };
    let transformed = CurvatureProfile {
        dim: profile.dim,
        k: profile.k,
        diagram: profile.diagram.clone(),
        columns: profile.columns.clone(),
        curvature: Arc::new(curvature),
        rho: zero_fn(),
        rho_dot: zero_fn(),
    };
    Ok(BakryEmery { a_bar: a.clone(), b_bar: b * (n / n_param), profile: transformed, n_param })
}

/// Largest eigenvalue over `times` of the normalized residual
/// `D (V̄̇ + ĀᵀV̄ + V̄Ā + V̄B̄V̄ + R_μ^N) D`, `V̄ = V + (ρ/k) B`.
pub fn bakry_emery_residual(
    a: &Mat,
    b: &Mat,
    profile: &CurvatureProfile,
    n_param: f64,
    times: &[f64],
) -> Result<f64> {
    let be = bakry_emery_transform(a, b, profile, n_param)?;
    let k = profile.k() as f64;
    let stencil = Stencil::solve(a, b, profile, times)?;
    let vbar = |v: &Mat, t: f64| v + b * (profile.rho(t) / k);
    let mut worst = f64::NEG_INFINITY;
    for &t in times {
        let dot = stencil.derivative_t(t, vbar);
        let vb = vbar(stencil.at(t), t);
        let res = dot + be.a_bar.transpose() * &vb + &vb * &be.a_bar + &vb * &be.b_bar * &vb + be.profile.curvature(t);
        worst = worst.max(max_eigenvalue(&normalize_like_v(&res, t, profile.columns())));
    }
    Ok(worst)
}

/// Diagonal block of one row and the curvature it gains from the others.
#[derive(Debug, Clone, PartialEq)]
pub struct RowBlock {
    pub row: usize,
    pub v_aa: Mat,
    /// `Σ_{b≠a} V_ab Γ₂ V_abᵀ`, positive semidefinite.
    pub excess: Mat,
}

fn row_ranges(y: &YoungDiagram) -> Vec<(usize, usize)> {
    (0..y.k()).map(|a| (y.box_index(a, 0), y.rows()[a])).collect()
}

pub fn split_blocks(v: &Mat, y: &YoungDiagram) -> Result<Vec<RowBlock>> {
    if v.shape() != (y.n(), y.n()) {
        return Err(LqdError::ShapeMismatch(format!("V is {:?}, diagram has {} boxes", v.shape(), y.n())));
    }
    let ranges = row_ranges(y);
    Ok(ranges
        .iter()
        .enumerate()
        .map(|(a, &(ia, la))| {
            let mut excess = Mat::zeros(la, la);
            for (bi, &(ib, _)) in ranges.iter().enumerate() {
                if bi == a {
                    continue;
                }
                let col = v.view((ia, ib), (la, 1)).into_owned();
                excess += &col * col.transpose();
            }
            RowBlock { row: a, v_aa: v.view((ia, ia), (la, la)).into_owned(), excess }
        })
        .collect())
}

/// `V_λ = (1/r) Σ_{a∈λ} V_aa` for every level.
pub fn trace_levels(v: &Mat, y: &YoungDiagram) -> Result<Vec<Mat>> {
    let blocks = split_blocks(v, y)?;
    Ok(y.levels()
        .iter()
        .map(|l| {
            let mut acc = Mat::zeros(l.length, l.length);
            for a in l.first_row..l.first_row + l.size {
                acc += &blocks[a].v_aa;
            }
            acc / l.size as f64
        })
        .collect())
}

/// `|Σ_λ r_λ tr(Γ₂(Y_λ) V_λ) − tr(Γ₂ V)|` relative to `max(1, |tr(Γ₂ V)|)`.
pub fn splitting_identity_defect(v: &Mat, y: &YoungDiagram) -> Result<f64> {
    let levels = trace_levels(v, y)?;
    let lhs: f64 = y.levels().iter().zip(&levels).map(|(l, vl)| l.size as f64 * vl[(0, 0)]).sum();
    let rhs = (y.gamma2() * v).trace();
    Ok((lhs - rhs).abs() / rhs.abs().max(1.0))
}

/// Checks `V_λ ⪯ V^{Y_λ, Q_λ}` for every level, given per-superbox bounds
/// `(1/r) Ric^{λ_i}(t) ≥ κ_{λ_i}` that are verified first.
pub fn traced_comparison(
    y: &YoungDiagram,
    profile: &CurvatureProfile,
    kappas: &[Vec<f64>],
    grid: &[f64],
    tol: f64,
) -> Result<ComparisonReport> {
    if kappas.len() != y.levels().len() {
        return Err(LqdError::ShapeMismatch("one κ vector per level required".into()));
    }
    for (li, l) in y.levels().iter().enumerate() {
        if kappas[li].len() != l.length {
            return Err(LqdError::ShapeMismatch(format!("level {li} needs {} bounds", l.length)));
        }
        for &t in grid {
            for (i, &kap) in kappas[li].iter().enumerate() {
                let ric = profile.superbox_ricci(t, li, i)? / l.size as f64;
                if ric < kap - tolerances::HYPOTHESIS * kap.abs().max(1.0) {
                    return Err(LqdError::HypothesisViolated(format!(
                        "superbox ({li},{i}) Ricci {ric} < {kap} at t = {t}"
                    )));
                }
            }
        }
    }
    let nf = y.normal_form();
    let sol = solve_riccati_limit(&nf.gamma1.transpose(), &nf.gamma2, profile, grid, RiccatiOptions::default())?;
    let mut min_eig = f64::INFINITY;
    for (li, _) in y.levels().iter().enumerate() {
        let ly = y.level_diagram(li);
        let model = CurvatureProfile::constant(&ly, linalg::diag(&kappas[li]))?;
        let lnf = ly.normal_form();
        let msol = solve_riccati_limit(&lnf.gamma1.transpose(), &lnf.gamma2, &model, grid, RiccatiOptions::default())?;
        for (w, wm) in sol.normalized.iter().zip(&msol.normalized) {
            let wl = &trace_levels(w, y)?[li];
            min_eig = min_eig.min(min_eigenvalue(&(wm - wl)));
        }
    }
    Ok(ComparisonReport {
        check: "traced-comparison".into(),
        grid: GridSpec::of(grid),
        min_eig,
        tol,
        verdict: min_eig >= -tol,
    })
}

/// Output of [`trace_integral`].
#[derive(Debug, Clone, PartialEq)]
pub struct TraceIntegral {
    pub times: Vec<f64>,
    pub beta: Vec<f64>,
    /// `t · d/dt log β`.
    pub log_derivative: Vec<f64>,
}

const GL4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// `β_t = exp(−∫_t^1 (tr(BV + A) + ρ) ds)` on `grid ⊂ (0, 1]`.
///
/// The singular part `𝒩/s` is integrated exactly; the smooth remainder by
/// four-point Gauss-Legendre on panels of width at most `1/256`.
pub fn trace_integral(a: &Mat, b: &Mat, profile: &CurvatureProfile, grid: &[f64]) -> Result<TraceIntegral> {
    check_dims(a, b, profile)?;
    if grid.is_empty() || grid.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        return Err(LqdError::InvalidInput("grid must lie in (0, 1]".into()));
    }
    let nn = linalg::geodesic_dimension_from_kalman(&linalg::kalman_ranks(a, b, tolerances::RANK)) as f64;
    let tr_a = a.trace();
    let t_lo = grid.iter().copied().fold(1.0, f64::min);

    let mut breaks: Vec<f64> = grid.to_vec();
    breaks.push(1.0);
    let panels = ((1.0 - t_lo) * 256.0).ceil() as usize;
    breaks.extend((0..=panels).map(|j| t_lo + (1.0 - t_lo) * j as f64 / panels.max(1) as f64));
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    breaks.dedup_by(|x, y| (*x - *y).abs() <= 1e-15);

    let mut nodes: Vec<f64> = breaks.clone();
    for w in breaks.windows(2) {
        let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        nodes.extend(GL4.iter().map(|&(x, _)| mid + half * x));
    }
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
    nodes.dedup();

    let sol = solve_riccati_limit(a, b, profile, &nodes, RiccatiOptions::default())?;
    let full = |j: usize| (b * &sol.v[j]).trace() + tr_a + profile.rho(sol.times[j]);
    let idx = |t: f64| sol.times.partition_point(|&s| s < t);

    // cumulative ∫_{break}^1 of the smooth remainder
    let mut tail = vec![0.0; breaks.len()];
    for p in (0..breaks.len() - 1).rev() {
        let (lo, hi) = (breaks[p], breaks[p + 1]);
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let mut acc = 0.0;
        for &(x, w) in &GL4 {
            let s = mid + half * x;
            acc += w * (full(idx(s)) - nn / s);
        }
        tail[p] = tail[p + 1] + half * acc;
    }
    let mut beta = Vec::with_capacity(grid.len());
    let mut logd = Vec::with_capacity(grid.len());
    for &t in grid {
        let p = breaks.partition_point(|&s| s < t - 1e-15);
        beta.push(if t == 1.0 { 1.0 } else { (nn * t.ln() - tail[p]).exp() });
        logd.push(t * full(idx(t)));
    }
    Ok(TraceIntegral { times: grid.to_vec(), beta, log_derivative: logd })
}
