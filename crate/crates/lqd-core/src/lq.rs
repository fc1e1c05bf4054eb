//! Linear-quadratic model problems and their distortion coefficients.
//!
//! The Hamiltonian flow is evaluated in dilated coordinates when the
//! problem comes from a Young diagram: with `c` the column of a box and
//! `s = min(t, 1)`, momenta are scaled by `s^{-c}` and positions by
//! `s^{c+1}`. In these coordinates the flat part of `H·t` has `O(1)`
//! entries and `det N(t)/t^𝒩` is evaluated without cancellation.

use serde::{Deserialize, Serialize};

use crate::error::{LqdError, Result};
use crate::linalg::{self, asymmetry, kalman_ranks, min_eigenvalue, Mat};
use crate::riccati::{self, CurvatureProfile};
use crate::tolerances;
use crate::young::YoungDiagram;

#[derive(Debug, Clone, PartialEq)]
pub struct LqProblem {
    a: Mat,
    b: Mat,
    q: Mat,
    columns: Option<Vec<usize>>,
    geodesic_dim: usize,
    rank_b: usize,
}

/// Where a distortion curve came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    HamiltonianDeterminant,
    RiccatiTrace,
    ClosedForm,
    GeometricJacobian,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::HamiltonianDeterminant => "hamiltonian-determinant",
            Method::RiccatiTrace => "riccati-trace",
            Method::ClosedForm => "closed-form",
            Method::GeometricJacobian => "geometric-jacobian",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianPropagation {
    pub times: Vec<f64>,
    pub m: Vec<Mat>,
    pub n: Vec<Mat>,
}

impl HamiltonianPropagation {
    /// `max_j ‖MᵀN − NᵀM‖_∞`.
    pub fn lagrangian_defect(&self) -> f64 {
        self.m
            .iter()
            .zip(&self.n)
            .map(|(m, n)| {
                let x = m.transpose() * n;
                asymmetry(&x)
            })
            .fold(0.0, f64::max)
    }
}

/// Flow at time `t` in dilated coordinates.
struct ScaledFlow {
    m: Mat,
    n_tilde: Mat,
    /// Dilated `(M; N)` column block.
    cols: Mat,
    s: f64,
}

impl LqProblem {
    pub fn new(a: Mat, b: Mat, q: Mat) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n || b.shape() != (n, n) || q.shape() != (n, n) {
            return Err(LqdError::ShapeMismatch(format!(
                "A {:?}, B {:?}, Q {:?} must be square of one size",
                a.shape(),
                b.shape(),
                q.shape()
            )));
        }
        let scale = b.amax().max(1.0);
        if asymmetry(&b) > tolerances::NORMAL_FORM * scale {
            return Err(LqdError::InvalidInput("B is not symmetric".into()));
        }
        if asymmetry(&q) > tolerances::NORMAL_FORM * q.amax().max(1.0) {
            return Err(LqdError::InvalidInput("Q is not symmetric".into()));
        }
        let min_eig = min_eigenvalue(&b);
        if min_eig < -tolerances::PSD_SLACK * scale {
            return Err(LqdError::NotPositiveSemidefinite { min_eig });
        }
        let ranks = kalman_ranks(&a, &b, tolerances::RANK);
        let rank = *ranks.last().unwrap();
        if rank < n {
            return Err(LqdError::NotControllable { rank, n });
        }
        let geodesic_dim = linalg::geodesic_dimension_from_kalman(&ranks);
        Ok(LqProblem { a, b, q, columns: None, geodesic_dim, rank_b: ranks[0] })
    }

    /// Normal-form problem `(Γ₁ᵀ, Γ₂, Q)` of a diagram.
    pub fn from_diagram(y: &YoungDiagram, q: Mat) -> Result<Self> {
        let nf = y.normal_form();
        let mut p = Self::new(nf.gamma1.transpose(), nf.gamma2, q)?;
        p.columns = Some(y.box_columns());
        Ok(p)
    }

    /// Normal-form problem with `Q` constant on superboxes.
    pub fn from_superbox(y: &YoungDiagram, values: &[Vec<f64>]) -> Result<Self> {
        Self::from_diagram(y, y.superbox_diagonal(values)?)
    }

    /// Row of length `kappas.len()` with `Q = diag(kappas)`.
    pub fn single_row(kappas: &[f64]) -> Result<Self> {
        let y = YoungDiagram::from_rows(&[kappas.len()])?;
        Self::from_diagram(&y, linalg::diag(kappas))
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }
    pub fn b(&self) -> &Mat {
        &self.b
    }
    pub fn q(&self) -> &Mat {
        &self.q
    }
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
    /// Column index of every coordinate, when the problem has a diagram.
    pub fn columns(&self) -> Option<&[usize]> {
        self.columns.as_deref()
    }
    /// Order of vanishing of `det N(t)` at `t = 0`.
    pub fn geodesic_dimension(&self) -> usize {
        self.geodesic_dim
    }

    /// `(A, εB, Q)`.
    pub fn with_scaled_b(&self, eps: f64) -> Result<Self> {
        let mut p = Self::new(self.a.clone(), &self.b * eps, self.q.clone())?;
        p.columns = self.columns.clone();
        Ok(p)
    }

    /// `(A, B, εQ)`.
    pub fn with_scaled_q(&self, eps: f64) -> Result<Self> {
        let mut p = self.clone();
        p.q *= eps;
        Ok(p)
    }

    /// `[[−Aᵀ, −Q], [B, A]]`.
    pub fn hamiltonian(&self) -> Mat {
        let n = self.dim();
        let mut h = Mat::zeros(2 * n, 2 * n);
        h.view_mut((0, 0), (n, n)).copy_from(&(-self.a.transpose()));
        h.view_mut((0, n), (n, n)).copy_from(&(-&self.q));
        h.view_mut((n, 0), (n, n)).copy_from(&self.b);
        h.view_mut((n, n), (n, n)).copy_from(&self.a);
        h
    }

    /// Constant profile `R ≡ Q`, `ρ ≡ 0`.
    pub fn constant_profile(&self) -> CurvatureProfile {
        CurvatureProfile::constant_with_columns(self.q.clone(), self.rank_b, self.columns.clone())
    }

    fn exponents(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        self.columns.as_ref().map(|cols| {
            let ep = cols.iter().map(|&c| -(c as f64)).collect();
            let ex = cols.iter().map(|&c| c as f64 + 1.0).collect();
            (ep, ex)
        })
    }

    fn scaled_flow(&self, t: f64) -> ScaledFlow {
        let n = self.dim();
        let h = self.hamiltonian();
        let Some((ep, ex)) = self.exponents() else {
            let e = linalg::matrix_exp(&(h * t));
            return ScaledFlow {
                m: e.view((0, 0), (n, n)).into_owned(),
                n_tilde: e.view((n, 0), (n, n)).into_owned(),
                cols: e.columns(0, n).into_owned(),
                s: 1.0,
            };
        };
        let s = t.min(1.0);
        let e_all: Vec<f64> = ep.iter().chain(ex.iter()).copied().collect();
        let g = Mat::from_fn(2 * n, 2 * n, |u, v| {
            if h[(u, v)] == 0.0 {
                0.0
            } else {
                h[(u, v)] * t * s.powf(e_all[v] - e_all[u])
            }
        });
        let e = linalg::matrix_exp(&g);
        let m = Mat::from_fn(n, n, |i, j| e[(i, j)] * s.powf(ep[i] - ep[j]));
        ScaledFlow {
            m,
            n_tilde: e.view((n, 0), (n, n)).into_owned(),
            cols: e.columns(0, n).into_owned(),
            s,
        }
    }

    /// `(M(t), N(t))` from the matrix exponential.
    pub fn mn(&self, t: f64) -> (Mat, Mat) {
        let f = self.scaled_flow(t);
        let n_mat = match self.exponents() {
            None => f.n_tilde,
            Some((ep, ex)) => Mat::from_fn(self.dim(), self.dim(), |i, j| {
                f.n_tilde[(i, j)] * f.s.powf(ex[i] - ep[j])
            }),
        };
        (f.m, n_mat)
    }

    /// `det N(t) / t^𝒩`.
    pub fn normalized_det(&self, t: f64) -> f64 {
        let f = self.scaled_flow(t);
        f.n_tilde.determinant() * (f.s / t).powi(self.geodesic_dim as i32)
    }

    fn normalized_sigma(&self, t: f64) -> f64 {
        let f = self.scaled_flow(t);
        f.n_tilde.singular_values().min() / f.cols.singular_values().max()
    }

    /// `det N(t)/det N(1)` without a conjugate-time check.
    pub fn beta_at(&self, t: f64) -> Result<f64> {
        let d1 = self.scaled_flow(1.0).n_tilde.determinant();
        if d1.abs() < tolerances::POLE {
            return Err(LqdError::ConjugatePoint { t: 1.0 });
        }
        let f = self.scaled_flow(t);
        Ok(f.n_tilde.determinant() * f.s.powi(self.geodesic_dim as i32) / d1)
    }

    /// Step the flow with `exp(H·T/steps)`.
    pub fn propagate(&self, t_end: f64, steps: usize) -> Result<HamiltonianPropagation> {
        if !(t_end > 0.0) || steps == 0 {
            return Err(LqdError::InvalidInput("need T > 0 and steps ≥ 1".into()));
        }
        let n = self.dim();
        let dt = t_end / steps as f64;
        let phi = linalg::matrix_exp(&(self.hamiltonian() * dt));
        let mut y = Mat::zeros(2 * n, n);
        y.view_mut((0, 0), (n, n)).fill_with_identity();
        let mut out = HamiltonianPropagation {
            times: Vec::with_capacity(steps + 1),
            m: Vec::with_capacity(steps + 1),
            n: Vec::with_capacity(steps + 1),
        };
        for j in 0..=steps {
            if j > 0 {
                y = &phi * &y;
            }
            out.times.push(dt * j as f64);
            out.m.push(y.view((0, 0), (n, n)).into_owned());
            out.n.push(y.view((n, 0), (n, n)).into_owned());
        }
        Ok(out)
    }

    fn ensure_conjugate_free(&self) -> Result<()> {
        if let Some(t) = self.first_conjugate_time(1.0)? {
            return Err(LqdError::ConjugatePoint { t });
        }
        Ok(())
    }

    pub fn beta_from_determinant(&self, grid: &[f64]) -> Result<DistortionCurve> {
        self.ensure_conjugate_free()?;
        check_unit_grid(grid)?;
        let values = grid.iter().map(|&t| self.beta_at(t)).collect::<Result<Vec<_>>>()?;
        Ok(DistortionCurve { times: grid.to_vec(), values, method: Method::HamiltonianDeterminant })
    }

    pub fn beta_from_riccati_trace(&self, grid: &[f64]) -> Result<DistortionCurve> {
        self.ensure_conjugate_free()?;
        check_unit_grid(grid)?;
        let tr = riccati::trace_integral(&self.a, &self.b, &self.constant_profile(), grid)?;
        Ok(DistortionCurve { times: grid.to_vec(), values: tr.beta, method: Method::RiccatiTrace })
    }

    /// Smallest `t* ∈ (0, t_max]` with `det N(t*) = 0`.
    ///
    /// Scans `det N(t)/t^𝒩` from `t = 1e-3` for sign changes, refined by
    /// bisection. Local minima of `|det N|` without a sign change are refined
    /// on the smallest singular value of the dilated `N`; an exact touch is
    /// reported as a root, an unresolved near-touch as
    /// [`LqdError::AmbiguousRoot`].
    pub fn first_conjugate_time(&self, t_max: f64) -> Result<Option<f64>> {
        if !(t_max > 0.0) {
            return Err(LqdError::InvalidInput("t_max must be positive".into()));
        }
        let t0 = tolerances::CONJUGATE_SCAN_START.min(t_max / 2.0);
        let points = ((t_max - t0) * 1024.0).ceil().max(256.0) as usize + 1;
        let ts = crate::grid::uniform(t0, t_max, points);
        let fs: Vec<f64> = ts.iter().map(|&t| self.normalized_det(t)).collect();
        let mut scale = fs[0].abs();
        for j in 1..ts.len() {
            scale = scale.max(fs[j].abs());
            if fs[j] == 0.0 {
                return Ok(Some(ts[j]));
            }
            if fs[j - 1].signum() != fs[j].signum() {
                return Ok(Some(self.bisect(ts[j - 1], ts[j], fs[j - 1])));
            }
            let is_min = j + 1 < ts.len() && fs[j].abs() < fs[j - 1].abs() && fs[j].abs() <= fs[j + 1].abs();
            if is_min && fs[j].abs() < tolerances::TOUCH_GUARD * scale {
                let (tm, sig) = golden_min(|t| self.normalized_sigma(t), ts[j - 1], ts[j + 1]);
                if sig <= tolerances::TOUCH_ROOT {
                    return Ok(Some(tm));
                }
                if self.normalized_det(tm).abs() < 1e-10 * scale {
                    return Err(LqdError::AmbiguousRoot { t: tm });
                }
            }
        }
        Ok(None)
    }

    fn bisect(&self, mut a: f64, mut b: f64, fa: f64) -> f64 {
        let sa = fa.signum();
        while b - a > tolerances::CONJUGATE_BISECTION * b.max(1.0) {
            let m = 0.5 * (a + b);
            let fm = self.normalized_det(m);
            if fm == 0.0 {
                return m;
            }
            if fm.signum() == sa {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    /// `max_t |β^{A,εB,Q}_t − β^{A,B,εQ}_t|`.
    pub fn homogeneity_check(&self, eps: f64, grid: &[f64]) -> Result<f64> {
        if !(eps > 0.0) {
            return Err(LqdError::InvalidInput("ε must be positive".into()));
        }
        let lhs = self.with_scaled_b(eps)?.beta_from_determinant(grid)?;
        let rhs = self.with_scaled_q(eps)?.beta_from_determinant(grid)?;
        Ok(lhs.values.iter().zip(&rhs.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

fn check_unit_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        return Err(LqdError::InvalidInput("grid must lie in (0, 1]".into()));
    }
    Ok(())
}

/// Golden-section minimization on `[a, b]`; returns `(argmin, min)`.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-14 * b.abs().max(1.0) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    (m, f(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, from_rows};
    use std::f64::consts::PI;

    fn scalar(q: f64) -> LqProblem {
        LqProblem::new(Mat::zeros(1, 1), Mat::identity(1, 1), diag(&[q])).unwrap()
    }

    fn row2(k1: f64, k2: f64) -> LqProblem {
        LqProblem::single_row(&[k1, k2]).unwrap()
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            LqProblem::new(Mat::zeros(2, 2), diag(&[1.0, 0.0]), Mat::zeros(2, 2)),
            Err(LqdError::NotControllable { rank: 1, n: 2 })
        ));
        assert!(matches!(
            LqProblem::new(Mat::zeros(1, 1), diag(&[-1.0]), Mat::zeros(1, 1)),
            Err(LqdError::NotPositiveSemidefinite { .. })
        ));
        assert!(LqProblem::new(Mat::zeros(2, 2), Mat::identity(2, 2), Mat::zeros(1, 1)).is_err());
    }

    #[test]
    fn propagate_free_and_oscillator() {
        let p = scalar(0.0).propagate(1.0, 64).unwrap();
        for (t, (m, n)) in p.times.iter().zip(p.m.iter().zip(&p.n)) {
            assert!((m[(0, 0)] - 1.0).abs() < 1e-14);
            assert!((n[(0, 0)] - t).abs() < 1e-14);
        }
        let p = scalar(1.0).propagate(1.0, 2048).unwrap();
        for (t, (m, n)) in p.times.iter().zip(p.m.iter().zip(&p.n)) {
            assert!((m[(0, 0)] - t.cos()).abs() < 1e-12);
            assert!((n[(0, 0)] - t.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_row_of_two() {
        // Oracle: M = [[1, −t], [0, 1]], N = [[t, −t²/2], [t²/2, −t³/6]].
        let p = row2(0.0, 0.0);
        for &t in &[0.01, 0.3, 1.0, 2.5] {
            let (m, n) = p.mn(t);
            let m_ref = from_rows(&[vec![1.0, -t], vec![0.0, 1.0]]);
            let n_ref = from_rows(&[vec![t, -t * t / 2.0], vec![t * t / 2.0, -t * t * t / 6.0]]);
            assert!((m - m_ref).amax() < 1e-13);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((n[(i, j)] - n_ref[(i, j)]).abs() <= 1e-13 * n_ref[(i, j)].abs());
                }
            }
            assert!((n.determinant() - t.powi(4) / 12.0).abs() < 1e-14 * t.powi(4));
        }
        let prop = p.propagate(1.0, 2048).unwrap();
        assert!(prop.lagrangian_defect() < 1e-10);
    }

    #[test]
    fn determinant_examples() {
        let y = YoungDiagram::from_rows(&[1, 1, 1]).unwrap();
        let p = LqProblem::from_diagram(&y, Mat::zeros(3, 3)).unwrap();
        let c = p.beta_from_determinant(&[0.5]).unwrap();
        assert!((c.values[0] - 0.125).abs() < 1e-15);

        let c = scalar(1.0).beta_from_determinant(&[0.5, 1.0]).unwrap();
        assert!((c.values[0] - 0.5f64.sin() / 1f64.sin()).abs() < 1e-14);
        assert_eq!(c.values[1], 1.0);

        let c = row2(0.0, 0.0).beta_from_determinant(&[0.5]).unwrap();
        assert!((c.values[0] - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn flat_diagrams_give_power_of_geodesic_dimension() {
        for rows in [vec![1, 1, 1], vec![2], vec![2, 1], vec![2, 2, 1], vec![3, 1]] {
            let y = YoungDiagram::from_rows(&rows).unwrap();
            let p = LqProblem::from_diagram(&y, Mat::zeros(y.n(), y.n())).unwrap();
            assert_eq!(p.geodesic_dimension(), y.geodesic_dimension());
            for &t in &[0.01, 0.2, 0.7] {
                let b = p.beta_at(t).unwrap();
                let e = t.powi(y.geodesic_dimension() as i32);
                assert!((b - e).abs() < 1e-12 * e, "{rows:?} t={t}");
            }
        }
    }

    #[test]
    fn riccati_trace_examples() {
        let grid = [0.01, 0.25, 0.5, 1.0];
        let c = scalar(0.0).beta_from_riccati_trace(&grid).unwrap();
        for (t, b) in grid.iter().zip(&c.values) {
            assert!((b - t).abs() < 1e-12);
        }
        let c = scalar(1.0).beta_from_riccati_trace(&[0.5]).unwrap();
        assert!((c.values[0] - 0.5f64.sin() / 1f64.sin()).abs() < 1e-10);

        let y = YoungDiagram::from_rows(&[1, 1]).unwrap();
        let p = LqProblem::from_diagram(&y, diag(&[1.0, 0.0])).unwrap();
        let c = p.beta_from_riccati_trace(&[0.3, 0.5]).unwrap();
        for (t, b) in [0.3f64, 0.5].iter().zip(&c.values) {
            let e = t * t.sin() / 1f64.sin();
            assert!((b - e).abs() < 1e-10 * e);
        }
    }

    #[test]
    fn conjugate_times() {
        for &k in &[0.25, 1.0, 4.0, 9.0] {
            let tc = scalar(k).first_conjugate_time(20.0).unwrap().unwrap();
            assert!((tc - PI / k.sqrt()).abs() < 1e-10);
        }
        assert_eq!(scalar(-1.0).first_conjugate_time(50.0).unwrap(), None);
        let tc = row2(4.0, 0.0).first_conjugate_time(5.0).unwrap().unwrap();
        assert!((tc - PI).abs() < 1e-10);
    }

    #[test]
    fn touching_root_is_found() {
        let y = YoungDiagram::from_rows(&[1, 1]).unwrap();
        let p = LqProblem::from_diagram(&y, diag(&[1.0, 1.0])).unwrap();
        let tc = p.first_conjugate_time(5.0).unwrap().unwrap();
        assert!((tc - PI).abs() < 1e-8, "{tc}");
    }

    #[test]
    fn beta_refuses_conjugate_interval() {
        assert!(matches!(
            scalar(16.0).beta_from_determinant(&[0.5]),
            Err(LqdError::ConjugatePoint { .. })
        ));
    }

    #[test]
    fn homogeneity_examples() {
        assert_eq!(scalar(1.0).homogeneity_check(1.0, &[0.2, 0.6]).unwrap(), 0.0);
        let grid = crate::grid::uniform(0.01, 1.0, 50);
        assert!(scalar(1.0).homogeneity_check(2.0, &grid).unwrap() < 1e-8);
        for (t, b) in grid.iter().zip(scalar(2.0).beta_from_determinant(&grid).unwrap().values) {
            let e = (2f64.sqrt() * t).sin() / 2f64.sqrt().sin();
            assert!((b - e).abs() < 1e-12);
        }
        assert!(row2(1.0, 1.0).homogeneity_check(0.5, &grid).unwrap() < 1e-8);
    }
}
