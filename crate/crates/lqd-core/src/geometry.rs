//! Concrete geometries: the Heisenberg group with radial weights, and the
//! Sasakian and 3-Sasakian curvature formulas.
//!
//! Heisenberg coordinates use the frame `X₁ = ∂₁ − (x₂/2)∂₃`,
//! `X₂ = ∂₂ + (x₁/2)∂₃`. A covector is `(p₁, p₂, h₀)` with `h_i = ⟨λ, X_i⟩`
//! and `h₀ = ⟨λ, ∂₃⟩`; the horizontal velocity `z = ẋ₁ + iẋ₂` obeys
//! `ż = i h₀ z`. With this orientation the first-column curvature along
//! the geodesic is `h₀²` and `ρ̇` is obtained by differentiating `ψ ∘ γ`
//! directly, so no choice of `J` enters.

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{LqdError, Result};
use crate::linalg::{diag, Mat};
use crate::lq::{DistortionCurve, Method};
use crate::riccati::CurvatureProfile;
use crate::tolerances;
use crate::young::YoungDiagram;

/// Initial covector of a Heisenberg geodesic and its base point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergCovector {
    pub p: [f64; 2],
    pub h0: f64,
    #[serde(default)]
    pub base: [f64; 3],
}

impl HeisenbergCovector {
    pub fn new(p1: f64, p2: f64, h0: f64) -> Self {
        HeisenbergCovector { p: [p1, p2], h0, base: [0.0; 3] }
    }

    pub fn at(mut self, base: [f64; 3]) -> Self {
        self.base = base;
        self
    }

    /// `‖γ̇‖`, which is also the length of `γ` on `[0, 1]`.
    pub fn speed(&self) -> f64 {
        self.p[0].hypot(self.p[1])
    }
}

/// Radial weight `ψ = Σ_k c_k u^k` with `u = (x₁² + x₂²)/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum HeisenbergWeight {
    #[default]
    None,
    Quadratic,
    CustomPoly { coeffs: Vec<f64> },
}

impl HeisenbergWeight {
    fn coeffs(&self) -> Vec<f64> {
        match self {
            HeisenbergWeight::None => vec![],
            HeisenbergWeight::Quadratic => vec![0.0, 1.0],
            HeisenbergWeight::CustomPoly { coeffs } => coeffs.clone(),
        }
    }

    /// `(P(u), P'(u), P''(u))`.
    fn poly(&self, u: f64) -> (f64, f64, f64) {
        let c = self.coeffs();
        let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
        for (k, &ck) in c.iter().enumerate().rev() {
            let kf = k as f64;
            p = p * u + ck;
            if k >= 1 {
                dp = dp * u + kf * ck;
            }
            if k >= 2 {
                ddp = ddp * u + kf * (kf - 1.0) * ck;
            }
        }
        (p, dp, ddp)
    }

    pub fn psi(&self, x: [f64; 3]) -> f64 {
        self.poly(0.5 * (x[0] * x[0] + x[1] * x[1])).0
    }

    /// `‖∇_H ψ‖` at horizontal radius `r`.
    fn grad_norm(&self, r: f64) -> f64 {
        (self.poly(0.5 * r * r).1 * r).abs()
    }

    /// Smallest eigenvalue of the symmetrized horizontal Hessian at radius
    /// `r`, which is `P' I + P'' x xᵀ`.
    fn hessian_min(&self, r: f64) -> f64 {
        let (_, dp, ddp) = self.poly(0.5 * r * r);
        dp.min(dp + ddp * r * r)
    }

    /// `L_R` and `C_R` over the metric ball `B_R(0)`.
    ///
    /// Both depend on `(x₁, x₂)` only through `r ≤ R`, and every `r ≤ R` is
    /// reached inside the ball, so sampling `r` on `[0, R]` suffices.
    pub fn ball_constants(&self, radius: f64, samples: usize) -> BallConstants {
        let samples = samples.max(2);
        let (mut l, mut c) = (0.0f64, f64::INFINITY);
        for j in 0..samples {
            let r = radius * j as f64 / (samples - 1) as f64;
            l = l.max(self.grad_norm(r));
            c = c.min(self.hessian_min(r));
        }
        BallConstants { radius, l_r: l, c_r: c, samples }
    }
}

/// Sampled estimates of `sup ‖∇_H ψ‖` and `inf (D²_H ψ)*` on a ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallConstants {
    pub radius: f64,
    pub l_r: f64,
    pub c_r: f64,
    pub samples: usize,
}

const SERIES_PHI: f64 = 0.5;

/// `(sin φ/φ, (1 − cos φ)/φ, (φ − sin φ)/φ²)`.
fn spiral_kernels(phi: f64) -> (f64, f64, f64) {
    if phi.abs() < SERIES_PHI {
        let p2 = phi * phi;
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        // odd factorials 1!, 3!, ... and even factorials 2!, 4!, ...
        let mut term_a = 1.0; // φ^{2k}/(2k+1)!
        let mut term_b = phi / 2.0; // φ^{2k+1}/(2k+2)!
        let mut term_c = phi / 6.0; // φ^{2k+1}/(2k+3)!
        for k in 0..12 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            a += sign * term_a;
            b += sign * term_b;
            c += sign * term_c;
            let kf = k as f64;
            term_a *= p2 / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
            term_b *= p2 / ((2.0 * kf + 3.0) * (2.0 * kf + 4.0));
            term_c *= p2 / ((2.0 * kf + 4.0) * (2.0 * kf + 5.0));
        }
        (a, b, c)
    } else {
        (phi.sin() / phi, (1.0 - phi.cos()) / phi, (phi - phi.sin()) / (phi * phi))
    }
}

/// Group law `a · b`.
pub fn heisenberg_mul(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2] + 0.5 * (a[0] * b[1] - a[1] * b[0])]
}

fn exp_from_origin(p: [f64; 2], h0: f64, t: f64) -> [f64; 3] {
    let (s, c1, s3) = spiral_kernels(h0 * t);
    let w = C::new(p[0], p[1]) * C::new(s, c1) * t;
    [w.re, w.im, 0.5 * (p[0] * p[0] + p[1] * p[1]) * t * t * s3]
}

/// `γ(t)` for the geodesic with initial covector `λ`.
pub fn heisenberg_exp(lambda: &HeisenbergCovector, t: f64) -> [f64; 3] {
    heisenberg_mul(lambda.base, exp_from_origin(lambda.p, lambda.h0, t))
}

/// Horizontal position, velocity and acceleration at time `t`.
fn horizontal_jet(lambda: &HeisenbergCovector, t: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
    let x = heisenberg_exp(lambda, t);
    let z = C::new(lambda.p[0], lambda.p[1]) * C::from_polar(1.0, lambda.h0 * t);
    let a = C::i() * lambda.h0 * z;
    ([x[0], x[1]], [z.re, z.im], [a.re, a.im])
}

/// `μ(h) = (h − sin h)/(8 sin²(h/2))`, increasing from `−∞` to `∞` on `(−2π, 2π)`.
fn spiral_ratio(h: f64) -> f64 {
    if h.abs() < 1e-4 {
        return h / 12.0;
    }
    (h - h.sin()) / (8.0 * (0.5 * h).sin().powi(2))
}

/// Sub-Riemannian distance from the origin.
pub fn heisenberg_distance_from_origin(x: [f64; 3]) -> f64 {
    let r = x[0].hypot(x[1]);
    if r == 0.0 {
        return (4.0 * PI * x[2].abs()).sqrt();
    }
    let target = x[2] / (r * r);
    let (mut lo, mut hi) = (-2.0 * PI, 2.0 * PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spiral_ratio(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let h = 0.5 * (lo + hi);
    if h.abs() < 1e-12 {
        r
    } else {
        r * h.abs() / (2.0 * (0.5 * h).sin().abs())
    }
}

/// Curvature profile along the geodesic on `[0, 1]`: diagram `[2, 1]`,
/// `R = diag(h₀², 0, 0)`, and `ρ = −d/dt ψ(γ(t))` for the weight.
pub fn heisenberg_profile(lambda: &HeisenbergCovector, weight: &HeisenbergWeight) -> Result<CurvatureProfile> {
    if lambda.speed() == 0.0 {
        return Err(LqdError::InvalidInput("Heisenberg geodesic has zero speed".into()));
    }
    let y = YoungDiagram::from_rows(&[2, 1])?;
    let r = diag(&[lambda.h0 * lambda.h0, 0.0, 0.0]);
    let profile = CurvatureProfile::constant(&y, r)?;
    if matches!(weight, HeisenbergWeight::None) {
        return Ok(profile);
    }
    let (l1, w1) = (*lambda, weight.clone());
    let (l2, w2) = (*lambda, weight.clone());
    Ok(profile.with_weight(
        move |t| {
            let (x, v, _) = horizontal_jet(&l1, t);
            let (_, dp, _) = w1.poly(0.5 * (x[0] * x[0] + x[1] * x[1]));
            -dp * (x[0] * v[0] + x[1] * v[1])
        },
        move |t| {
            let (x, v, a) = horizontal_jet(&l2, t);
            let (_, dp, ddp) = w2.poly(0.5 * (x[0] * x[0] + x[1] * x[1]));
            let ud = x[0] * v[0] + x[1] * v[1];
            let udd = v[0] * v[0] + v[1] * v[1] + x[0] * a[0] + x[1] * a[1];
            -(ddp * ud * ud + dp * udd)
        },
    ))
}

fn jacobian_column(p: [f64; 2], h0: f64, t: f64, dir: usize, h: f64) -> [f64; 3] {
    let shifted = |s: f64| {
        let mut q = [p[0], p[1], h0];
        q[dir] += s;
        exp_from_origin([q[0], q[1]], q[2], t)
    };
    let central = |h: f64| {
        let (a, b) = (shifted(h), shifted(-h));
        [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h), (a[2] - b[2]) / (2.0 * h)]
    };
    let (d1, d2) = (central(h), central(0.5 * h));
    [0, 1, 2].map(|i| (4.0 * d2[i] - d1[i]) / 3.0)
}

/// Determinant of `∂ exp(λ', t)/∂λ'` at `λ` by Richardson-extrapolated
/// central differences. Left translations preserve Lebesgue measure, so the
/// base point does not enter.
pub fn heisenberg_jacobian(lambda: &HeisenbergCovector, t: f64) -> f64 {
    let scale = lambda.speed().max(lambda.h0.abs()).max(1.0);
    let h = tolerances::JACOBIAN_STEP * scale;
    let cols = [0, 1, 2].map(|d| jacobian_column(lambda.p, lambda.h0, t, d, h));
    Mat::from_fn(3, 3, |i, j| cols[j][i]).determinant()
}

/// `β_t = J_t/J_1`, times `e^{ψ(γ(1)) − ψ(γ(t))}` for a weight.
pub fn heisenberg_distortion_direct(
    lambda: &HeisenbergCovector,
    grid: &[f64],
    weight: &HeisenbergWeight,
) -> Result<DistortionCurve> {
    if lambda.h0.abs() >= 2.0 * PI {
        return Err(LqdError::ConjugatePoint { t: 2.0 * PI / lambda.h0.abs() });
    }
    if lambda.speed() == 0.0 {
        return Err(LqdError::InvalidInput("Heisenberg geodesic has zero speed".into()));
    }
    let j1 = heisenberg_jacobian(lambda, 1.0);
    let psi1 = weight.psi(heisenberg_exp(lambda, 1.0));
    let values = grid
        .iter()
        .map(|&t| {
            let w = (psi1 - weight.psi(heisenberg_exp(lambda, t))).exp();
            heisenberg_jacobian(lambda, t) / j1 * w
        })
        .collect();
    Ok(DistortionCurve { times: grid.to_vec(), values, method: Method::GeometricJacobian })
}

/// First zero of `t ↦ J_t(λ)` in `(0, t_max]`, from a sign change of
/// `J_t/t⁵` refined by bisection.
pub fn heisenberg_conjugate_time_direct(lambda: &HeisenbergCovector, t_max: f64) -> Option<f64> {
    let f = |t: f64| heisenberg_jacobian(lambda, t) / t.powi(5);
    let steps = ((t_max * 1024.0).ceil() as usize).max(256);
    let t0 = tolerances::CONJUGATE_SCAN_START;
    let mut prev = (t0, f(t0));
    for j in 1..=steps {
        let t = t0 + (t_max - t0) * j as f64 / steps as f64;
        let v = f(t);
        if v == 0.0 {
            return Some(t);
        }
        if v.signum() != prev.1.signum() {
            let (mut lo, mut hi, flo) = (prev.0, t, prev.1);
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if f(mid).signum() == flo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        prev = (t, v);
    }
    None
}

/// Exponent `N₀ = 5 + (3/2) L²/(C − |h₀| L/d)` when `|h₀| < C d/L`.
///
/// With `L = 0` the formula degenerates to 5; the strict bound `N₀ > 5` is
/// kept by returning `5 + 1e−12`.
pub fn heisenberg_n0(c_r: f64, l_r: f64, h0: f64, dist: f64) -> Result<Option<f64>> {
    if !(c_r > 0.0) {
        return Err(LqdError::InvalidInput(format!("C_R = {c_r} must be positive")));
    }
    if !(dist > 0.0) || l_r < 0.0 {
        return Err(LqdError::InvalidInput("distance must be positive and L_R non-negative".into()));
    }
    if l_r == 0.0 {
        return Ok(Some(5.0 + 1e-12));
    }
    if h0.abs() >= c_r * dist / l_r {
        return Ok(None);
    }
    Ok(Some(5.0 + 1.5 * l_r * l_r / (c_r - h0.abs() * l_r / dist)))
}

/// `t⁵ e^{d L (t − 1)}`.
pub fn heisenberg_rho_shift_bound(dist: f64, l_r: f64, t: f64) -> f64 {
    t.powi(5) * (dist * l_r * (t - 1.0)).exp()
}

/// Inputs of the Sasakian curvature formulas along a geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SasakianData {
    pub d: usize,
    pub h0: f64,
    pub speed: f64,
    /// `R(γ̇, Jγ̇, Jγ̇, γ̇)`.
    pub sectional: f64,
    /// `Ric(γ̇)`.
    pub ricci: f64,
    /// `g(∇ψ, γ̇)`.
    #[serde(default)]
    pub grad_dot: f64,
    /// `g(∇ψ, Jγ̇)`.
    #[serde(default)]
    pub grad_j: f64,
    /// `∇²ψ(γ̇, γ̇)`.
    #[serde(default)]
    pub hess: f64,
}

/// Superbox Ricci curvatures `(a, b, c)`; `c` is absent when its superbox is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperboxRicci {
    pub a: f64,
    pub b: f64,
    pub c: Option<f64>,
}

fn check_sasakian(data: &SasakianData) -> Result<()> {
    if data.d < 1 {
        return Err(LqdError::InvalidInput("Sasakian dimension needs d ≥ 1".into()));
    }
    if !(data.speed > 0.0) {
        return Err(LqdError::InvalidInput("speed must be positive".into()));
    }
    Ok(())
}

pub fn sasakian_ricci(data: &SasakianData) -> Result<SuperboxRicci> {
    check_sasakian(data)?;
    let s2 = data.speed * data.speed;
    let h2 = data.h0 * data.h0;
    let d = data.d as f64;
    let b = data.sectional / s2 + h2;
    let c = (data.d > 1).then(|| (data.ricci - data.sectional) / s2 + 0.25 * h2 * (2.0 * d - 2.0));
    Ok(SuperboxRicci { a: 0.0, b, c })
}

/// Bakry-Émery Ricci curvatures with parameter `N > 2d + 1`.
pub fn sasakian_be_ricci(data: &SasakianData, n_param: f64) -> Result<SuperboxRicci> {
    let plain = sasakian_ricci(data)?;
    let d = data.d as f64;
    let dim = 2.0 * d + 1.0;
    if !(n_param > dim) {
        return Err(LqdError::InvalidInput(format!("N = {n_param} must exceed {dim}")));
    }
    let drift = data.hess + data.h0 * data.grad_j;
    let sq = data.grad_dot * data.grad_dot / (4.0 * d * d);
    let b = plain.b + drift / (2.0 * d) - dim / (n_param - dim) * sq;
    let c = plain
        .c
        .map(|c| c + (2.0 * d - 2.0) / (2.0 * d) * drift - dim * (2.0 * d - 2.0) / (n_param - dim) * sq);
    Ok(SuperboxRicci { a: 0.0, b, c })
}

/// Right-hand side of the Sasakian Bakry-Émery bound on `β_t^{1/(N−1)}`:
/// `t^{1/(N−1)} (sin tα/sin α)^{(2d−2)/2d} (β^{κ₂=0}_t(κ_b))^{1/2d}`.
pub fn sasakian_be_rhs(d: usize, n_param: f64, kappa_b: f64, kappa_c: f64, t: f64) -> Result<f64> {
    let d = d as f64;
    let two = crate::closed_forms::beta_two_column_k2zero(kappa_b, t)?;
    let mut out = t.powf(1.0 / (n_param - 1.0)) * two.powf(1.0 / (2.0 * d));
    if d > 1.0 {
        out *= crate::closed_forms::sin_ratio(kappa_c, t)?.powf((2.0 * d - 2.0) / (2.0 * d));
    }
    Ok(out)
}

/// Inputs of the 3-Sasakian formulas for a unit-speed geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeSasakianData {
    pub d: usize,
    pub v: [f64; 3],
    /// `ϱ(v) = Σ_α R(γ̇, Z_α, Z_α, γ̇)`.
    pub varrho: f64,
}

impl ThreeSasakianData {
    pub fn v_norm_sq(&self) -> f64 {
        self.v.iter().map(|x| x * x).sum()
    }
}

pub fn three_sasakian_ricci(data: &ThreeSasakianData) -> SuperboxRicci {
    let s = data.v_norm_sq();
    let d = data.d as f64;
    SuperboxRicci {
        a: 3.0 * (0.75 * data.varrho - 3.5 * s - 15.0 / 8.0 * s * s),
        b: 3.0 * (4.0 + 5.0 * s),
        c: Some((4.0 * d - 4.0) * (1.0 + s)),
    }
}

/// Per-box bounds `(κ_a, κ_b, κ_c)` implied by `Sec ≥ K`, i.e. `ϱ ≥ 2K‖v‖²`.
pub fn three_sasakian_bounds(v_norm_sq: f64, k: f64) -> (f64, f64, f64) {
    let s = v_norm_sq;
    (s * (1.5 * k - 3.5 - 15.0 / 8.0 * s), 4.0 + 5.0 * s, 0.0)
}

/// Threshold `−(13 + 2√70)/3` on the sectional bound.
pub fn three_sasakian_threshold() -> f64 {
    -(13.0 + 2.0 * 70f64.sqrt()) / 3.0
}

/// Whether `35/2 s² + (26 + 6K) s + 16 ≥ 0` for every `s ≥ 0`.
pub fn three_sasakian_mcp_condition(k: f64) -> bool {
    k >= three_sasakian_threshold()
}

/// Constant profile on the two-column diagram of dimension `4d + 3`, rank `4d`.
pub fn three_sasakian_profile(data: &ThreeSasakianData) -> Result<CurvatureProfile> {
    if data.d < 1 {
        return Err(LqdError::InvalidInput("3-Sasakian dimension needs d ≥ 1".into()));
    }
    let y = YoungDiagram::two_column(4 * data.d + 3, 4 * data.d)?;
    let ric = three_sasakian_ricci(data);
    let c_size = (4 * data.d - 3) as f64;
    let r = y.superbox_diagonal(&[vec![ric.b / 3.0, ric.a / 3.0], vec![ric.c.unwrap_or(0.0) / c_size]])?;
    CurvatureProfile::constant(&y, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::beta_two_column_k2zero;

    fn rk4_exp(lambda: &HeisenbergCovector, t: f64, steps: usize) -> [f64; 3] {
        // state (x1, x2, x3, h1, h2)
        let h0 = lambda.h0;
        let f = |s: [f64; 5]| {
            [s[3], s[4], 0.5 * (s[0] * s[4] - s[1] * s[3]), -h0 * s[4], h0 * s[3]]
        };
        let mut s = [lambda.base[0], lambda.base[1], lambda.base[2], lambda.p[0], lambda.p[1]];
        let dt = t / steps as f64;
        for _ in 0..steps {
            let k1 = f(s);
            let k2 = f(std::array::from_fn(|i| s[i] + 0.5 * dt * k1[i]));
            let k3 = f(std::array::from_fn(|i| s[i] + 0.5 * dt * k2[i]));
            let k4 = f(std::array::from_fn(|i| s[i] + dt * k3[i]));
            s = std::array::from_fn(|i| s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        }
        [s[0], s[1], s[2]]
    }

    #[test]
    fn exp_examples() {
        assert_eq!(heisenberg_exp(&HeisenbergCovector::new(1.0, 0.0, 0.0), 0.7), [0.7, 0.0, 0.0]);
        for lam in [
            HeisenbergCovector::new(1.0, 0.0, 2.0),
            HeisenbergCovector::new(0.3, -0.8, -1.3).at([0.2, -0.1, 0.4]),
            HeisenbergCovector::new(0.6, 0.6, 0.2),
        ] {
            let a = heisenberg_exp(&lam, 0.9);
            let b = rk4_exp(&lam, 0.9, 4000);
            for i in 0..3 {
                assert!((a[i] - b[i]).abs() < 1e-10, "{a:?} {b:?}");
            }
        }
        let h0 = 2.0;
        let x = heisenberg_exp(&HeisenbergCovector::new(1.0, 0.0, h0), 2.0 * PI / h0);
        assert!(x[0].abs() < 1e-14 && x[1].abs() < 1e-14 && x[2] > 0.0);
    }

    #[test]
    fn branches_agree_near_zero() {
        for &h in &[1e-3, 0.49, 0.51] {
            let lam = HeisenbergCovector::new(0.8, 0.6, h);
            let a = heisenberg_exp(&lam, 1.0);
            let b = rk4_exp(&lam, 1.0, 2000);
            for i in 0..3 {
                assert!((a[i] - b[i]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn distance_inverts_exp() {
        for &(p1, p2, h0) in &[(1.0, 0.0, 0.0), (0.3, 0.4, 1.0), (1.2, -0.5, -5.0), (0.1, 0.2, 6.0)] {
            let lam = HeisenbergCovector::new(p1, p2, h0);
            let d = heisenberg_distance_from_origin(heisenberg_exp(&lam, 1.0));
            assert!((d - lam.speed()).abs() < 1e-9 * lam.speed(), "{d} vs {}", lam.speed());
        }
        assert!((heisenberg_distance_from_origin([0.0, 0.0, 1.0]) - (4.0 * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn direct_distortion_matches_model() {
        let grid = [0.05, 0.3, 0.5, 0.8, 1.0];
        let flat = heisenberg_distortion_direct(&HeisenbergCovector::new(1.0, 0.0, 0.0), &grid, &HeisenbergWeight::None)
            .unwrap();
        assert!((flat.values[2] - 0.03125).abs() < 1e-9);
        let lam = HeisenbergCovector::new(0.6, 0.8, 2.0);
        let c = heisenberg_distortion_direct(&lam, &grid, &HeisenbergWeight::None).unwrap();
        for (t, b) in grid.iter().zip(&c.values) {
            let m = t * beta_two_column_k2zero(4.0, *t).unwrap();
            assert!((b - m).abs() < 1e-6 * m, "t={t}: {b} vs {m}");
        }
        assert_eq!(c.values[4], 1.0);
    }

    #[test]
    fn direct_conjugate_time() {
        for &h0 in &[1.0, 2.0, 4.0] {
            let tc = heisenberg_conjugate_time_direct(&HeisenbergCovector::new(1.0, 0.0, h0), 8.0).unwrap();
            assert!((tc - 2.0 * PI / h0).abs() < 1e-6, "{tc}");
        }
        assert!(heisenberg_conjugate_time_direct(&HeisenbergCovector::new(1.0, 0.0, 0.0), 4.0).is_none());
    }

    #[test]
    fn profile_examples() {
        let p = heisenberg_profile(&HeisenbergCovector::new(1.0, 0.0, 0.0), &HeisenbergWeight::None).unwrap();
        assert_eq!(p.curvature(0.3), Mat::zeros(3, 3));
        assert_eq!(p.rho(0.3), 0.0);
        let p = heisenberg_profile(&HeisenbergCovector::new(0.0, 1.0, 2.0), &HeisenbergWeight::None).unwrap();
        assert_eq!(p.curvature(0.5), diag(&[4.0, 0.0, 0.0]));
        assert!(heisenberg_profile(&HeisenbergCovector::new(0.0, 0.0, 1.0), &HeisenbergWeight::None).is_err());
    }

    #[test]
    fn weighted_profile_matches_finite_differences() {
        let lam = HeisenbergCovector::new(0.7, -0.4, 1.5).at([0.3, 0.2, -0.1]);
        for w in [HeisenbergWeight::Quadratic, HeisenbergWeight::CustomPoly { coeffs: vec![0.0, 0.5, 0.2] }] {
            let p = heisenberg_profile(&lam, &w).unwrap();
            let psi = |t: f64| w.psi(heisenberg_exp(&lam, t));
            let h = 1e-4;
            for &t in &[0.1, 0.5, 0.9] {
                let d1 = (psi(t + h) - psi(t - h)) / (2.0 * h);
                let d2 = (psi(t + h) - 2.0 * psi(t) + psi(t - h)) / (h * h);
                assert!((p.rho(t) + d1).abs() < 1e-7);
                assert!((p.rho_dot(t) + d2).abs() < 1e-5);
            }
            assert!(p.rho_dot_defect(&[0.2, 0.6], 1e-4) < 1e-6);
        }
    }

    #[test]
    fn homogeneity_of_profile() {
        let unit = heisenberg_profile(&HeisenbergCovector::new(0.6, 0.8, 1.5), &HeisenbergWeight::None).unwrap();
        for &c in &[0.5, 2.0] {
            let scaled =
                heisenberg_profile(&HeisenbergCovector::new(0.6 * c, 0.8 * c, 1.5 * c), &HeisenbergWeight::None)
                    .unwrap();
            let (r1, rc) = (unit.curvature(0.4), scaled.curvature(0.4));
            assert!((rc[(0, 0)] - c * c * r1[(0, 0)]).abs() < 1e-14);
            assert!((rc[(1, 1)] - c.powi(4) * r1[(1, 1)]).abs() < 1e-14);
        }
    }

    #[test]
    fn quadratic_ball_constants() {
        let bc = HeisenbergWeight::Quadratic.ball_constants(2.5, 1000);
        assert!((bc.l_r - 2.5).abs() < 1e-14);
        assert_eq!(bc.c_r, 1.0);
        let none = HeisenbergWeight::None.ball_constants(1.0, 10);
        assert_eq!((none.l_r, none.c_r), (0.0, 0.0));
    }

    #[test]
    fn n0_and_shift_bound_examples() {
        assert_eq!(heisenberg_n0(1.0, 1.0, 0.0, 1.0).unwrap(), Some(6.5));
        assert_eq!(heisenberg_n0(1.0, 2.0, 1.5, 3.0).unwrap(), None);
        assert!(heisenberg_n0(1.0, 0.0, 3.0, 1.0).unwrap().unwrap() > 5.0);
        assert!(heisenberg_n0(0.0, 1.0, 0.0, 1.0).is_err());
        assert_eq!(heisenberg_rho_shift_bound(1.0, 1.0, 1.0), 1.0);
        assert_eq!(heisenberg_rho_shift_bound(1.0, 0.0, 0.5), 0.03125);
        assert!((heisenberg_rho_shift_bound(1.0, 1.0, 0.5) - 0.018954).abs() < 1e-6);
    }

    #[test]
    fn sasakian_examples() {
        let base = SasakianData { d: 1, h0: 2.0, speed: 1.0, sectional: 0.0, ricci: 0.0, grad_dot: 0.0, grad_j: 0.0, hess: 0.0 };
        assert_eq!(sasakian_ricci(&base).unwrap(), SuperboxRicci { a: 0.0, b: 4.0, c: None });
        let zero = SasakianData { d: 2, h0: 0.0, ..base };
        assert_eq!(sasakian_ricci(&zero).unwrap(), SuperboxRicci { a: 0.0, b: 0.0, c: Some(0.0) });
        let d2 = SasakianData { d: 2, sectional: 1.0, ricci: 3.0, ..base };
        assert_eq!(sasakian_ricci(&d2).unwrap(), SuperboxRicci { a: 0.0, b: 5.0, c: Some(4.0) });
        assert!(sasakian_ricci(&SasakianData { d: 0, ..base }).is_err());

        assert_eq!(sasakian_be_ricci(&d2, 8.0).unwrap(), sasakian_ricci(&d2).unwrap());
        let w = SasakianData { h0: 0.0, grad_dot: 1.0, ..base };
        assert!((sasakian_be_ricci(&w, 6.0).unwrap().b + 0.25).abs() < 1e-15);
        assert!(sasakian_be_ricci(&w, 3.0).is_err());
    }

    #[test]
    fn be_formula_matches_transform() {
        // Heisenberg with quadratic weight: entry (0,0) of R_μ^N is Ric^{N,b}
        let lam = HeisenbergCovector::new(0.9, 0.3, 1.1).at([0.2, -0.3, 0.0]);
        let p = heisenberg_profile(&lam, &HeisenbergWeight::Quadratic).unwrap();
        let y = YoungDiagram::from_rows(&[2, 1]).unwrap();
        let nf = y.normal_form();
        for &n_param in &[4.0, 6.0, 10.0] {
            let be = crate::riccati::bakry_emery_transform(&nf.gamma1.transpose(), &nf.gamma2, &p, n_param).unwrap();
            for &t in &[0.2, 0.7] {
                let data = SasakianData {
                    d: 1,
                    h0: lam.h0,
                    speed: lam.speed(),
                    sectional: 0.0,
                    ricci: 0.0,
                    grad_dot: -p.rho(t),
                    grad_j: 0.0,
                    hess: -p.rho_dot(t),
                };
                let b = sasakian_be_ricci(&data, n_param).unwrap().b;
                assert!((be.profile.curvature(t)[(0, 0)] - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn three_sasakian_examples() {
        let zero = ThreeSasakianData { d: 2, v: [0.0; 3], varrho: 0.0 };
        assert_eq!(three_sasakian_ricci(&zero), SuperboxRicci { a: 0.0, b: 12.0, c: Some(4.0) });
        let k = -9.0;
        let one = ThreeSasakianData { d: 1, v: [1.0, 0.0, 0.0], varrho: 2.0 * k };
        let r = three_sasakian_ricci(&one);
        assert!((r.a - 3.0 * (0.75 * -18.0 - 3.5 - 15.0 / 8.0)).abs() < 1e-13);
        assert!((r.a / 3.0 - three_sasakian_bounds(1.0, k).0).abs() < 1e-13);
        assert_eq!(r.b, 27.0);
        assert!(three_sasakian_mcp_condition(-9.0));
        assert!(three_sasakian_mcp_condition(three_sasakian_threshold()));
        assert!(!three_sasakian_mcp_condition(-10.0));
        assert!((three_sasakian_threshold() + 9.911067).abs() < 1e-6);
    }

    #[test]
    fn three_sasakian_condition_is_the_quadratic() {
        for &k in &[-10.5, -10.0, -9.95, -9.9, -9.0, 0.0] {
            let b = 26.0 + 6.0 * k;
            let min_over_s = if b >= 0.0 { 16.0 } else { 16.0 - b * b / 70.0 };
            assert_eq!(three_sasakian_mcp_condition(k), min_over_s >= 0.0, "K={k}");
        }
    }

    #[test]
    fn three_sasakian_profile_shape() {
        let p = three_sasakian_profile(&ThreeSasakianData { d: 1, v: [0.0; 3], varrho: 0.0 }).unwrap();
        assert_eq!(p.dim(), 7);
        assert_eq!(p.k(), 4);
        assert_eq!(p.diagram().unwrap().geodesic_dimension(), 13);
        assert!((p.superbox_ricci(0.5, 0, 0).unwrap() - 12.0).abs() < 1e-14);
    }
}
