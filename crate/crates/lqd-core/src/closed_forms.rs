//! Closed-form distortion coefficients of constant-curvature models.
//!
//! Every coefficient here is an entire function of the curvature
//! parameters away from genuine poles (conjugate times). They are
//! evaluated through the entire functions
//!
//! ```text
//! S(w)  = sin²(√w)/w          Sn(w) = sin(√w)/√w
//! S'(w) = sin u (u cos u − sin u)/u⁴,   u = √w
//! ```
//!
//! which are even in `√w`, so no branch choice leaks into the result.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{LqdError, Result};
use crate::tolerances;

/// Below this modulus of `w` the power series are used.
const SERIES_RADIUS: f64 = 4.0;
/// Below this modulus of `u = tθ` the θ-formulas switch to series.
const THETA_SERIES: f64 = 0.5;
const SERIES_TERMS: usize = 40;

/// Coefficients of `S(w) = Σ s_m w^m`.
fn s_coeffs() -> &'static [f64; SERIES_TERMS] {
    static C: OnceLock<[f64; SERIES_TERMS]> = OnceLock::new();
    C.get_or_init(|| {
        let mut c = [0.0; SERIES_TERMS];
        c[0] = 1.0;
        for m in 1..SERIES_TERMS {
            let mf = m as f64;
            c[m] = -c[m - 1] * 4.0 / ((2.0 * mf + 1.0) * (2.0 * mf + 2.0));
        }
        c
    })
}

fn horner(coeffs: impl DoubleEndedIterator<Item = f64>, w: C) -> C {
    coeffs.rev().fold(C::new(0.0, 0.0), |acc, c| acc * w + c)
}

/// `S(w) = sin²(√w)/w`, with `S(0) = 1`.
pub fn sinc_sq(w: C) -> C {
    if w.norm() <= SERIES_RADIUS {
        horner(s_coeffs().iter().copied(), w)
    } else {
        let s = w.sqrt().sin();
        s * s / w
    }
}

/// Derivative of [`sinc_sq`].
pub fn sinc_sq_prime(w: C) -> C {
    if w.norm() <= SERIES_RADIUS {
        let c = s_coeffs();
        horner((1..SERIES_TERMS).map(|m| m as f64 * c[m]), w)
    } else {
        let u = w.sqrt();
        u.sin() * (u * u.cos() - u.sin()) / (w * w)
    }
}

/// `(S(w) − 1)/w`.
pub fn sinc_sq_reduced(w: C) -> C {
    if w.norm() <= SERIES_RADIUS {
        horner(s_coeffs()[1..].iter().copied(), w)
    } else {
        (sinc_sq(w) - 1.0) / w
    }
}

/// `sin(√w)/√w` for real `w`, with `sinh` for negative `w`.
pub fn sinc_root(w: f64) -> f64 {
    if w.abs() <= SERIES_RADIUS {
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 1..SERIES_TERMS {
            let mf = m as f64;
            term *= -w / ((2.0 * mf) * (2.0 * mf + 1.0));
            sum += term;
        }
        sum
    } else if w > 0.0 {
        let u = w.sqrt();
        u.sin() / u
    } else {
        let u = (-w).sqrt();
        u.sinh() / u
    }
}

fn gauss_legendre_16() -> &'static [(f64, f64); 16] {
    static GL: OnceLock<[(f64, f64); 16]> = OnceLock::new();
    GL.get_or_init(|| {
        let n = 16;
        let mut out = [(0.0, 0.0); 16];
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            out[i] = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        out
    })
}

/// Divided difference `(S(a) − S(b))/(a − b)`, equal to `S'(a)` when `a = b`.
pub fn sinc_sq_divided_difference(a: C, b: C) -> C {
    let h = a - b;
    if h.norm() > 1.0 {
        return (sinc_sq(a) - sinc_sq(b)) / h;
    }
    let mid = (a + b) * 0.5;
    gauss_legendre_16()
        .iter()
        .map(|&(x, w)| sinc_sq_prime(mid + h * (0.5 * x)) * (0.5 * w))
        .sum()
}

/// `sin(√κ t)/sin(√κ)` continued analytically through `κ = 0`.
pub fn sin_ratio(kappa: f64, t: f64) -> Result<f64> {
    let den = sinc_root(kappa);
    if den.abs() < tolerances::POLE {
        return Err(LqdError::Pole { denominator: den });
    }
    Ok(t * sinc_root(kappa * t * t) / den)
}

pub fn beta_riemannian(kappa: f64, n: usize, t: f64) -> Result<f64> {
    Ok(sin_ratio(kappa, t)?.powi(n as i32))
}

/// `t · sin_ratio^{n−1}`: the coefficient with the direction of motion removed.
pub fn beta_riemannian_sharp(kappa: f64, n: usize, t: f64) -> Result<f64> {
    if n == 0 {
        return Err(LqdError::InvalidInput("n must be positive".into()));
    }
    Ok(t * sin_ratio(kappa, t)?.powi(n as i32 - 1))
}

/// Derived parameters of a single row of length two with `Q = diag(κ₁, κ₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoColumnParams {
    pub kappa1: f64,
    pub kappa2: f64,
    pub x: f64,
    pub y: C,
    pub theta_plus: C,
    pub theta_minus: C,
}

impl TwoColumnParams {
    pub fn new(kappa1: f64, kappa2: f64) -> Self {
        let x = kappa1 / 2.0;
        let y = C::new(4.0 * kappa2 + kappa1 * kappa1, 0.0).sqrt() / 2.0;
        let a = (y + x).sqrt();
        let b = (-y + x).sqrt();
        TwoColumnParams {
            kappa1,
            kappa2,
            x,
            y,
            theta_plus: (a + b) / 2.0,
            theta_minus: (a - b) / 2.0,
        }
    }

    /// `θ±²`, the roots of `w² − x w + y²/4`.
    pub fn theta_squares(&self) -> (C, C) {
        let r = C::new(-self.kappa2, 0.0).sqrt() / 2.0;
        let c = C::new(self.kappa1 / 4.0, 0.0);
        (c + r, c - r)
    }
}

fn check_real(z: C) -> Result<f64> {
    if z.im.abs() > tolerances::IMAGINARY_RESIDUE * z.re.abs().max(f64::MIN_POSITIVE) {
        return Err(LqdError::ImaginaryResidue { residue: z.im });
    }
    Ok(z.re)
}

/// Distortion of the row of length two with `Q = diag(κ₁, κ₂)`.
///
/// Computed as `t⁴ · D(θ₊²t², θ₋²t²)/D(θ₊², θ₋²)` where `D` is the divided
/// difference of `S`. This covers `κ₂ = 0` (`θ₊ = θ₋`) and the resonant case
/// (`θ₋ = 0`) without special branches.
pub fn beta_two_column(kappa1: f64, kappa2: f64, t: f64) -> Result<f64> {
    let (wp, wm) = TwoColumnParams::new(kappa1, kappa2).theta_squares();
    let den = sinc_sq_divided_difference(wp, wm);
    if 3.0 * den.norm() < tolerances::POLE {
        return Err(LqdError::Pole { denominator: den.norm() });
    }
    let t2 = t * t;
    let num = sinc_sq_divided_difference(wp * t2, wm * t2);
    check_real(num / den * (t2 * t2))
}

/// `sin u (u cos u − sin u)/u⁴`, series near zero.
fn k2zero_kernel(u: C) -> C {
    if u.norm() < THETA_SERIES {
        let c = s_coeffs();
        horner((1..SERIES_TERMS).map(|m| m as f64 * c[m]), u * u)
    } else {
        u.sin() * (u * u.cos() - u.sin()) / (u * u * u * u)
    }
}

/// `(sin²u − u²)/u⁴`, series near zero.
fn resonant_kernel(u: C) -> C {
    if u.norm() < THETA_SERIES {
        horner(s_coeffs()[1..].iter().copied(), u * u)
    } else {
        let s = u.sin();
        (s * s - u * u) / (u * u * u * u)
    }
}

fn theta_of(kappa1: f64) -> C {
    C::new(kappa1, 0.0).sqrt() / 2.0
}

/// Case `κ₂ = 0`:
/// `sin(tθ)/sin θ · (tθ cos tθ − sin tθ)/(θ cos θ − sin θ)`, `θ = √κ₁/2`.
pub fn beta_two_column_k2zero(kappa1: f64, t: f64) -> Result<f64> {
    let th = theta_of(kappa1);
    let den = k2zero_kernel(th);
    if 3.0 * den.norm() < tolerances::POLE {
        return Err(LqdError::Pole { denominator: den.norm() });
    }
    check_real(k2zero_kernel(th * t) / den * t.powi(4))
}

/// Case `4κ₂ + κ₁² = 0`: `(sin²(tθ) − (tθ)²)/(sin²θ − θ²)`, `θ = √(κ₁/2)`.
pub fn beta_two_column_resonant(kappa1: f64, t: f64) -> Result<f64> {
    let th = C::new(kappa1 / 2.0, 0.0).sqrt();
    let den = resonant_kernel(th);
    if 3.0 * den.norm() < tolerances::POLE {
        return Err(LqdError::Pole { denominator: den.norm() });
    }
    check_real(resonant_kernel(th * t) / den * t.powi(4))
}

/// `g(z) = 2z(z − sin z)/(z² + 2cos z − 2)`, `g(0) = 4`.
pub fn g_of_z(z: f64) -> f64 {
    if z.abs() < 0.1 {
        let z2 = z * z;
        let num = 1.0 / 3.0 - z2 / 60.0 + z2 * z2 / 2520.0 - z2 * z2 * z2 / 181_440.0;
        let den = 1.0 / 12.0 - z2 / 360.0 + z2 * z2 / 20_160.0 - z2 * z2 * z2 / 1_814_400.0;
        num / den
    } else {
        2.0 * z * (z - z.sin()) / (z * z + 2.0 * z.cos() - 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GBoundReport {
    pub z_max: f64,
    pub samples: usize,
    pub max_g: f64,
    pub argmax: f64,
    pub below_four: bool,
}

/// Samples `g` on `z_max·j/samples`, `j = 1..=samples`.
pub fn check_g_bound(z_max: f64, samples: usize) -> GBoundReport {
    let (mut max_g, mut argmax) = (f64::NEG_INFINITY, 0.0);
    for j in 1..=samples {
        let z = z_max * j as f64 / samples as f64;
        let g = g_of_z(z);
        if g > max_g {
            max_g = g;
            argmax = z;
        }
    }
    GBoundReport { z_max, samples, max_g, argmax, below_four: max_g < 4.0 }
}

/// `π/√κ` for `κ > 0`, infinite otherwise.
pub fn conjugate_time_single(kappa: f64) -> f64 {
    if kappa > 0.0 {
        PI / kappa.sqrt()
    } else {
        f64::INFINITY
    }
}

/// Upper bound `2π/Re(√(x+y) − √(x−y))` on the first conjugate time of the
/// length-two row, or infinity when the bound does not apply.
pub fn conjugate_time_two_column_bound(kappa1: f64, kappa2: f64) -> f64 {
    let finite = (kappa1 > 0.0 && kappa1 * kappa1 + 4.0 * kappa2 > 0.0) || (kappa1 <= 0.0 && kappa2 > 0.0);
    if !finite {
        return f64::INFINITY;
    }
    let p = TwoColumnParams::new(kappa1, kappa2);
    let d = ((p.y + p.x).sqrt() - (-p.y + p.x).sqrt()).re;
    if d <= 0.0 {
        f64::INFINITY
    } else {
        2.0 * PI / d
    }
}

/// One level of a product model: `size` rows sharing the curvature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelLevel {
    pub size: usize,
    pub kappas: Vec<f64>,
}

/// Distortion of the single row of length `kappas.len()` with `Q = diag(kappas)`.
pub fn single_row_beta(kappas: &[f64], t: f64) -> Result<f64> {
    match kappas.len() {
        0 => Err(LqdError::InvalidInput("empty row".into())),
        1 => sin_ratio(kappas[0], t),
        2 => beta_two_column(kappas[0], kappas[1], t),
        _ => crate::lq::LqProblem::single_row(kappas)?.beta_at(t),
    }
}

/// How to exponentiate each level in [`model_product_beta`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProductConvention {
    /// `Π β_λ^{r_λ}`.
    Plain,
    /// `t · Π β_λ^{r'_λ}` with `r' = r − 1` on the level of length one.
    Sharp,
}

pub fn model_product_beta(levels: &[ModelLevel], t: f64, convention: ProductConvention) -> Result<f64> {
    let mut out = match convention {
        ProductConvention::Plain => 1.0,
        ProductConvention::Sharp => t,
    };
    for l in levels {
        let r = match convention {
            ProductConvention::Sharp if l.kappas.len() == 1 => l.size.saturating_sub(1),
            _ => l.size,
        };
        if r > 0 {
            out *= single_row_beta(&l.kappas, t)?.powi(r as i32);
        }
    }
    Ok(out)
}
