//! Verification of the comparison theorems on a concrete profile.
//!
//! Every mode computes `β_t` from the profile, the model coefficient it is
//! compared with, and a ratio normalized to 1 at `t = 1` that the theorem
//! claims to be monotone. Hypotheses are checked on the grid first; a
//! failing hypothesis is an error ([`LqdError::HypothesisViolated`]), never a
//! negative verdict.

use serde::{Deserialize, Serialize};

use crate::closed_forms::{conjugate_time_single, model_product_beta, ModelLevel, ProductConvention};
use crate::error::{LqdError, Result};
use crate::geometry::{self, HeisenbergCovector, HeisenbergWeight, ThreeSasakianData};
use crate::grid::GridSpec;
use crate::linalg::{from_rows, max_eigenvalue, min_eigenvalue, Mat};
use crate::lq::{DistortionCurve, LqProblem, Method};
use crate::riccati::{self, CurvatureProfile};
use crate::tolerances;
use crate::young::YoungDiagram;

/// `β_t` with `d/dt log β = tr(BV + A) + ρ` and `β₁ = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDistortion {
    pub curve: DistortionCurve,
    /// `t · d/dt log β_t`.
    pub log_derivative: Vec<f64>,
}

fn diagram_of(profile: &CurvatureProfile) -> Result<&YoungDiagram> {
    profile.diagram().ok_or_else(|| LqdError::InvalidInput("profile has no Young diagram".into()))
}

fn normal_ab(y: &YoungDiagram) -> (Mat, Mat) {
    let nf = y.normal_form();
    (nf.gamma1.transpose(), nf.gamma2)
}

pub fn beta_from_profile(profile: &CurvatureProfile, grid: &[f64]) -> Result<ProfileDistortion> {
    let y = diagram_of(profile)?;
    let (a, b) = normal_ab(y);
    let ti = riccati::trace_integral(&a, &b, profile, grid)?;
    Ok(ProfileDistortion {
        curve: DistortionCurve { times: grid.to_vec(), values: ti.beta, method: Method::RiccatiTrace },
        log_derivative: ti.log_derivative,
    })
}

/// Named geometry generator or inline data for a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "geometry", rename_all = "kebab-case")]
pub enum ProfileSpec {
    Heisenberg {
        p: [f64; 2],
        h0: f64,
        #[serde(default)]
        base: [f64; 3],
        #[serde(default)]
        weight: HeisenbergWeight,
    },
    ThreeSasakian {
        d: usize,
        v: [f64; 3],
        varrho: f64,
    },
    Constant {
        diagram: YoungDiagram,
        r: Vec<Vec<f64>>,
    },
    Sampled {
        diagram: YoungDiagram,
        times: Vec<f64>,
        r: Vec<Vec<Vec<f64>>>,
        #[serde(default)]
        rho: Option<Vec<f64>>,
        #[serde(default)]
        rho_dot: Option<Vec<f64>>,
    },
}

impl ProfileSpec {
    pub fn build(&self) -> Result<CurvatureProfile> {
        match self {
            ProfileSpec::Heisenberg { p, h0, base, weight } => {
                let lam = HeisenbergCovector { p: *p, h0: *h0, base: *base };
                geometry::heisenberg_profile(&lam, weight)
            }
            ProfileSpec::ThreeSasakian { d, v, varrho } => {
                geometry::three_sasakian_profile(&ThreeSasakianData { d: *d, v: *v, varrho: *varrho })
            }
            ProfileSpec::Constant { diagram, r } => CurvatureProfile::constant(diagram, matrix(r)?),
            ProfileSpec::Sampled { diagram, times, r, rho, rho_dot } => {
                let m = times.len();
                let r = r.iter().map(|x| matrix(x)).collect::<Result<Vec<_>>>()?;
                CurvatureProfile::from_samples(
                    diagram,
                    times.clone(),
                    r,
                    rho.clone().unwrap_or_else(|| vec![0.0; m]),
                    rho_dot.clone().unwrap_or_else(|| vec![0.0; m]),
                )
            }
        }
    }
}

fn matrix(rows: &[Vec<f64>]) -> Result<Mat> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(LqdError::ShapeMismatch("matrix must be square and non-empty".into()));
    }
    Ok(from_rows(rows))
}

/// Which theorem to verify, with its bound data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Mode {
    /// `R ⪰ Q`, `ρ ≤ 0`; or `R ⪯ Q`, `ρ ≥ 0` when reversed.
    Sectional {
        q: Vec<Vec<f64>>,
        #[serde(default)]
        reversed: bool,
    },
    /// As sectional with `ρ ≤ c` (or `ρ ≥ c` reversed).
    SectionalShifted {
        q: Vec<Vec<f64>>,
        c: f64,
        #[serde(default)]
        reversed: bool,
    },
    /// `(1/N) R_μ^N ⪰ (1/n) Q`.
    BakryEmery { q: Vec<Vec<f64>>, n_param: f64 },
    /// `(1/r) Ric^{λ_i} ≥ κ_{λ_i}`, `ρ ≤ 0`.
    Ricci { kappas: Vec<Vec<f64>> },
    /// `(1/r) Ric^{N,λ_i} ≥ (N/n) κ_{λ_i}`.
    #[serde(rename = "ricci-be", alias = "ricci-BE")]
    RicciBe { kappas: Vec<Vec<f64>>, n_param: f64 },
    /// Direction of motion removed; `N = n` formally when `n_param` is absent.
    RicciSharp {
        kappas: Vec<Vec<f64>>,
        #[serde(default)]
        n_param: Option<f64>,
    },
    /// Two-column diagrams with `4κ_a + κ_b² ≥ 0`, `κ_b ≥ 0`, `κ_c ≥ 0`.
    McpTwoColumn { kappa_a: f64, kappa_b: f64, kappa_c: f64 },
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Sectional { .. } => "sectional",
            Mode::SectionalShifted { .. } => "sectional-shifted",
            Mode::BakryEmery { .. } => "bakry-emery",
            Mode::Ricci { .. } => "ricci",
            Mode::RicciBe { .. } => "ricci-be",
            Mode::RicciSharp { .. } => "ricci-sharp",
            Mode::McpTwoColumn { .. } => "mcp-two-column",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTask {
    #[serde(flatten)]
    pub mode: Mode,
    pub profile: ProfileSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    NonIncreasing,
    NonDecreasing,
}

/// Samples of the compared quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSamples {
    pub times: Vec<f64>,
    pub beta: Vec<f64>,
    pub model: Vec<f64>,
    pub ratio: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityVerdict {
    pub mode: String,
    pub direction: Direction,
    pub grid: GridSpec,
    /// Largest step of the ratio against the claimed direction.
    pub max_increment: f64,
    pub tol: f64,
    /// Whether the grid was doubled because an increment came within 10× of `tol`.
    pub refined: bool,
    /// `min_t ratio` (or `max_t ratio` for non-decreasing).
    pub extreme_ratio: f64,
    /// The integrated inequality `ratio ≥ 1` (or `≤ 1`) on the samples.
    pub inequality_holds: bool,
    pub verdict: bool,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<RatioSamples>,
}

/// Largest step of `values` against `direction`.
pub fn max_increment(values: &[f64], direction: Direction) -> f64 {
    values
        .windows(2)
        .map(|w| match direction {
            Direction::NonIncreasing => w[1] - w[0],
            Direction::NonDecreasing => w[0] - w[1],
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

struct Prepared {
    direction: Direction,
    notes: Vec<String>,
    ratio: Box<dyn Fn(&[f64]) -> Result<RatioSamples>>,
}

fn violated(msg: String) -> LqdError {
    LqdError::HypothesisViolated(msg)
}

fn slack(scale: f64) -> f64 {
    tolerances::HYPOTHESIS * scale.abs().max(1.0)
}

fn check_matrix_bound(
    grid: &[f64],
    what: &str,
    lower: bool,
    gap: impl Fn(f64) -> Mat,
) -> Result<()> {
    for &t in grid {
        let g = gap(t);
        let s = slack(g.amax());
        if lower {
            let e = min_eigenvalue(&g);
            if e < -s {
                return Err(violated(format!("{what}: eigenvalue {e:e} < 0 at t = {t}")));
            }
        } else {
            let e = max_eigenvalue(&g);
            if e > s {
                return Err(violated(format!("{what}: eigenvalue {e:e} > 0 at t = {t}")));
            }
        }
    }
    Ok(())
}

fn check_rho(profile: &CurvatureProfile, grid: &[f64], c: f64, upper: bool) -> Result<()> {
    for &t in grid {
        let rho = profile.rho(t);
        let bad = if upper { rho > c + slack(c) } else { rho < c - slack(c) };
        if bad {
            let rel = if upper { "≤" } else { "≥" };
            return Err(violated(format!("ρ({t}) = {rho} violates ρ {rel} {c}")));
        }
    }
    Ok(())
}

/// Index of the box carrying the direction of motion: the last box of the
/// level of length one.
fn motion_box(y: &YoungDiagram) -> Option<(usize, usize)> {
    y.levels().iter().position(|l| l.length == 1).map(|li| {
        let l = y.levels()[li];
        (li, y.box_index(l.first_row + l.size - 1, 0))
    })
}

/// Effective level sizes: `r`, or `r − 1` on the length-one level when sharp.
fn effective_sizes(y: &YoungDiagram, sharp: bool) -> Vec<usize> {
    y.levels()
        .iter()
        .map(|l| if sharp && l.length == 1 { l.size - 1 } else { l.size })
        .collect()
}

fn check_kappa_shape(y: &YoungDiagram, kappas: &[Vec<f64>], sizes: &[usize]) -> Result<()> {
    if kappas.len() != y.levels().len() {
        return Err(LqdError::ShapeMismatch(format!(
            "{} levels but {} κ vectors",
            y.levels().len(),
            kappas.len()
        )));
    }
    for (li, l) in y.levels().iter().enumerate() {
        if sizes[li] > 0 && kappas[li].len() != l.length {
            return Err(LqdError::ShapeMismatch(format!("level {li} needs {} bounds", l.length)));
        }
    }
    Ok(())
}

/// `(1/r') Ric^{λ_i}(t) ≥ factor · κ_{λ_i}` for `R(t) = curvature(t)`, the
/// motion box excluded when `sharp`.
fn check_superbox_bounds(
    y: &YoungDiagram,
    grid: &[f64],
    kappas: &[Vec<f64>],
    factor: f64,
    sharp: bool,
    curvature: impl Fn(f64) -> Mat,
) -> Result<()> {
    let sizes = effective_sizes(y, sharp);
    let motion = if sharp { motion_box(y) } else { None };
    for &t in grid {
        let r = curvature(t);
        for li in 0..y.levels().len() {
            if sizes[li] == 0 {
                continue;
            }
            for (i, &kap) in kappas[li].iter().enumerate() {
                let mut ric: f64 = y.superbox(li, i).into_iter().map(|j| r[(j, j)]).sum();
                if let Some((ml, mb)) = motion {
                    if ml == li && i == 0 {
                        ric -= r[(mb, mb)];
                    }
                }
                let lhs = ric / sizes[li] as f64;
                let rhs = factor * kap;
                if lhs < rhs - slack(rhs) {
                    return Err(violated(format!(
                        "superbox ({li},{i}): traced curvature {lhs} < {rhs} at t = {t}"
                    )));
                }
            }
        }
    }
    Ok(())
}

fn model_levels(y: &YoungDiagram, kappas: &[Vec<f64>], sizes: &[usize]) -> Vec<ModelLevel> {
    y.levels()
        .iter()
        .enumerate()
        .filter(|(li, _)| sizes[*li] > 0)
        .map(|(li, l)| ModelLevel { size: l.size, kappas: kappas[li].clone() })
        .collect()
}

fn be_profile(profile: &CurvatureProfile, n_param: f64) -> Result<CurvatureProfile> {
    let (a, b) = normal_ab(diagram_of(profile)?);
    Ok(riccati::bakry_emery_transform(&a, &b, profile, n_param)?.profile)
}

fn prepare(task: &ComparisonTask, profile: &CurvatureProfile, grid: &[f64]) -> Result<Prepared> {
    let y = diagram_of(profile)?.clone();
    let n = y.n() as f64;
    let mut notes = Vec::new();
    let beta_of = {
        let profile = profile.clone();
        move |g: &[f64]| beta_from_profile(&profile, g).map(|d| d.curve.values)
    };
    let prepared = match &task.mode {
        Mode::Sectional { q, reversed } | Mode::SectionalShifted { q, reversed, .. } => {
            let q = matrix(q)?;
            let c = match task.mode {
                Mode::SectionalShifted { c, .. } => c,
                _ => 0.0,
            };
            let lower = !reversed;
            check_matrix_bound(grid, "R − Q", lower, |t| profile.curvature(t) - &q)?;
            check_rho(profile, grid, c, lower)?;
            let model = LqProblem::from_diagram(&y, q)?;
            Prepared {
                direction: if *reversed { Direction::NonDecreasing } else { Direction::NonIncreasing },
                notes,
                ratio: Box::new(move |g| {
                    let beta = beta_of(g)?;
                    let m = model.beta_from_determinant(g)?.values;
                    let model: Vec<f64> = m.iter().zip(g).map(|(m, t)| m * (c * (t - 1.0)).exp()).collect();
                    let ratio = beta.iter().zip(&model).map(|(b, m)| b / m).collect();
                    Ok(RatioSamples { times: g.to_vec(), beta, model, ratio })
                }),
            }
        }
        Mode::BakryEmery { q, n_param } => {
            let q = matrix(q)?;
            let nn = *n_param;
            let be = be_profile(profile, nn)?;
            check_matrix_bound(grid, "(1/N) R_μ^N − (1/n) Q", true, |t| be.curvature(t) / nn - &q / n)?;
            let model = LqProblem::from_diagram(&y, q)?;
            Prepared {
                direction: Direction::NonIncreasing,
                notes,
                ratio: Box::new(move |g| {
                    let beta = beta_of(g)?;
                    let model: Vec<f64> = model.beta_from_determinant(g)?.values;
                    let ratio = beta.iter().zip(&model).map(|(b, m)| b.powf(1.0 / nn) / m.powf(1.0 / n)).collect();
                    Ok(RatioSamples { times: g.to_vec(), beta, model, ratio })
                }),
            }
        }
        Mode::Ricci { kappas } => {
            let sizes = effective_sizes(&y, false);
            check_kappa_shape(&y, kappas, &sizes)?;
            check_superbox_bounds(&y, grid, kappas, 1.0, false, |t| profile.curvature(t))?;
            check_rho(profile, grid, 0.0, true)?;
            let levels = model_levels(&y, kappas, &sizes);
            Prepared {
                direction: Direction::NonIncreasing,
                notes,
                ratio: Box::new(move |g| {
                    let beta = beta_of(g)?;
                    let model = g
                        .iter()
                        .map(|&t| model_product_beta(&levels, t, ProductConvention::Plain))
                        .collect::<Result<Vec<_>>>()?;
                    let ratio = beta.iter().zip(&model).map(|(b, m)| b / m).collect();
                    Ok(RatioSamples { times: g.to_vec(), beta, model, ratio })
                }),
            }
        }
        Mode::RicciBe { kappas, n_param } => {
            let nn = *n_param;
            let sizes = effective_sizes(&y, false);
            check_kappa_shape(&y, kappas, &sizes)?;
            let be = be_profile(profile, nn)?;
            check_superbox_bounds(&y, grid, kappas, nn / n, false, |t| be.curvature(t))?;
            let levels = model_levels(&y, kappas, &sizes);
            Prepared {
                direction: Direction::NonIncreasing,
                notes,
                ratio: Box::new(move |g| {
                    let beta = beta_of(g)?;
                    let model = g
                        .iter()
                        .map(|&t| model_product_beta(&levels, t, ProductConvention::Plain))
                        .collect::<Result<Vec<_>>>()?;
                    let ratio =
                        beta.iter().zip(&model).map(|(b, m)| b.powf(1.0 / nn) / m.powf(1.0 / n)).collect();
                    Ok(RatioSamples { times: g.to_vec(), beta, model, ratio })
                }),
            }
        }
        Mode::RicciSharp { kappas, n_param } => {
            if y.n() < 2 {
                return Err(LqdError::InvalidInput("sharp mode needs n ≥ 2".into()));
            }
            let sizes = effective_sizes(&y, true);
            check_kappa_shape(&y, kappas, &sizes)?;
            let nn = match n_param {
                Some(nn) => {
                    let be = be_profile(profile, *nn)?;
                    check_superbox_bounds(&y, grid, kappas, (nn - 1.0) / (n - 1.0), true, |t| be.curvature(t))?;
                    *nn
                }
                None => {
                    notes.push("N = n taken formally: plain curvature with ρ ≤ 0".into());
                    check_superbox_bounds(&y, grid, kappas, 1.0, true, |t| profile.curvature(t))?;
                    check_rho(profile, grid, 0.0, true)?;
                    n
                }
            };
            let sharp_sizes: Vec<ModelLevel> = (0..y.levels().len())
                .filter(|&li| sizes[li] > 0)
                .map(|li| ModelLevel { size: sizes[li], kappas: kappas[li].clone() })
                .collect();
            Prepared {
                direction: Direction::NonIncreasing,
                notes,
                ratio: Box::new(move |g| {
                    let beta = beta_of(g)?;
                    // t · Π β_λ^{r'_λ}
                    let model = g
                        .iter()
                        .map(|&t| model_product_beta(&sharp_sizes, t, ProductConvention::Plain).map(|m| t * m))
                        .collect::<Result<Vec<_>>>()?;
                    let ratio = beta
                        .iter()
                        .zip(&model)
                        .zip(g)
                        .map(|((b, m), t)| (b / t).powf(1.0 / (nn - 1.0)) / (m / t).powf(1.0 / (n - 1.0)))
                        .collect();
                    Ok(RatioSamples { times: g.to_vec(), beta, model, ratio })
                }),
            }
        }
        Mode::McpTwoColumn { kappa_a, kappa_b, kappa_c } => {
            let (ka, kb, kc) = (*kappa_a, *kappa_b, *kappa_c);
            let two_col = y.rows().iter().all(|&r| r <= 2) && y.rows()[0] == 2;
            if !two_col {
                return Err(LqdError::InvalidInput(format!("diagram {:?} is not two-column", y.rows())));
            }
            if 4.0 * ka + kb * kb < 0.0 || kb < 0.0 || kc < 0.0 {
                return Err(violated(format!(
                    "bounds (κ_a, κ_b, κ_c) = ({ka}, {kb}, {kc}) fail 4κ_a + κ_b² ≥ 0, κ_b ≥ 0, κ_c ≥ 0"
                )));
            }
            let (nk, c_size) = (y.levels()[0].size, y.levels().get(1).map_or(0, |l| l.size));
            let mut kappas = vec![vec![kb, ka]];
            if c_size > 0 {
                kappas.push(vec![kc]);
            }
            // Ric^a ≥ (n−k)κ_a and Ric^b ≥ (n−k)κ_b are the traced bounds of
            // the first level; Ric^c ≥ (2k−n−1)κ_c is the sharp bound of the second.
            check_superbox_bounds(&y, grid, &kappas, 1.0, true, |t| profile.curvature(t))?;
            check_rho(profile, grid, 0.0, true)?;
            let exponent = y.geodesic_dimension() as i32;
            notes.push(format!(
                "reduction: κ₁ = {kb}, κ₂ = {} ≤ κ_a; first level has {nk} rows",
                -kb * kb / 4.0 + 0.0
            ));
            notes.push(format!("exponent {exponent}"));
            Prepared {
                direction: Direction::NonIncreasing,
                notes,
                ratio: Box::new(move |g| {
                    let beta = beta_of(g)?;
                    let model: Vec<f64> = g.iter().map(|t| t.powi(exponent)).collect();
                    let ratio = beta.iter().zip(&model).map(|(b, m)| b / m).collect();
                    Ok(RatioSamples { times: g.to_vec(), beta, model, ratio })
                }),
            }
        }
    };
    Ok(prepared)
}

/// Runs a task: hypotheses, then the monotone-ratio verdict with one
/// refinement pass when the increment comes within 10× of the tolerance.
pub fn verify(task: &ComparisonTask) -> Result<MonotonicityVerdict> {
    let profile = task.profile.build()?;
    verify_profile(task, &profile)
}

pub fn verify_profile(task: &ComparisonTask, profile: &CurvatureProfile) -> Result<MonotonicityVerdict> {
    let tol = task.tol.unwrap_or(tolerances::MONOTONE);
    let mut spec = task.grid;
    if !(spec.t_min > 0.0 && spec.t_max <= 1.0 && spec.t_min < spec.t_max && spec.points >= 2) {
        return Err(LqdError::InvalidInput("grid must satisfy 0 < t_min < t_max ≤ 1".into()));
    }
    let grid = spec.nodes();
    let prepared = prepare(task, profile, &grid)?;
    let mut samples = (prepared.ratio)(&grid)?;
    let mut inc = max_increment(&samples.ratio, prepared.direction);
    let mut refined = false;
    if inc > tol / 10.0 {
        spec = spec.refined();
        samples = (prepared.ratio)(&spec.nodes())?;
        inc = max_increment(&samples.ratio, prepared.direction);
        refined = true;
    }
    let (extreme, holds) = match prepared.direction {
        Direction::NonIncreasing => {
            let m = samples.ratio.iter().copied().fold(f64::INFINITY, f64::min);
            (m, m >= 1.0 - tol)
        }
        Direction::NonDecreasing => {
            let m = samples.ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (m, m <= 1.0 + tol)
        }
    };
    Ok(MonotonicityVerdict {
        mode: task.mode.name().into(),
        direction: prepared.direction,
        grid: spec,
        max_increment: inc,
        tol,
        refined,
        extreme_ratio: extreme,
        inequality_holds: holds,
        verdict: inc <= tol && holds,
        notes: prepared.notes,
        samples: Some(samples),
    })
}

/// Model conjugate times per level and the resulting bound on lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxLengthReport {
    /// `None` means no conjugate time.
    pub level_times: Vec<Option<f64>>,
    pub bound: Option<f64>,
    /// Whether the supplied profile has no conjugate point before
    /// `min(bound, 1)`; absent when no profile is given.
    pub profile_conjugate_free: Option<bool>,
}

const MODEL_SCAN_MAX: f64 = 64.0;

/// First conjugate time of the single-row model with `Q = diag(kappas)`.
pub fn model_conjugate_time(kappas: &[f64]) -> Result<Option<f64>> {
    match kappas.len() {
        0 => Err(LqdError::InvalidInput("empty level".into())),
        1 => {
            let t = conjugate_time_single(kappas[0]);
            Ok(t.is_finite().then_some(t))
        }
        // Q ⪯ 0 makes the cost positive definite, so there is no conjugate time
        _ if kappas.iter().all(|&k| k <= 0.0) => Ok(None),
        _ => LqProblem::single_row(kappas)?.first_conjugate_time(MODEL_SCAN_MAX),
    }
}

pub fn check_conjugate_free(kappas: &[Vec<f64>], profile: Option<&CurvatureProfile>) -> Result<MaxLengthReport> {
    let level_times = kappas.iter().map(|k| model_conjugate_time(k)).collect::<Result<Vec<_>>>()?;
    let bound = level_times.iter().flatten().copied().reduce(f64::min);
    let profile_conjugate_free = match profile {
        None => None,
        Some(p) => {
            let y = diagram_of(p)?;
            let (a, b) = normal_ab(y);
            let end = bound.unwrap_or(1.0).min(1.0) * (1.0 - 1e-6);
            let grid = crate::grid::uniform(end / 512.0, end, 512);
            match riccati::solve_riccati_limit(&a, &b, p, &grid, Default::default()) {
                Ok(_) => Some(true),
                Err(LqdError::SingularN { .. }) => Some(false),
                Err(e) => return Err(e),
            }
        }
    };
    Ok(MaxLengthReport { level_times, bound, profile_conjugate_free })
}
