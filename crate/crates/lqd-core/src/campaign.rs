//! Seeded randomized campaigns over the comparison results.
//!
//! Trials are independent and draw from per-trial RNG streams, so the
//! summaries are identical whichever [`Exec`] runs them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::closed_forms::beta_two_column_k2zero;
use crate::comparison::beta_from_profile;
use crate::error::{LqdError, Result};
use crate::exec::Exec;
use crate::geometry::{self, HeisenbergCovector, HeisenbergWeight};
use crate::grid::uniform;
use crate::linalg::Mat;
use crate::riccati::{self, CurvatureProfile, RiccatiOptions};
use crate::sampling::{random_diagram, random_normal_profile, random_psd, trial_rng};
use crate::young::YoungDiagram;

/// Aggregate of one campaign. `worst` is the smallest margin seen over
/// completed trials; the verdict is `worst ≥ −tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub name: String,
    pub seed: u64,
    pub trials: usize,
    pub completed: usize,
    /// Trials whose draw hit a conjugate point in `(0, 1]` and were discarded.
    pub skipped: usize,
    pub worst: f64,
    pub tol: f64,
    pub verdict: bool,
}

fn summarize(name: &str, seed: u64, tol: f64, outcomes: Vec<Result<Option<f64>>>) -> Result<CampaignSummary> {
    let trials = outcomes.len();
    let mut worst = f64::INFINITY;
    let (mut completed, mut skipped) = (0, 0);
    for o in outcomes {
        match o? {
            Some(m) => {
                completed += 1;
                worst = worst.min(m);
            }
            None => skipped += 1,
        }
    }
    Ok(CampaignSummary {
        name: name.into(),
        seed,
        trials,
        completed,
        skipped,
        worst,
        tol,
        verdict: completed > 0 && worst >= -tol,
    })
}

/// Conjugate points make a draw unusable rather than a failure.
fn skip_conjugate<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(LqdError::SingularN { .. }) | Err(LqdError::ConjugatePoint { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Amplitude of random curvature entries; small enough that most draws are
/// conjugate-free on `[0, 1]`.
const AMPLITUDE: f64 = 1.0;

/// `R₁ = R₂ + P` with `P ⪰ 0` on a random diagram of size `n`; the margin is
/// `min_t λ_min(V₂ − V₁)` on `(1e−3, 1]`.
pub fn riccati_comparison_campaign(n: usize, trials: usize, seed: u64, tol: f64, exec: Exec) -> Result<CampaignSummary> {
    let grid = uniform(1e-3, 1.0, 200);
    let outcomes = exec.map_range(trials, |i| {
        let mut rng = trial_rng(seed ^ (n as u64) << 32, i as u64);
        let y = random_diagram(n, &mut rng);
        let r2 = random_normal_profile(&y, AMPLITUDE, &mut rng);
        let p = random_psd(n, AMPLITUDE, &mut rng);
        let base = r2.clone();
        let r1 = CurvatureProfile::from_fn(&y, move |t| base.curvature(t) + &p);
        let nf = y.normal_form();
        let rep = riccati::riccati_comparison_check(&nf.gamma1.transpose(), &nf.gamma2, &r1, &r2, &grid, tol);
        skip_conjugate(rep.map(|r| r.min_eig))
    });
    summarize(&format!("riccati-comparison-n{n}"), seed, tol, outcomes)
}

/// Result of the splitting and traced-comparison campaign on one diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracedSummary {
    pub diagram: Vec<usize>,
    pub max_splitting_defect: f64,
    pub comparison: CampaignSummary,
}

/// Smallest sampled `(1/r) Ric^{λ_i}` per superbox.
pub fn sampled_superbox_bounds(y: &YoungDiagram, profile: &CurvatureProfile, grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    y.levels()
        .iter()
        .enumerate()
        .map(|(li, l)| {
            (0..l.length)
                .map(|i| {
                    grid.iter().try_fold(f64::INFINITY, |m, &t| {
                        Ok(m.min(profile.superbox_ricci(t, li, i)? / l.size as f64))
                    })
                })
                .collect()
        })
        .collect()
}

/// Random normal profiles on `y`: the splitting identity along the solution
/// and `V_λ ⪯ V^{model}` with the sampled superbox bounds as model data.
pub fn traced_campaign(y: &YoungDiagram, trials: usize, seed: u64, tol: f64, exec: Exec) -> Result<TracedSummary> {
    let grid = uniform(1e-3, 1.0, 200);
    let nf = y.normal_form();
    let (a, b) = (nf.gamma1.transpose(), nf.gamma2);
    let outcomes = exec.map_range(trials, |i| -> Result<Option<(f64, f64)>> {
        let mut rng = trial_rng(seed, i as u64);
        let profile = random_normal_profile(y, AMPLITUDE, &mut rng);
        let Some(sol) = skip_conjugate(riccati::solve_riccati_limit(&a, &b, &profile, &grid, RiccatiOptions::default()))?
        else {
            return Ok(None);
        };
        let defect = sol.v.iter().try_fold(0.0f64, |m, v| Ok::<_, LqdError>(m.max(riccati::splitting_identity_defect(v, y)?)))?;
        let kappas = sampled_superbox_bounds(y, &profile, &grid)?;
        let rep = skip_conjugate(riccati::traced_comparison(y, &profile, &kappas, &grid, tol))?;
        Ok(rep.map(|r| (defect, r.min_eig)))
    });
    let mut max_defect = 0.0f64;
    let mut margins = Vec::with_capacity(trials);
    for o in outcomes {
        margins.push(o.map(|x| {
            x.map(|(d, m)| {
                max_defect = max_defect.max(d);
                m
            })
        }));
    }
    let name = format!("traced-comparison-{:?}", y.rows());
    Ok(TracedSummary {
        diagram: y.rows().to_vec(),
        max_splitting_defect: max_defect,
        comparison: summarize(&name, seed, tol, margins)?,
    })
}

/// A random Heisenberg covector with speed in `[0.3, 1.5]`, `|h₀| ≤ 1.5` and
/// base point in `[−0.5, 0.5]³`.
pub fn random_heisenberg_covector(rng: &mut impl Rng) -> HeisenbergCovector {
    let speed = rng.gen_range(0.3..1.5);
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    let h0 = rng.gen_range(-1.5..1.5);
    let base = [0, 1, 2].map(|_| rng.gen_range(-0.5..0.5));
    HeisenbergCovector::new(speed * angle.cos(), speed * angle.sin(), h0).at(base)
}

/// Smallest ball around the origin containing the sampled geodesic, with a
/// 1% margin.
pub fn enclosing_radius(lambda: &HeisenbergCovector, samples: usize) -> f64 {
    let r = (0..=samples)
        .map(|j| geometry::heisenberg_distance_from_origin(geometry::heisenberg_exp(lambda, j as f64 / samples as f64)))
        .fold(0.0f64, f64::max);
    1.01 * r
}

/// One weighted Heisenberg pair `(x, y) = (γ(0), γ(1))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPair {
    pub covector: HeisenbergCovector,
    pub distance: f64,
    pub radius: f64,
    pub l_r: f64,
    pub c_r: f64,
    pub n0: f64,
    /// `min_{t<1} (log β_t − N₀ log t)`.
    pub power_margin: f64,
    /// `min_{t<1} (log β_t − log(t⁵ e^{d L (t−1)}))`.
    pub shift_margin: f64,
}

const BALL_SAMPLES: usize = 2001;

/// Draws until `pairs` admissible pairs (those with a finite `N₀`) are found
/// for the quadratic weight, then checks both lower bounds on `β`.
pub fn weighted_heisenberg_pairs(pairs: usize, seed: u64, exec: Exec) -> Result<Vec<WeightedPair>> {
    let weight = HeisenbergWeight::Quadratic;
    let grid = uniform(0.01, 1.0, 100);
    let mut found = Vec::with_capacity(pairs);
    let mut trial = 0u64;
    while found.len() < pairs {
        // draw a batch and keep admissible pairs in trial order
        let batch: Vec<u64> = (trial..trial + 4 * pairs as u64).collect();
        trial += batch.len() as u64;
        let results = exec.map(&batch, |&i| -> Result<Option<WeightedPair>> {
            let lam = random_heisenberg_covector(&mut trial_rng(seed, i));
            let dist = lam.speed();
            let radius = enclosing_radius(&lam, 200);
            let ball = weight.ball_constants(radius, BALL_SAMPLES);
            let Some(n0) = geometry::heisenberg_n0(ball.c_r, ball.l_r, lam.h0, dist)? else {
                return Ok(None);
            };
            let profile = geometry::heisenberg_profile(&lam, &weight)?;
            let beta = beta_from_profile(&profile, &grid)?.curve.values;
            let (mut pm, mut sm) = (f64::INFINITY, f64::INFINITY);
            // both bounds are equalities at t = 1
            for (&t, &b) in grid.iter().zip(&beta).filter(|(&t, _)| t < 1.0) {
                pm = pm.min(b.ln() - n0 * t.ln());
                sm = sm.min(b.ln() - geometry::heisenberg_rho_shift_bound(dist, ball.l_r, t).ln());
            }
            Ok(Some(WeightedPair {
                covector: lam,
                distance: dist,
                radius,
                l_r: ball.l_r,
                c_r: ball.c_r,
                n0,
                power_margin: pm,
                shift_margin: sm,
            }))
        });
        for r in results {
            if let Some(p) = r? {
                if found.len() < pairs {
                    found.push(p);
                }
            }
        }
        if trial > 1000 * pairs as u64 {
            return Err(LqdError::InvalidInput("too few admissible weighted pairs".into()));
        }
    }
    Ok(found)
}

/// Bakry-Émery residual and the Sasakian lower bound on one weighted profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BakryEmeryCase {
    pub covector: HeisenbergCovector,
    pub n_param: f64,
    pub residual: f64,
    pub kappa_b: f64,
    /// `min_{t<1} (β_t^{1/(N−1)} − RHS_t)`.
    pub rhs_margin: f64,
}

/// For each covector and `N`: the normalized Riccati-inequality residual of
/// `V̄` at interior nodes, and `β^{1/(N−1)} ≥ t^{1/(N−1)} (β^{κ₂=0}(κ_b))^{1/2}`
/// with `κ_b = (2/(N−1)) min_t Ric^{N,b}`.
pub fn bakry_emery_cases(covectors: &[HeisenbergCovector], n_params: &[f64], exec: Exec) -> Result<Vec<BakryEmeryCase>> {
    let weight = HeisenbergWeight::Quadratic;
    let jobs: Vec<(HeisenbergCovector, f64)> =
        covectors.iter().flat_map(|l| n_params.iter().map(move |&n| (*l, n))).collect();
    let interior = uniform(0.05, 0.95, 19);
    let grid = uniform(0.01, 1.0, 100);
    exec.map(&jobs, |&(lam, nn)| {
        let profile = geometry::heisenberg_profile(&lam, &weight)?;
        let y = profile.diagram().expect("Heisenberg profile has a diagram").clone();
        let nf = y.normal_form();
        let (a, b): (Mat, Mat) = (nf.gamma1.transpose(), nf.gamma2);
        let residual = riccati::bakry_emery_residual(&a, &b, &profile, nn, &interior)?;
        let be = riccati::bakry_emery_transform(&a, &b, &profile, nn)?;
        let min_ric = grid.iter().map(|&t| be.profile.curvature(t)[(0, 0)]).fold(f64::INFINITY, f64::min);
        let kappa_b = 2.0 / (nn - 1.0) * min_ric;
        let beta = beta_from_profile(&profile, &grid)?.curve.values;
        let mut margin = f64::INFINITY;
        for (&t, &bt) in grid.iter().zip(&beta).filter(|(&t, _)| t < 1.0) {
            let rhs = t.powf(1.0 / (nn - 1.0)) * beta_two_column_k2zero(kappa_b, t)?.sqrt();
            margin = margin.min(bt.powf(1.0 / (nn - 1.0)) - rhs);
        }
        Ok(BakryEmeryCase { covector: lam, n_param: nn, residual, kappa_b, rhs_margin: margin })
    })
    .into_iter()
    .collect()
}
