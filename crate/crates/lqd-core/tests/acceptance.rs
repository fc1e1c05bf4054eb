//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use lqd_core::campaign;
use lqd_core::closed_forms::{
    beta_riemannian, beta_two_column, beta_two_column_k2zero, beta_two_column_resonant, check_g_bound,
    conjugate_time_single, conjugate_time_two_column_bound, g_of_z,
};
use lqd_core::comparison::{self, ComparisonTask, Mode, ProfileSpec};
use lqd_core::exec::Exec;
use lqd_core::geometry::{self, HeisenbergCovector, HeisenbergWeight};
use lqd_core::grid::{uniform, GridSpec};
use lqd_core::linalg::{diag, Mat};
use lqd_core::lq::LqProblem;
use lqd_core::sampling::{random_diagram, random_normal_matrix, trial_rng};
use lqd_core::YoungDiagram;

const SEED: u64 = 20240611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn closed_form_agreement() -> Outcome {
    let start = Instant::now();
    let grid = uniform(0.01, 1.0, 200);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &n in &[1usize, 2, 3, 5] {
        for &k in &[-4.0, -1.0, 0.0, 1.0, 9.0] {
            let y = YoungDiagram::from_rows(&vec![1; n]).unwrap();
            let p = LqProblem::from_diagram(&y, Mat::identity(n, n) * k).unwrap();
            let det = p.beta_from_determinant(&grid).unwrap();
            for (t, b) in grid.iter().zip(&det.values) {
                worst = worst.max(rel(*b, beta_riemannian(k, n, *t).unwrap()));
            }
            cases += 1;
        }
    }
    let ks = [-4.0, -1.0, 0.0, 1.0, 4.0];
    for &k1 in &ks {
        for &k2 in &ks {
            let p = LqProblem::single_row(&[k1, k2]).unwrap();
            if p.first_conjugate_time(1.0).unwrap().is_some() {
                continue;
            }
            let det = p.beta_from_determinant(&grid).unwrap();
            for (t, b) in grid.iter().zip(&det.values) {
                worst = worst.max(rel(*b, beta_two_column(k1, k2, *t).unwrap()));
            }
            cases += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-8 && secs < 30.0, format!("{cases} families, max rel err {worst:.2e}, {secs:.1}s"))
}

fn homogeneity() -> Outcome {
    let grid = uniform(0.01, 1.0, 50);
    let mut worst = 0.0f64;
    let (mut found, mut trial) = (0, 0u64);
    while found < 50 {
        let mut rng = trial_rng(SEED, trial);
        trial += 1;
        let n = 1 + (trial as usize % 4);
        let y = random_diagram(n, &mut rng);
        let q = random_normal_matrix(&y, 1.0, &mut rng);
        let p = LqProblem::from_diagram(&y, q).unwrap();
        // εQ must stay conjugate-free for the largest ε
        let Ok(hot) = p.with_scaled_q(10.0) else { continue };
        if hot.first_conjugate_time(1.0).unwrap().is_some() || p.first_conjugate_time(1.0).unwrap().is_some() {
            continue;
        }
        for eps in [0.5, 2.0, 10.0] {
            worst = worst.max(p.homogeneity_check(eps, &grid).unwrap());
        }
        found += 1;
    }
    outcome(worst <= 1e-8, format!("50 problems ({trial} draws), max deviation {worst:.2e}"))
}

fn conjugate_times() -> Outcome {
    let mut worst = 0.0f64;
    for k in [0.25, 1.0, 4.0, 9.0] {
        let y = YoungDiagram::from_rows(&[1]).unwrap();
        let p = LqProblem::from_diagram(&y, diag(&[k])).unwrap();
        let t = p.first_conjugate_time(8.0).unwrap().unwrap();
        let exact = PI / f64::sqrt(k);
        worst = worst.max((t - exact).abs()).max((conjugate_time_single(k) - exact).abs());
    }
    let root = LqProblem::single_row(&[4.0, 0.0]).unwrap().first_conjugate_time(8.0).unwrap().unwrap();
    let bound = conjugate_time_two_column_bound(4.0, 0.0);
    let pass = worst <= 1e-8 && (root - PI).abs() <= 1e-8 && root <= bound + 1e-8;
    outcome(pass, format!("single max err {worst:.2e}, two-column root {root:.12} (bound {bound:.6})"))
}

fn g_inequality() -> Outcome {
    let r = check_g_bound(200.0, 100_000);
    let g0 = g_of_z(1e-6);
    outcome(r.max_g < 4.0 && g0 >= 4.0 - 1e-6, format!("max g = {:.9}, g(1e-6) = {g0:.9}", r.max_g))
}

fn riccati_comparison() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 1..=4 {
        let s = campaign::riccati_comparison_campaign(n, 200, SEED, 1e-6, Exec::default()).unwrap();
        pass &= s.verdict;
        parts.push(format!("n={n}: min eig {:.2e} ({} skipped)", s.worst, s.skipped));
    }
    outcome(pass, parts.join(", "))
}

fn resonant_monotone() -> Outcome {
    let grid = uniform(1e-4, 1.0, 10_000);
    let (mut worst_inc, mut worst_low) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in [0.0, 1.0, 4.0, 9.0, 16.0, 25.0] {
        let vals: Vec<f64> = grid.iter().map(|&t| beta_two_column_resonant(k, t).unwrap()).collect();
        let ratio: Vec<f64> = vals.iter().zip(&grid).map(|(b, t)| b / t.powi(4)).collect();
        worst_inc = worst_inc.max(comparison::max_increment(&ratio, comparison::Direction::NonIncreasing));
        worst_low = worst_low.min(ratio.iter().copied().fold(f64::INFINITY, f64::min) - 1.0);
    }
    outcome(
        worst_inc <= 1e-10 && worst_low >= -1e-12,
        format!("max increment {worst_inc:.2e}, min(β/t⁴) − 1 = {worst_low:.2e}"),
    )
}

fn heisenberg_exactness() -> Outcome {
    let grid = uniform(0.05, 1.0, 96);
    let mut worst = 0.0f64;
    for h0 in [0.0f64, 0.5, 1.0, 2.0, 4.0] {
        let lam = HeisenbergCovector::new(0.6, 0.8, h0).at([0.3, -0.2, 0.1]);
        let curve = geometry::heisenberg_distortion_direct(&lam, &grid, &HeisenbergWeight::None).unwrap();
        for (t, b) in grid.iter().zip(&curve.values) {
            worst = worst.max(rel(*b, t * beta_two_column_k2zero(h0 * h0, *t).unwrap()));
        }
    }
    let flat = HeisenbergCovector::new(1.0, 0.0, 0.0);
    let half = geometry::heisenberg_distortion_direct(&flat, &[0.5], &HeisenbergWeight::None).unwrap().values[0];
    let pass = worst <= 1e-4 && (half - 0.03125).abs() <= 1e-6;
    outcome(pass, format!("max rel err {worst:.2e}, β_0.5(h₀=0) = {half:.9}"))
}

fn mcp_verdicts() -> Outcome {
    let mut pass = true;
    let mut worst_inc = f64::NEG_INFINITY;
    for h0 in [0.0f64, 0.5, 1.0, 2.0, 4.0] {
        let task = ComparisonTask {
            mode: Mode::McpTwoColumn { kappa_a: 0.0, kappa_b: h0 * h0, kappa_c: 0.0 },
            profile: ProfileSpec::Heisenberg {
                p: [1.0, 0.0],
                h0,
                base: [0.0; 3],
                weight: HeisenbergWeight::None,
            },
            grid: GridSpec { t_min: 0.01, t_max: 1.0, points: 512 },
            tol: Some(1e-7),
        };
        let v = comparison::verify(&task).unwrap();
        pass &= v.verdict;
        worst_inc = worst_inc.max(v.max_increment);
    }
    let pairs = campaign::weighted_heisenberg_pairs(20, SEED, Exec::default()).unwrap();
    let pm = pairs.iter().map(|p| p.power_margin).fold(f64::INFINITY, f64::min);
    let sm = pairs.iter().map(|p| p.shift_margin).fold(f64::INFINITY, f64::min);
    pass &= pm >= -1e-9 && sm >= -1e-9;
    outcome(
        pass,
        format!("β/t⁵ max increment {worst_inc:.2e}; 20 weighted pairs: min log-margin t^N₀ {pm:.2e}, shifted {sm:.2e}"),
    )
}

fn three_sasakian_threshold() -> Outcome {
    let k = -(13.0 + 2.0 * 70f64.sqrt()) / 3.0;
    let flips = geometry::three_sasakian_mcp_condition(k + 1e-9) && !geometry::three_sasakian_mcp_condition(k - 1e-9);
    let stated = geometry::three_sasakian_mcp_condition(-9.0) && !geometry::three_sasakian_mcp_condition(-10.0);
    let at = (geometry::three_sasakian_threshold() - k).abs();
    outcome(flips && stated && at <= 1e-9, format!("threshold {:.9}, flip at ±1e-9: {flips}", k))
}

fn splitting_and_tracing() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for rows in [vec![2, 1], vec![2, 2, 1], vec![3, 1, 1]] {
        let y = YoungDiagram::from_rows(&rows).unwrap();
        let s = campaign::traced_campaign(&y, 20, SEED, 1e-6, Exec::default()).unwrap();
        pass &= s.max_splitting_defect <= 1e-10 && s.comparison.verdict;
        parts.push(format!(
            "{rows:?}: defect {:.1e}, min eig {:.2e} ({} skipped)",
            s.max_splitting_defect, s.comparison.worst, s.comparison.skipped
        ));
    }
    outcome(pass, parts.join(", "))
}

fn bakry_emery() -> Outcome {
    let covectors = [
        HeisenbergCovector::new(0.8, 0.3, 0.7).at([0.2, -0.1, 0.05]),
        HeisenbergCovector::new(-0.5, 0.9, -1.2).at([-0.3, 0.4, 0.2]),
        HeisenbergCovector::new(1.1, -0.2, 0.0).at([0.0, 0.0, 0.0]),
        HeisenbergCovector::new(0.3, 0.3, 2.0).at([0.5, 0.1, -0.4]),
    ];
    let cases = campaign::bakry_emery_cases(&covectors, &[4.0, 6.0, 10.0], Exec::default()).unwrap();
    let res = cases.iter().map(|c| c.residual).fold(f64::NEG_INFINITY, f64::max);
    let margin = cases.iter().map(|c| c.rhs_margin).fold(f64::INFINITY, f64::min);
    outcome(
        res <= 1e-5 && margin >= -1e-9,
        format!("{} profiles, max residual eig {res:.2e}, min β^(1/(N−1)) − RHS {margin:.2e}", cases.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("closed-form vs ODE agreement", closed_form_agreement),
        ("homogeneity", homogeneity),
        ("conjugate times", conjugate_times),
        ("g-inequality", g_inequality),
        ("Riccati comparison", riccati_comparison),
        ("resonant ratio monotone", resonant_monotone),
        ("Heisenberg exactness", heisenberg_exactness),
        ("MCP verdicts", mcp_verdicts),
        ("3-Sasakian threshold", three_sasakian_threshold),
        ("splitting and traced comparison", splitting_and_tracing),
        ("Bakry-Emery inequality", bakry_emery),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!("{tag} criterion {:>2} {name}: {} [{:.1}s]", i + 1, o.detail, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of 11 passed in {:.1}s", 11 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
