//! `lqd`: distortion tables, comparison verdicts, normal-form validation and
//! seeded campaigns.
//!
//! Exit codes: 0 success, 1 matrix not normal, 2 parse or shape error,
//! 3 conjugate point, 4 hypothesis violated, 5 monotonicity violated.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use lqd_core::campaign::{self, CampaignSummary};
use lqd_core::closed_forms::{self, conjugate_time_single};
use lqd_core::comparison::{self, ComparisonTask, MonotonicityVerdict};
use lqd_core::exec::Exec;
use lqd_core::geometry::HeisenbergCovector;
use lqd_core::grid::GridSpec;
use lqd_core::linalg::{from_rows, Mat};
use lqd_core::lq::{LqProblem, Method};
use lqd_core::young::{is_zelenko_li_normal, YoungDiagram};
use lqd_core::{tolerances, LqdError};

#[derive(Parser, Debug)]
#[command(name = "lqd", version, about = "Distortion coefficients of linear-quadratic model problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON file, or inline JSON starting with `{`.
    #[arg(long, global = true)]
    input: Option<String>,
    /// Write here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Number of grid points (overrides the input).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for campaigns.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Tabulate β_t for a model family or explicit (A, B, Q).
    Beta,
    /// Verify a comparison theorem on a profile.
    Verify,
    /// Check the normal-form conditions of a curvature matrix.
    ValidateNormal,
    /// Run a seeded randomized campaign.
    Campaign,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
enum BetaSpec {
    Riemannian {
        kappa: f64,
        n: usize,
    },
    TwoColumn {
        kappa1: f64,
        kappa2: f64,
    },
    TwoColumnResonant {
        kappa1: f64,
    },
    Diagram {
        diagram: YoungDiagram,
        q: Vec<Vec<f64>>,
    },
    Problem {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        q: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Deserialize)]
struct BetaInput {
    #[serde(flatten)]
    spec: BetaSpec,
    #[serde(default)]
    grid: Option<GridSpec>,
}

#[derive(Debug, Serialize)]
struct BetaTable {
    family: String,
    method: Method,
    times: Vec<f64>,
    beta: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct NormalInput {
    diagram: YoungDiagram,
    r: Vec<Vec<f64>>,
    #[serde(default)]
    tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "campaign", rename_all = "kebab-case")]
enum CampaignSpec {
    RiccatiComparison {
        n: usize,
        trials: usize,
    },
    Traced {
        diagram: YoungDiagram,
        trials: usize,
    },
    WeightedHeisenberg {
        pairs: usize,
    },
    BakryEmery {
        covectors: Vec<HeisenbergCovector>,
        n_params: Vec<f64>,
    },
}

#[derive(Debug, Serialize)]
struct CampaignReport<T: Serialize> {
    campaign: &'static str,
    seed: u64,
    verdict: bool,
    result: T,
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<LqdError> for Failure {
    fn from(e: LqdError) -> Self {
        let code = match e {
            LqdError::ConjugatePoint { .. } | LqdError::Pole { .. } | LqdError::SingularN { .. } => 3,
            LqdError::HypothesisViolated(_) => 4,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn read_input<T: for<'de> Deserialize<'de>>(input: &Option<String>) -> Result<T, Failure> {
    let raw = input.as_deref().ok_or_else(|| usage("--input is required"))?;
    let text = if raw.trim_start().starts_with('{') {
        raw.to_string()
    } else {
        std::fs::read_to_string(raw).map_err(|e| usage(format!("cannot read {raw}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| usage(format!("cannot parse input: {e}")))
}

fn matrix(rows: &[Vec<f64>]) -> Result<Mat, Failure> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(usage("matrix must be square and non-empty"));
    }
    Ok(from_rows(rows))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn beta_table(cli: &Cli) -> Result<(BetaTable, Format), Failure> {
    let input: BetaInput = read_input(&cli.input)?;
    let mut spec = input.grid.unwrap_or_default();
    if let Some(points) = cli.grid {
        spec.points = points;
    }
    if !(spec.t_min > 0.0 && spec.t_min < spec.t_max && spec.t_max <= 1.0 && spec.points >= 2) {
        return Err(usage("grid must satisfy 0 < t_min < t_max ≤ 1 with at least 2 points"));
    }
    let grid = spec.nodes();
    let closed = |family: &str, f: &dyn Fn(f64) -> lqd_core::Result<f64>| -> Result<BetaTable, Failure> {
        let beta = grid.iter().map(|&t| f(t)).collect::<lqd_core::Result<Vec<_>>>()?;
        Ok(BetaTable { family: family.into(), method: Method::ClosedForm, times: grid.clone(), beta })
    };
    let two_column_conjugate = |k1: f64, k2: f64| -> Result<(), Failure> {
        match LqProblem::single_row(&[k1, k2])?.first_conjugate_time(1.0)? {
            Some(t) => Err(LqdError::ConjugatePoint { t }.into()),
            None => Ok(()),
        }
    };
    let table = match input.spec {
        BetaSpec::Riemannian { kappa, n } => {
            if n == 0 {
                return Err(usage("n must be positive"));
            }
            let tc = conjugate_time_single(kappa);
            if tc <= 1.0 {
                return Err(LqdError::ConjugatePoint { t: tc }.into());
            }
            closed("riemannian", &|t| closed_forms::beta_riemannian(kappa, n, t))?
        }
        BetaSpec::TwoColumn { kappa1, kappa2 } => {
            two_column_conjugate(kappa1, kappa2)?;
            closed("two-column", &|t| closed_forms::beta_two_column(kappa1, kappa2, t))?
        }
        BetaSpec::TwoColumnResonant { kappa1 } => {
            two_column_conjugate(kappa1, -kappa1 * kappa1 / 4.0)?;
            closed("two-column-resonant", &|t| closed_forms::beta_two_column_resonant(kappa1, t))?
        }
        BetaSpec::Diagram { diagram, q } => {
            let curve = LqProblem::from_diagram(&diagram, matrix(&q)?)?.beta_from_determinant(&grid)?;
            BetaTable { family: "diagram".into(), method: curve.method, times: curve.times, beta: curve.values }
        }
        BetaSpec::Problem { a, b, q } => {
            let p = LqProblem::new(matrix(&a)?, matrix(&b)?, matrix(&q)?)?;
            let curve = p.beta_from_determinant(&grid)?;
            BetaTable { family: "problem".into(), method: curve.method, times: curve.times, beta: curve.values }
        }
    };
    Ok((table, cli.format.unwrap_or(Format::Csv)))
}

fn cmd_beta(cli: &Cli) -> Result<String, Failure> {
    let (table, format) = beta_table(cli)?;
    Ok(match format {
        Format::Json => json(&table),
        Format::Csv => {
            let mut out = String::from("t,beta,method,family\n");
            for (t, b) in table.times.iter().zip(&table.beta) {
                writeln!(out, "{t},{b},{},{}", table.method.as_str(), table.family).unwrap();
            }
            out
        }
    })
}

fn cmd_verify(cli: &Cli) -> Result<(String, u8), Failure> {
    let mut task: ComparisonTask = read_input(&cli.input)?;
    if let Some(points) = cli.grid {
        task.grid.points = points;
    }
    if cli.tol.is_some() {
        task.tol = cli.tol;
    }
    let verdict: MonotonicityVerdict = comparison::verify(&task)?;
    let code = if verdict.verdict { 0 } else { 5 };
    let out = match cli.format.unwrap_or(Format::Json) {
        Format::Json => json(&MonotonicityVerdict { samples: None, ..verdict }),
        Format::Csv => {
            let s = verdict.samples.expect("verify keeps samples");
            let mut out = String::from("t,beta,model,ratio\n");
            for i in 0..s.times.len() {
                writeln!(out, "{},{},{},{}", s.times[i], s.beta[i], s.model[i], s.ratio[i]).unwrap();
            }
            out
        }
    };
    Ok((out, code))
}

fn cmd_validate_normal(cli: &Cli) -> Result<(String, u8), Failure> {
    let input: NormalInput = read_input(&cli.input)?;
    let tol = cli.tol.or(input.tol).unwrap_or(tolerances::NORMAL_FORM);
    let report = is_zelenko_li_normal(&matrix(&input.r)?, &input.diagram, tol)?;
    let code = if report.normal { 0 } else { 1 };
    Ok((json(&report), code))
}

fn report<T: Serialize>(name: &'static str, seed: u64, verdict: bool, result: T) -> (String, u8) {
    let code = if verdict { 0 } else { 5 };
    (json(&CampaignReport { campaign: name, seed, verdict, result }), code)
}

fn cmd_campaign(cli: &Cli) -> Result<(String, u8), Failure> {
    let spec: CampaignSpec = read_input(&cli.input)?;
    let exec = Exec::default();
    let seed = cli.seed;
    let tol = cli.tol.unwrap_or(1e-6);
    Ok(match spec {
        CampaignSpec::RiccatiComparison { n, trials } => {
            let s: CampaignSummary = campaign::riccati_comparison_campaign(n, trials, seed, tol, exec)?;
            report("riccati-comparison", seed, s.verdict, s)
        }
        CampaignSpec::Traced { diagram, trials } => {
            let s = campaign::traced_campaign(&diagram, trials, seed, tol, exec)?;
            report("traced", seed, s.comparison.verdict && s.max_splitting_defect <= 1e-10, s)
        }
        CampaignSpec::WeightedHeisenberg { pairs } => {
            let p = campaign::weighted_heisenberg_pairs(pairs, seed, exec)?;
            let ok = p.iter().all(|w| w.power_margin >= -tol && w.shift_margin >= -tol);
            report("weighted-heisenberg", seed, ok, p)
        }
        CampaignSpec::BakryEmery { covectors, n_params } => {
            let c = campaign::bakry_emery_cases(&covectors, &n_params, exec)?;
            let ok = c.iter().all(|c| c.residual <= 1e-5 && c.rhs_margin >= -tol);
            report("bakry-emery", seed, ok, c)
        }
    })
}

#[cfg(feature = "parallel")]
fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("LQD_THREADS") {
        let n: usize = v.parse().map_err(|_| usage(format!("LQD_THREADS={v} is not a count")))?;
        // a second initialization only happens in tests that reuse the process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads() -> Result<(), Failure> {
    Ok(())
}

fn run(cli: &Cli) -> Result<(String, u8), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Beta => cmd_beta(cli).map(|s| (s, 0)),
        Command::Verify => cmd_verify(cli),
        Command::ValidateNormal => cmd_validate_normal(cli),
        Command::Campaign => cmd_campaign(cli),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((out, code)) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, out).map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => {
                    print!("{out}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("lqd: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("lqd: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
