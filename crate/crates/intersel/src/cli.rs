//! Command-line interface: `select`, `rates`, `verify` and `simulate`.

use crate::criterion::{ComplexityConfig, ComplexityTable, Family};
use crate::design::DesignView;
use crate::error::{Error, Result};
use crate::harness::ExperimentConfig;
use crate::io::{format_f64, read_dataset, write_json, write_rate_scaling_csv};
use crate::model::HeredityCondition;
use crate::search::{
    select_exhaustive_in, select_stochastic_in, SelectionResult, DEFAULT_BUDGET_CAP,
};
use crate::spectral::{src_check, src_failure_witness, SrcMode, DEFAULT_SAMPLE_BUDGET};
use crate::verify::{binomial_ratio_bound, verify_packing_h1, verify_packing_h2};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "intersel",
    about = "Adaptive minimax sparse estimation with two-way interactions",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Select a model by minimizing the complexity-penalized criterion.
    Select(SelectArgs),
    /// Report minimax rates, scenario and improvement ratios.
    Rates(RatesArgs),
    /// Verify combinatorial and spectral conditions; exits nonzero on any
    /// failed bound.
    Verify(VerifyArgs),
    /// Run a seeded Monte-Carlo rate-scaling experiment.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeredityArg {
    /// Search the union of strong-, weak- and no-heredity families.
    Auto,
    Strong,
    Weak,
    None,
}

impl HeredityArg {
    fn families(self) -> Vec<Family> {
        match self {
            HeredityArg::Auto => Family::HEREDITY.to_vec(),
            HeredityArg::Strong => vec![Family::Strong],
            HeredityArg::Weak => vec![Family::Weak],
            HeredityArg::None => vec![Family::None],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Stochastic,
}

#[derive(Args)]
pub struct SelectArgs {
    /// CSV with predictors; y is the last column unless --y is given.
    #[arg(long)]
    pub data: PathBuf,
    /// Optional single-column CSV holding the response.
    #[arg(long)]
    pub y: Option<PathBuf>,
    /// Known noise variance.
    #[arg(long)]
    pub sigma2: f64,
    /// Penalty multiplier; defaults to the theoretical bound 5.1/log 2.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum, default_value_t = HeredityArg::Auto)]
    pub heredity: HeredityArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
    pub mode: ModeArg,
    /// Moves per restart in stochastic mode.
    #[arg(long, default_value_t = 2000)]
    pub iters: u64,
    #[arg(long, default_value_t = 3)]
    pub restarts: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cap on candidates scored by exhaustive mode.
    #[arg(long, default_value_t = DEFAULT_BUDGET_CAP)]
    pub budget_cap: u128,
    /// Output JSON path (model indices are 1-based).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct RatesArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub r1: usize,
    #[arg(long)]
    pub r2: usize,
    /// Quadratic-effect sparsity; adds quadratic-model rates when given.
    #[arg(long)]
    pub r3: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Output JSON path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional CSV grid file with header n,p,r1,r2 to sweep.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// CSV output for the sweep (required with --grid).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[command(subcommand)]
    pub which: VerifyCommand,
}

#[derive(Subcommand)]
pub enum VerifyCommand {
    /// Greedy Hamming packings against the lower-bound lemmas.
    Packing {
        /// Largest r1 for the interaction-block grid.
        #[arg(long, default_value_t = 7)]
        r1_max: usize,
        /// Largest p for the main-block grid.
        #[arg(long, default_value_t = 12)]
        p_max: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ratio bound C(A,B)/C(A,B/2) >= ((A-B/2)/B)^(B/2) on a grid.
    Binomial {
        #[arg(long, default_value_t = 60)]
        a_max: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summability of exp(-C) over the model complexities.
    Kraft {
        #[arg(long, default_value_t = 3)]
        p_min: usize,
        #[arg(long, default_value_t = 8)]
        p_max: usize,
        /// Comma-separated sample sizes.
        #[arg(long, value_delimiter = ',', default_values_t = vec![10, 20, 50])]
        n_grid: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sparse Riesz condition scan on a dataset.
    Src {
        /// CSV with predictor columns only.
        #[arg(long)]
        data: PathBuf,
        /// Rescale columns to norm sqrt(n) before scanning.
        #[arg(long)]
        normalize: bool,
        #[arg(long, default_value_t = 1)]
        l1: usize,
        #[arg(long, default_value_t = 1)]
        l2: usize,
        #[arg(long, default_value_t = 0)]
        l3: usize,
        /// Include quadratic columns in the scan.
        #[arg(long)]
        quadratic: bool,
        #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
        mode: ModeArg,
        #[arg(long, default_value_t = DEFAULT_SAMPLE_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Required lower spectral bound; failure exits nonzero.
        #[arg(long)]
        b1: Option<f64>,
        /// Required upper spectral bound; failure exits nonzero.
        #[arg(long)]
        b2: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Experiment configuration JSON (ExperimentConfig).
    #[arg(long)]
    pub config: PathBuf,
    /// Redraw X each replication instead of fixing it per cell.
    #[arg(long)]
    pub redraw_design: bool,
    /// Output CSV; a JSON sidecar <out>.config.json records the config.
    #[arg(long)]
    pub out: PathBuf,
}

/// Runs a parsed command. Returns the process exit code: 0 on success, 1
/// when a verified bound fails.
pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Select(a) => run_select(a),
        Command::Rates(a) => run_rates(a),
        Command::Verify(a) => run_verify(a.which),
        Command::Simulate(a) => run_simulate(a),
    }
}

fn run_select(a: SelectArgs) -> Result<u8> {
    let data = read_dataset(&a.data, a.y.as_deref(), a.sigma2)?;
    let view = DesignView::new(&data);
    let mut config = ComplexityConfig::new(data.p(), data.n());
    let table = match a.lambda {
        Some(l) => {
            config.lambda = l;
            ComplexityTable::new_unchecked_lambda(config)?
        }
        None => ComplexityTable::new(config)?,
    };
    let families = a.heredity.families();
    let result: SelectionResult = match a.mode {
        ModeArg::Exhaustive => select_exhaustive_in(&view, &table, a.budget_cap, &families)?,
        ModeArg::Stochastic => {
            select_stochastic_in(&view, &table, a.iters, a.restarts, a.seed, &families)?
        }
    };
    write_json(&a.out, &result)?;
    Ok(0)
}

fn run_rates(a: RatesArgs) -> Result<u8> {
    let report = crate::rates::rate_report(a.n, a.p, a.r1, a.r2, a.sigma2)?;
    let payload = match a.r3 {
        Some(r3) => {
            let quad: Vec<(String, f64)> = HeredityCondition::ALL
                .iter()
                .map(|&h| {
                    crate::rates::minimax_rate_quadratic(h, a.n, a.p, a.r1, a.r2, r3, a.sigma2)
                        .map(|v| (h.to_string(), v))
                })
                .collect::<Result<_>>()?;
            serde_json::json!({ "report": report, "quadratic_rates": quad })
        }
        None => serde_json::to_value(&report)?,
    };
    match &a.out {
        Some(path) => write_json(path, &payload)?,
        None => println!("{}", serde_json::to_string_pretty(&payload)?),
    }
    if let Some(grid_path) = &a.grid {
        let csv_path = a
            .csv
            .as_ref()
            .ok_or_else(|| Error::Domain("--grid requires --csv for the sweep output".into()))?;
        let grid = crate::io::read_matrix_csv(grid_path)?;
        if grid.ncols() != 4 {
            return Err(Error::Domain("grid file needs columns n,p,r1,r2".into()));
        }
        let mut w = csv::Writer::from_path(csv_path)?;
        w.write_record([
            "n", "p", "r1", "r2", "rate_strong", "rate_weak", "rate_none", "scenario",
        ])?;
        for i in 0..grid.nrows() {
            let (n, p, r1, r2) = (
                grid[(i, 0)] as usize,
                grid[(i, 1)] as usize,
                grid[(i, 2)] as usize,
                grid[(i, 3)] as usize,
            );
            let rep = crate::rates::rate_report(n, p, r1, r2, a.sigma2)?;
            w.write_record([
                n.to_string(),
                p.to_string(),
                r1.to_string(),
                r2.to_string(),
                format_f64(rep.rate_strong),
                format_f64(rep.rate_weak),
                format_f64(rep.rate_none),
                rep.scenario.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(0)
}

fn run_verify(cmd: VerifyCommand) -> Result<u8> {
    match cmd {
        VerifyCommand::Packing { r1_max, p_max, out } => {
            let mut w = csv::Writer::from_path(&out)?;
            w.write_record(["block", "r1", "r2_or_p", "bound", "achieved", "min_hamming", "ok"])?;
            let mut all_ok = true;
            for r1 in 2..=r1_max {
                let slots = r1 * (r1 - 1) / 2;
                for r2 in 1..=(2 * slots / 3) {
                    let r = verify_packing_h1(r1, r2)?;
                    all_ok &= r.satisfied;
                    w.write_record([
                        "interaction".to_string(),
                        r1.to_string(),
                        r2.to_string(),
                        format_f64(r.lower_bound),
                        r.points.len().to_string(),
                        r.min_pairwise_hamming.to_string(),
                        r.satisfied.to_string(),
                    ])?;
                }
            }
            for p in 2..=p_max {
                for r1 in 1..=(2 * p / 3) {
                    let r = verify_packing_h2(r1, p)?;
                    all_ok &= r.satisfied;
                    w.write_record([
                        "main".to_string(),
                        r1.to_string(),
                        p.to_string(),
                        format_f64(r.lower_bound),
                        r.points.len().to_string(),
                        r.min_pairwise_hamming.to_string(),
                        r.satisfied.to_string(),
                    ])?;
                }
            }
            w.flush()?;
            Ok(if all_ok { 0 } else { 1 })
        }
        VerifyCommand::Binomial { a_max, out } => {
            let mut w = csv::Writer::from_path(&out)?;
            w.write_record(["a", "b", "lhs", "rhs", "ok"])?;
            let mut all_ok = true;
            for a in 0..=a_max {
                for b in (0..=(2 * a / 3)).step_by(2) {
                    let r = binomial_ratio_bound(a, b)?;
                    all_ok &= r.ok;
                    w.write_record([
                        a.to_string(),
                        b.to_string(),
                        format_f64(r.lhs),
                        format_f64(r.rhs),
                        r.ok.to_string(),
                    ])?;
                }
            }
            w.flush()?;
            Ok(if all_ok { 0 } else { 1 })
        }
        VerifyCommand::Kraft { p_min, p_max, n_grid, out } => {
            if p_min < 1 || p_min > p_max {
                return Err(Error::Domain("need 1 <= p_min <= p_max".into()));
            }
            let mut w = csv::Writer::from_path(&out)?;
            w.write_record(["p", "n", "sum", "renorm", "ok"])?;
            let mut all_ok = true;
            for p in p_min..=p_max {
                for &n in &n_grid {
                    let table = ComplexityTable::new(ComplexityConfig::new(p, n))?;
                    let report = table.kraft_check();
                    all_ok &= report.ok;
                    w.write_record([
                        p.to_string(),
                        n.to_string(),
                        format_f64(report.sum),
                        format_f64(table.renorm),
                        report.ok.to_string(),
                    ])?;
                }
            }
            w.flush()?;
            Ok(if all_ok { 0 } else { 1 })
        }
        VerifyCommand::Src {
            data,
            normalize,
            l1,
            l2,
            l3,
            quadratic,
            mode,
            budget,
            seed,
            b1,
            b2,
            out,
        } => {
            let x = crate::io::read_matrix_csv(&data)?;
            let n = x.nrows();
            let mut ds = crate::design::Dataset::new(x, nalgebra::DVector::zeros(n), 1.0)?;
            if normalize {
                ds.normalize_columns();
            }
            let view = if quadratic {
                DesignView::with_quadratic(&ds)
            } else {
                DesignView::new(&ds)
            };
            let src_mode = match mode {
                ModeArg::Exhaustive => SrcMode::Exhaustive,
                ModeArg::Stochastic => SrcMode::Sampled,
            };
            let cert = src_check(&view, l1, l2, l3, src_mode, budget, seed)?;
            let witness = match b1 {
                Some(b1v) if normalize => src_failure_witness(&view, b1v)?,
                _ => None,
            };
            let lower_ok = b1.map_or(true, |v| cert.b1_hat >= v);
            let upper_ok = b2.map_or(true, |v| cert.b2_hat <= v);
            let mut w = csv::Writer::from_path(&out)?;
            w.write_record([
                "l1",
                "l2",
                "l3",
                "b1_hat",
                "b2_hat",
                "supports_tested",
                "mode",
                "lower_ok",
                "upper_ok",
                "witness_pair",
            ])?;
            w.write_record([
                l1.to_string(),
                l2.to_string(),
                l3.to_string(),
                format_f64(cert.b1_hat),
                format_f64(cert.b2_hat),
                cert.supports_tested.to_string(),
                format!("{src_mode:?}").to_lowercase(),
                lower_ok.to_string(),
                upper_ok.to_string(),
                witness.map_or(String::new(), |(i, j)| format!("{i}-{j}")),
            ])?;
            w.flush()?;
            Ok(if lower_ok && upper_ok { 0 } else { 1 })
        }
    }
}

fn run_simulate(a: SimulateArgs) -> Result<u8> {
    let text = std::fs::read_to_string(&a.config)?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
    if a.redraw_design {
        cfg.redraw_design = true;
    }
    cfg.validate()?;
    let rows = crate::harness::rate_scaling_experiment(&cfg)?;
    write_rate_scaling_csv(&a.out, &rows)?;
    let sidecar = a.out.with_extension("config.json");
    write_json(&sidecar, &cfg)?;
    Ok(0)
}
