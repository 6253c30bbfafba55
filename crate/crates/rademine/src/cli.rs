//! Flag parsing and batch execution.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;

use rademine_core::{Order, SampleDataset};

use crate::error::AppError;
use crate::fimi;
use crate::record::{append_csv, to_json_line, write_csv};
use crate::run::{execute, BoundChoice, Job, Mode, RunOutput, Settings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Hybrid,
    Tfp,
    Oracle,
    Stats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundArg {
    Thm33,
    Variance,
    OneMcera,
    Massart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    Support,
    Bfs,
    Dfs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputArg {
    Json,
    Csv,
}

/// Supremum-deviation bounds and true frequent itemsets from Monte-Carlo
/// Rademacher averages.
#[derive(Debug, Parser)]
#[command(name = "rademine", version)]
pub struct Args {
    /// FIMI transaction file.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Resample this many transactions with replacement (default: use the file as is).
    #[arg(long, conflicts_with = "grid")]
    pub sample_size: Option<usize>,
    /// Log-spaced sample sizes `lo:hi:points`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Number of sign vectors.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub bound: Option<BoundArg>,
    /// Minimum true frequency for tfp mode.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Shorthand for `--mode tfp --theta THETA`.
    #[arg(long, value_name = "THETA", conflicts_with_all = ["theta", "mode"])]
    pub tfp: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub max_nodes: Option<usize>,
    #[arg(long, value_enum, default_value = "support")]
    pub order: OrderArg,
    /// Shift the family by -1/2 before bounding.
    #[arg(long, value_enum)]
    pub centralize: Option<Switch>,
    /// Let the empty itemset take part in the suprema.
    #[arg(long, value_enum)]
    pub include_root: Option<Switch>,
    #[arg(long, value_enum, default_value = "json")]
    pub output: OutputArg,
    /// Independent runs with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    pub repeat: u64,
    /// Append CSV rows to this file (header written only for a new file).
    #[arg(long)]
    pub append: Option<PathBuf>,
    /// Fill elapsed_ms (makes output time-dependent).
    #[arg(long)]
    pub timing: bool,
}

fn usage(msg: impl Into<String>) -> AppError {
    AppError::Usage(msg.into())
}

/// Validated plan for one invocation.
#[derive(Debug, Clone)]
pub struct Plan {
    pub dataset: Option<PathBuf>,
    pub settings: Settings,
    pub jobs: Vec<Job>,
    pub output: OutputArg,
    pub append: Option<PathBuf>,
}

impl Args {
    pub fn plan(&self) -> Result<Plan, AppError> {
        let (mode, theta) = match (self.tfp, self.mode) {
            (Some(t), _) => (Mode::Tfp, Some(t)),
            (None, Some(m)) => (map_mode(m), self.theta),
            (None, None) => return Err(usage("one of --mode or --tfp is required")),
        };
        if self.dataset.is_none() && mode != Mode::Oracle {
            return Err(usage("--dataset is required unless --mode oracle"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(usage("--delta must lie in (0, 1)"));
        }
        if self.n == 0 {
            return Err(usage("--n must be at least 1"));
        }
        if self.repeat == 0 {
            return Err(usage("--repeat must be at least 1"));
        }
        if mode != Mode::Hybrid && (self.beta.is_some() || self.gamma.is_some() || self.max_nodes.is_some()) {
            return Err(usage("--beta, --gamma and --max-nodes apply to --mode hybrid only"));
        }
        if mode == Mode::Hybrid && self.beta.is_some() == self.max_nodes.is_some() {
            return Err(usage("--mode hybrid needs exactly one of --beta and --max-nodes"));
        }
        if mode != Mode::Tfp && theta.is_some() {
            return Err(usage("--theta applies to --mode tfp only"));
        }
        if mode == Mode::Tfp && theta.is_none() {
            return Err(usage("--mode tfp needs --theta"));
        }
        if !matches!(mode, Mode::Exact | Mode::Oracle) && self.include_root.is_some() {
            return Err(usage("--include-root applies to --mode exact only"));
        }
        let bound = match (mode, self.bound) {
            (Mode::Stats | Mode::Oracle, Some(_)) => return Err(usage("--bound does not apply to this mode")),
            (Mode::Hybrid, Some(b)) if b != BoundArg::Thm33 => {
                return Err(usage("--mode hybrid supports --bound thm33 only"))
            }
            (Mode::Tfp, Some(b)) if !matches!(b, BoundArg::Variance | BoundArg::Massart) => {
                return Err(usage("--mode tfp supports --bound variance or massart"))
            }
            (Mode::Tfp, None) => BoundChoice::Variance,
            (_, b) => map_bound(b.unwrap_or(BoundArg::Thm33)),
        };
        if bound == BoundChoice::OneMcera {
            if self.n != 1 {
                return Err(usage("--bound one-mcera needs --n 1"));
            }
            if self.centralize == Some(Switch::Off) {
                return Err(usage("--bound one-mcera is defined on the centralized family"));
            }
        }
        if mode == Mode::Tfp && self.centralize == Some(Switch::Off) {
            return Err(usage("--mode tfp always centralizes"));
        }
        let sizes: Vec<Option<usize>> = match (&self.grid, self.sample_size) {
            (Some(g), _) => parse_grid(g)?.into_iter().map(Some).collect(),
            (None, Some(0)) => return Err(usage("--sample-size must be positive")),
            (None, s) => vec![s],
        };
        let jobs = sizes
            .iter()
            .flat_map(|&size| (0..self.repeat).map(move |r| Job { sample_size: size, seed: self.seed.wrapping_add(r) }))
            .collect();
        if self.append.is_some() && self.output != OutputArg::Csv {
            return Err(usage("--append needs --output csv"));
        }
        let settings = Settings {
            dataset_id: self.dataset.as_deref().map_or_else(|| "stock".into(), fimi::dataset_id),
            mode,
            bound,
            n: self.n,
            delta: self.delta,
            theta,
            beta: self.beta,
            gamma: self.gamma,
            max_nodes: self.max_nodes,
            order: match self.order {
                OrderArg::Support => Order::SupportDesc,
                OrderArg::Bfs => Order::Bfs,
                OrderArg::Dfs => Order::Dfs,
            },
            centralize: self.centralize != Some(Switch::Off),
            include_root: self.include_root == Some(Switch::On),
            timing: self.timing,
        };
        Ok(Plan { dataset: self.dataset.clone(), settings, jobs, output: self.output, append: self.append.clone() })
    }
}

fn map_mode(m: ModeArg) -> Mode {
    match m {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Hybrid => Mode::Hybrid,
        ModeArg::Tfp => Mode::Tfp,
        ModeArg::Oracle => Mode::Oracle,
        ModeArg::Stats => Mode::Stats,
    }
}

fn map_bound(b: BoundArg) -> BoundChoice {
    match b {
        BoundArg::Thm33 => BoundChoice::Thm33,
        BoundArg::Variance => BoundChoice::Variance,
        BoundArg::OneMcera => BoundChoice::OneMcera,
        BoundArg::Massart => BoundChoice::Massart,
    }
}

/// `lo:hi:points` to `points` sizes equally spaced in log scale, rounded.
pub fn parse_grid(spec: &str) -> Result<Vec<usize>, AppError> {
    let bad = || usage(format!("--grid expects lo:hi:points, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, points] = parts[..] else { return Err(bad()) };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let points: usize = points.parse().map_err(|_| bad())?;
    if !(lo >= 1.0 && hi >= lo && points >= 1) || (points == 1 && hi != lo) {
        return Err(bad());
    }
    Ok((0..points)
        .map(|k| {
            let t = if points == 1 { 0.0 } else { k as f64 / (points - 1) as f64 };
            (lo.ln() + t * (hi.ln() - lo.ln())).exp().round() as usize
        })
        .collect())
}

pub fn execute_plan(plan: &Plan) -> Result<Vec<RunOutput>, AppError> {
    let source: Option<SampleDataset> = plan.dataset.as_deref().map(fimi::load).transpose()?;
    plan.jobs.par_iter().map(|&job| execute(source.as_ref(), &plan.settings, job)).collect()
}

/// Runs the command line `argv` (program name first), writing reports to
/// `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = e.exit_code();
            let _ = write!(if e.use_stderr() { err as &mut dyn Write } else { out as &mut dyn Write }, "{e}");
            return code;
        }
    };
    match run_args(&args, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "rademine: {e}");
            e.exit_code()
        }
    }
}

fn run_args(args: &Args, out: &mut impl Write) -> Result<i32, AppError> {
    let plan = args.plan()?;
    let outputs = execute_plan(&plan)?;
    match plan.output {
        OutputArg::Json => {
            for o in &outputs {
                out.write_all(to_json_line(o)?.as_bytes())?;
            }
        }
        OutputArg::Csv => {
            let records: Vec<_> = outputs.iter().map(|o| o.record.clone()).collect();
            match &plan.append {
                Some(path) => append_csv(path, &records)?,
                None => write_csv(&mut *out, &records, true)?,
            }
        }
    }
    out.flush()?;
    let failed = outputs.iter().any(|o| matches!(&o.details, crate::run::Details::Oracle(s) if !s.passed()));
    Ok(if failed { 1 } else { 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(args: &[&str]) -> Result<Plan, AppError> {
        let argv = std::iter::once("rademine").chain(args.iter().copied());
        Args::try_parse_from(argv).map_err(|e| usage(e.to_string()))?.plan()
    }

    #[test]
    fn grid_is_log_spaced() {
        assert_eq!(parse_grid("1000:100000:3").unwrap(), vec![1000, 10000, 100000]);
        assert_eq!(parse_grid("100:100:1").unwrap(), vec![100]);
        assert_eq!(parse_grid("1000:32000:6").unwrap(), vec![1000, 2000, 4000, 8000, 16000, 32000]);
        assert!(parse_grid("10:1:3").is_err());
        assert!(parse_grid("1:2").is_err());
    }

    #[test]
    fn invalid_combinations() {
        let d = ["--dataset", "x.dat"];
        let with = |extra: &[&'static str]| -> Vec<&'static str> { [&d[..], extra].concat() };
        assert!(plan(&with(&["--mode", "exact", "--beta", "0.1"])).is_err());
        assert!(plan(&with(&["--mode", "hybrid"])).is_err());
        assert!(plan(&with(&["--mode", "hybrid", "--beta", "0.1", "--max-nodes", "5"])).is_err());
        assert!(plan(&with(&["--mode", "exact", "--theta", "0.3"])).is_err());
        assert!(plan(&with(&["--mode", "tfp"])).is_err());
        assert!(plan(&with(&["--mode", "exact", "--bound", "one-mcera", "--n", "10"])).is_err());
        assert!(plan(&with(&["--mode", "hybrid", "--beta", "0.1", "--bound", "variance"])).is_err());
        assert!(plan(&with(&["--mode", "stats", "--bound", "thm33"])).is_err());
        assert!(plan(&with(&["--mode", "exact", "--append", "x.csv"])).is_err());
        assert!(plan(&["--mode", "exact"]).is_err());
        assert!(plan(&["--mode", "oracle"]).is_ok());
    }

    #[test]
    fn repeat_expands_seeds() {
        let p = plan(&["--dataset", "a/b/chess.dat", "--mode", "exact", "--seed", "5", "--repeat", "3"]).unwrap();
        let seeds: Vec<u64> = p.jobs.iter().map(|j| j.seed).collect();
        assert_eq!(seeds, vec![5, 6, 7]);
        assert_eq!(p.settings.dataset_id, "chess");
        let p = plan(&["--tfp", "0.3", "--dataset", "x.dat", "--grid", "10:1000:3", "--repeat", "2"]).unwrap();
        assert_eq!(p.jobs.len(), 6);
        assert_eq!(p.settings.mode, Mode::Tfp);
        assert_eq!(p.settings.theta, Some(0.3));
    }
}
