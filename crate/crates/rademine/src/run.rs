//! Execution of a single job.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use rademine_core::bounds::{
    centralize_mcera, massart_era, sd_bound_1mcera, sd_bound_from_era, sd_bound_thm33, sd_bound_variance,
};
use rademine_core::engine::get_n_mcera_traced;
use rademine_core::hybrid::Truncation;
use rademine_core::oracle::{brute_mcera, brute_shifted_mcera, check_bound_chain};
use rademine_core::tfp::{tfp_baseline_massart, tfp_r};
use rademine_core::{
    get_n_mcera, BoundParams, BoundReport, DatasetStats, EngineConfig, HybridConfig, Order, RademacherMatrix,
    SampleDataset, TfpConfig, TfpResult,
};

use crate::error::AppError;
use crate::record::RunRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Hybrid,
    Tfp,
    Oracle,
    Stats,
}

impl Mode {
    pub fn token(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Hybrid => "hybrid",
            Mode::Tfp => "tfp",
            Mode::Oracle => "oracle",
            Mode::Stats => "stats",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundChoice {
    Thm33,
    Variance,
    OneMcera,
    Massart,
}

/// Everything shared by the jobs of one invocation.
#[derive(Debug, Clone)]
pub struct Settings {
    pub dataset_id: String,
    pub mode: Mode,
    pub bound: BoundChoice,
    pub n: usize,
    pub delta: f64,
    pub theta: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub max_nodes: Option<usize>,
    pub order: Order,
    pub centralize: bool,
    pub include_root: bool,
    pub timing: bool,
}

/// One unit of work: a sample size (`None` for the whole file) and a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Job {
    pub sample_size: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Details {
    Stats(DatasetStats),
    Bound(Box<BoundReport>),
    Tfp(TfpResult),
    Oracle(OracleSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutput {
    #[serde(flatten)]
    pub record: RunRecord,
    pub details: Details,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub checks: Vec<OracleCheck>,
}

impl OracleSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Seed of the sign matrix, decorrelated from the resampling seed.
pub fn sign_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

pub fn execute(source: Option<&SampleDataset>, settings: &Settings, job: Job) -> Result<RunOutput, AppError> {
    let start = Instant::now();
    let sampled;
    let ds = match (source, job.sample_size) {
        (Some(src), Some(size)) => {
            sampled = src.sample_with_replacement(size, job.seed)?;
            Some(&sampled)
        }
        (src, _) => src,
    };
    let mut record = RunRecord {
        dataset: settings.dataset_id.clone(),
        m: ds.map_or(0, SampleDataset::m),
        n: settings.n,
        delta: settings.delta,
        seed: job.seed,
        mode: settings.mode.token().into(),
        bound_kind: None,
        mcera: None,
        epsilon: None,
        nodes_explored: None,
        elapsed_ms: None,
        beta: None,
        theta: None,
        pattern_count: None,
    };
    let details = match (settings.mode, ds) {
        (Mode::Oracle, ds) => Details::Oracle(oracle_suite(ds, job.seed, settings.n)?),
        (_, None) => return Err(AppError::Usage("--dataset is required for this mode".into())),
        (Mode::Stats, Some(ds)) => Details::Stats(ds.stats()),
        (Mode::Exact, Some(ds)) => {
            let rep = exact(ds, settings, job.seed, &mut record)?;
            Details::Bound(Box::new(rep))
        }
        (Mode::Hybrid, Some(ds)) => {
            let rep = hybrid(ds, settings, job.seed)?;
            let h = rep.hybrid.as_ref().expect("hybrid details");
            record.nodes_explored = Some(h.nodes_explored);
            record.beta = Some(h.beta_effective);
            fill_bound(&mut record, &rep);
            Details::Bound(Box::new(rep))
        }
        (Mode::Tfp, Some(ds)) => {
            let theta = settings.theta.ok_or_else(|| AppError::Usage("tfp mode needs --theta".into()))?;
            let cfg = TfpConfig {
                order: settings.order,
                ..TfpConfig::new(theta, settings.delta, settings.n, sign_seed(job.seed))?
            };
            let res = match settings.bound {
                BoundChoice::Massart => tfp_baseline_massart(ds, &cfg)?,
                _ => tfp_r(ds, &cfg)?,
            };
            record.bound_kind =
                Some(if settings.bound == BoundChoice::Massart { "massart_baseline" } else { "thm34_variance" }.into());
            record.epsilon = res.epsilon_trace.last().copied();
            record.theta = Some(theta);
            record.pattern_count = Some(res.patterns.len());
            if !res.nodes_trace.is_empty() {
                record.nodes_explored = Some(res.nodes_trace.iter().sum());
            }
            Details::Tfp(res)
        }
    };
    if settings.timing {
        record.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(RunOutput { record, details })
}

fn fill_bound(record: &mut RunRecord, rep: &BoundReport) {
    record.bound_kind = Some(rep.bound_kind.token().into());
    record.mcera = Some(rep.mcera_used);
    record.epsilon = Some(rep.epsilon);
}

fn exact(ds: &SampleDataset, s: &Settings, seed: u64, record: &mut RunRecord) -> Result<BoundReport, AppError> {
    let m = ds.m();
    let params = BoundParams::binary(m, s.n, s.delta, s.centralize)?;
    if s.bound == BoundChoice::Massart {
        let rep = sd_bound_from_era(massart_era(ds), &params);
        fill_bound(record, &rep);
        return Ok(rep);
    }
    let mat = RademacherMatrix::draw(m, s.n, sign_seed(seed))?;
    let cfg = EngineConfig { order: s.order, include_root_in_sup: s.include_root, ..Default::default() };
    let res = get_n_mcera(ds, &mat, &cfg)?;
    let avg = params.mcera_of(&res);
    let rep = match s.bound {
        BoundChoice::Thm33 => sd_bound_thm33(avg, &params),
        // any [0, 1]-valued function has variance at most 1/4
        BoundChoice::Variance => sd_bound_variance(avg, 0.25, &params),
        BoundChoice::OneMcera => sd_bound_1mcera(res.centralized_mcera, 1.0, m, s.delta),
        BoundChoice::Massart => unreachable!(),
    };
    record.nodes_explored = Some(res.nodes_explored);
    fill_bound(record, &rep);
    Ok(rep)
}

fn hybrid(ds: &SampleDataset, s: &Settings, seed: u64) -> Result<BoundReport, AppError> {
    let truncation = match (s.beta, s.max_nodes) {
        (Some(b), None) => Truncation::Beta(b),
        (None, Some(k)) => Truncation::MaxNodes(k),
        _ => return Err(AppError::Usage("hybrid mode needs exactly one of --beta and --max-nodes".into())),
    };
    let gamma = s.gamma.unwrap_or(s.delta / 10.0);
    let cfg = HybridConfig { truncation, gamma, delta: s.delta, order: s.order, centralize: s.centralize };
    let mat = RademacherMatrix::draw(ds.m(), s.n, sign_seed(seed))?;
    Ok(rademine_core::hybrid_sd_bound(ds, &mat, &cfg)?)
}

/// Instances the oracle suite draws when no dataset is given.
pub const ORACLE_INSTANCES: usize = 200;

/// Random small instance: `m ∈ [1, 30]`, alphabet `∈ [1, 10]`, density
/// `∈ {0.2, 0.5, 0.8}`, `n ∈ [1, 5]`.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (SampleDataset, RademacherMatrix) {
    let m = rng.gen_range(1..=30);
    let k = rng.gen_range(1..=10u32);
    let density = [0.2, 0.5, 0.8][rng.gen_range(0..3)];
    let rows = (0..m).map(|_| (0..k).filter(|_| rng.gen_bool(density)).collect()).collect();
    let n = rng.gen_range(1..=5);
    let ds = SampleDataset::with_alphabet(rows, (0..k).collect());
    let mat = RademacherMatrix::draw(m, n, rng.gen()).expect("positive dimensions");
    (ds, mat)
}

/// Engine against enumeration on the stock random corpus (and on `extra` when
/// its alphabet is small enough), the centralization identity, and the bound
/// chain on every engine trace.
pub fn oracle_suite(extra: Option<&SampleDataset>, seed: u64, n: usize) -> Result<OracleSummary, AppError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases: Vec<(SampleDataset, RademacherMatrix)> =
        (0..ORACLE_INSTANCES).map(|_| random_instance(&mut rng)).collect();
    if let Some(ds) = extra {
        if ds.alphabet().len() <= rademine_core::oracle::BRUTE_ALPHABET_CAP && !ds.is_empty() {
            cases.push((ds.clone(), RademacherMatrix::draw(ds.m(), n, sign_seed(seed))?));
        }
    }
    let mut exact_ok = true;
    let mut central_ok = true;
    let mut chain_ok = true;
    for (ds, mat) in &cases {
        for include_root in [false, true] {
            let want = brute_mcera(ds, mat, include_root)?;
            for order in [Order::SupportDesc, Order::Bfs, Order::Dfs] {
                let cfg = EngineConfig { order, include_root_in_sup: include_root, ..Default::default() };
                let (res, trace) = get_n_mcera_traced(ds, mat, &cfg)?;
                exact_ok &= res.nu_raw == want;
                chain_ok &= check_bound_chain(&trace);
            }
            if ds.alphabet().is_empty() && !include_root {
                continue;
            }
            // 2nm·centralized average against the shifted enumeration, in integers
            let shifted: i64 = brute_shifted_mcera(ds, mat, include_root)?.iter().sum();
            let nu: i64 = want.iter().sum();
            let rs: i64 = mat.row_sums().iter().sum();
            central_ok &= 2 * nu - rs == shifted;
            let (n, m) = (mat.n(), mat.m());
            let c = centralize_mcera(&want, mat.row_sums(), 1.0, n, m);
            let direct = shifted as f64 / (2 * n * m) as f64;
            central_ok &= (c - direct).abs() <= 1e-12 * direct.abs().max(1.0);
        }
    }
    let count = cases.len();
    Ok(OracleSummary {
        checks: vec![
            OracleCheck { name: "engine_equals_enumeration".into(), passed: exact_ok, cases: count },
            OracleCheck { name: "centralization_identity".into(), passed: central_ok, cases: count },
            OracleCheck { name: "bound_chain".into(), passed: chain_ok, cases: count },
        ],
    })
}
