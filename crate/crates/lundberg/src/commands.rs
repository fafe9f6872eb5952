use lundberg_core::adjustment::AdjustmentResult;
use lundberg_core::bounds::{self, BoundsReport, CapPolicy};
use lundberg_core::embedding::{self, AtomicDistribution, CouplingReport, EmbeddingStats};
use lundberg_core::montecarlo::{self, MonteCarloEstimate};
use lundberg_core::{adjustment_coefficient, excess_constants, Distribution, ExcessConstants};
use serde::Serialize;

use crate::config::{Command, RunConfig};
use crate::error::CliError;
use crate::input::load_distribution;
use crate::output::{Cell, Output, Table};
use crate::runner::RayonRunner;

/// Half-width of every PASS/FAIL band, in standard errors.
pub const BAND_K: f64 = 3.0;
const ALPHA_TOL: f64 = 1e-12;
const COUPLING_PATHS: u64 = 10_000;

pub const BOUNDS_COLUMNS: [&str; 5] = ["quantity", "d_or_x", "lower", "exact_or_estimate", "upper"];
pub const SIM_COLUMNS: [&str; 7] = ["quantity", "param", "estimate", "stderr", "lower_bound", "upper_bound", "in_band"];
pub const REPORT_COLUMNS: [&str; 8] = ["check", "param", "value", "stderr", "lower", "upper", "band", "status"];

pub fn run(config: &RunConfig) -> Result<Output, CliError> {
    let dist = load_distribution(&config.dist_path)?;
    match config.command {
        Command::Alpha => alpha(&dist),
        Command::Excess => excess(&dist, config),
        Command::Bounds => bounds_table(&dist, config),
        Command::SimulateMax => simulate_max(&dist, config),
        Command::SimulateMin => simulate_min(&dist, config),
        Command::SimulateMartingale => simulate_martingale(&dist, config),
        Command::Embed => embed(&dist, config),
        Command::Report => report(&dist, config),
    }
}

fn alpha(dist: &Distribution) -> Result<Output, CliError> {
    let r = adjustment_coefficient(dist, ALPHA_TOL)?;
    let mut t = Table::key_value();
    t.kv("alpha", Cell::Num(r.alpha));
    t.kv("riskiness", Cell::Num(r.riskiness));
    t.kv("gaussian_rate", Cell::Num(r.gaussian_rate));
    let method = serde_json::to_value(r.solver.method).expect("enum serializes");
    t.kv("method", Cell::Text(method.as_str().unwrap_or_default().to_owned()));
    t.kv("iterations", Cell::Int(u64::from(r.solver.iterations)));
    t.kv("residual", Cell::Num(r.solver.residual));
    t.kv("tolerance_warning", Cell::Bool(r.solver.tolerance_warning));
    Ok(Output::new(&r, t))
}

#[derive(Serialize)]
struct ExcessOutput {
    alpha: f64,
    #[serde(flatten)]
    constants: ExcessConstants,
}

fn excess(dist: &Distribution, config: &RunConfig) -> Result<Output, CliError> {
    let alpha = adjustment_coefficient(dist, ALPHA_TOL)?.alpha;
    let cap = match config.cap {
        CapPolicy::Fixed(c) => Some(c),
        CapPolicy::DrawdownLevel => Some(config.d),
        CapPolicy::Unrestricted => None,
    };
    let c = excess_constants(dist, alpha, cap)?;
    let mut t = Table::key_value();
    t.kv("alpha", Cell::Num(alpha));
    t.kv("d_plus", Cell::Num(c.d_plus));
    t.kv("d_minus", Cell::Num(c.d_minus));
    t.kv("d_zero", Cell::Num(c.d_zero));
    t.kv("argmax_plus", Cell::opt(c.argmax_plus));
    t.kv("argmax_minus", Cell::opt(c.argmax_minus));
    t.kv("boundary_plus", Cell::Bool(c.boundary_plus));
    t.kv("boundary_minus", Cell::Bool(c.boundary_minus));
    t.kv("finite_plus", Cell::Bool(c.finite_plus));
    t.kv("finite_minus", Cell::Bool(c.finite_minus));
    t.kv("cap", Cell::opt(c.cap));
    Ok(Output::new(&ExcessOutput { alpha, constants: c }, t))
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn bounds_table(dist: &Distribution, config: &RunConfig) -> Result<Output, CliError> {
    let xs = sorted(&config.xs);
    let r = bounds::report(dist, config.d, &xs, config.cap)?;
    let mut t = Table::new(&BOUNDS_COLUMNS);
    t.push(vec![
        "expected_max".into(),
        Cell::Num(r.d),
        Cell::Num(r.emax_lower),
        Cell::opt(r.emax_exact),
        Cell::Num(r.emax_upper),
    ]);
    for b in &r.min_tail {
        t.push(vec!["min_tail".into(), Cell::Num(b.x), Cell::Num(b.lower), Cell::Empty, Cell::Num(b.upper)]);
    }
    t.push(vec!["bm_expected_max".into(), Cell::Num(r.d), Cell::Empty, Cell::Num(r.bm_reference.emax), Cell::Empty]);
    for &(x, p) in &r.bm_reference.tail {
        t.push(vec!["bm_min_tail".into(), Cell::Num(x), Cell::Empty, Cell::Num(p), Cell::Empty]);
    }
    Ok(Output::new(&r, t))
}

#[derive(Debug, Clone, Serialize)]
pub struct SimRow {
    pub quantity: &'static str,
    pub param: f64,
    pub estimate: MonteCarloEstimate,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub in_band: bool,
}

impl SimRow {
    fn new(quantity: &'static str, param: f64, estimate: MonteCarloEstimate, lower: f64, upper: f64) -> Self {
        SimRow { quantity, param, estimate, lower_bound: lower, upper_bound: upper, in_band: estimate.within(lower, upper, BAND_K) }
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.quantity.into(),
            Cell::Num(self.param),
            Cell::Num(self.estimate.mean),
            Cell::Num(self.estimate.stderr),
            Cell::Num(self.lower_bound),
            Cell::Num(self.upper_bound),
            Cell::Bool(self.in_band),
        ]
    }
}

#[derive(Serialize)]
struct SimulationOutput {
    alpha: f64,
    band_k: f64,
    rows: Vec<SimRow>,
}

fn simulation_output(alpha: f64, rows: Vec<SimRow>) -> Output {
    let mut t = Table::new(&SIM_COLUMNS);
    rows.iter().for_each(|r| t.push(r.cells()));
    Output::new(&SimulationOutput { alpha, band_k: BAND_K, rows }, t)
}

fn simulate_max(dist: &Distribution, config: &RunConfig) -> Result<Output, CliError> {
    let b = bounds::report(dist, config.d, &[], config.cap)?;
    let e = montecarlo::estimate_expected_max(dist, config.d, config.n, config.seed, &RayonRunner)?;
    let row = SimRow::new("expected_max", config.d, e, b.emax_lower, b.emax_upper);
    Ok(simulation_output(b.alpha, vec![row]))
}

fn simulate_min(dist: &Distribution, config: &RunConfig) -> Result<Output, CliError> {
    let xs = sorted(&config.xs);
    let b = bounds::report(dist, 1.0, &xs, CapPolicy::Unrestricted)?;
    let est = montecarlo::estimate_min_tail(dist, &xs, config.n, config.seed, config.eps, &RayonRunner)?;
    let rows = b.min_tail.iter().zip(est).map(|(tb, e)| SimRow::new("min_tail", tb.x, e, tb.lower, tb.upper)).collect();
    Ok(simulation_output(b.alpha, rows))
}

fn simulate_martingale(dist: &Distribution, config: &RunConfig) -> Result<Output, CliError> {
    let alpha = adjustment_coefficient(dist, ALPHA_TOL)?.alpha;
    let fixed = montecarlo::martingale_check(dist, alpha, config.steps, config.n, config.seed, &RayonRunner)?;
    let stopped = montecarlo::stopped_martingale_check(dist, config.d, config.n, config.seed, &RayonRunner)?;
    let rows = vec![
        SimRow::new("martingale", config.steps as f64, fixed, 1.0, 1.0),
        SimRow::new("stopped_martingale", config.d, stopped, 1.0, 1.0),
    ];
    Ok(simulation_output(alpha, rows))
}

fn embed(dist: &Distribution, config: &RunConfig) -> Result<Output, CliError> {
    let f = AtomicDistribution::from_distribution(dist)?;
    let s: EmbeddingStats = embedding::embedding_frequencies(&f, config.scheme, config.n, config.seed, &RayonRunner)?;
    let mut t = Table::new(&SIM_COLUMNS);
    for a in &s.atoms {
        t.push(vec![
            "frequency".into(),
            Cell::Num(a.x),
            Cell::Num(a.frequency),
            Cell::Num(a.stderr),
            Cell::Num(a.p),
            Cell::Num(a.p),
            Cell::Bool(a.within(BAND_K)),
        ]);
    }
    let mut moment = |name: &str, e: &MonteCarloEstimate, target: f64| {
        t.push(vec![
            name.into(),
            Cell::Empty,
            Cell::Num(e.mean),
            Cell::Num(e.stderr),
            Cell::Num(target),
            Cell::Num(target),
            Cell::Bool(e.within(target, target, BAND_K)),
        ]);
    };
    moment("stopped_mean", &s.stopped_value, s.mean);
    moment("quadratic_time", &s.quadratic_time, s.variance);
    let info = |name: &str, param: Cell, value: f64| vec![name.into(), param, Cell::Num(value), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty];
    t.push(info("mean_exits", Cell::Empty, s.mean_exits));
    for q in [0.5, 0.9] {
        t.push(info("chain_max_quantile", Cell::Num(q), s.chain_max_quantile(q)));
    }
    Ok(Output::new(&s, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Info,
    Pass,
    Fail,
}

impl Status {
    fn of(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn label(self) -> &'static str {
        match self {
            Status::Info => "INFO",
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub param: Option<f64>,
    pub value: f64,
    pub stderr: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub band: Option<f64>,
    pub status: Status,
}

impl CheckRow {
    fn info(check: &str, value: f64) -> Self {
        CheckRow { check: check.into(), param: None, value, stderr: None, lower: None, upper: None, band: None, status: Status::Info }
    }

    fn estimate(check: &str, param: f64, e: &MonteCarloEstimate, lower: f64, upper: f64) -> Self {
        CheckRow {
            check: check.into(),
            param: Some(param),
            value: e.mean,
            stderr: Some(e.stderr),
            lower: Some(lower),
            upper: Some(upper),
            band: Some(BAND_K * e.stderr),
            status: Status::of(e.within(lower, upper, BAND_K)),
        }
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Text(self.check.clone()),
            Cell::opt(self.param),
            Cell::Num(self.value),
            Cell::opt(self.stderr),
            Cell::opt(self.lower),
            Cell::opt(self.upper),
            Cell::opt(self.band),
            self.status.label().into(),
        ]
    }
}

#[derive(Serialize)]
struct ReportOutput {
    family: &'static str,
    adjustment: AdjustmentResult,
    bounds: BoundsReport,
    coupling: Option<CouplingReport>,
    checks: Vec<CheckRow>,
    all_pass: bool,
}

fn report(dist: &Distribution, config: &RunConfig) -> Result<Output, CliError> {
    let adj = adjustment_coefficient(dist, ALPHA_TOL)?;
    let xs = sorted(&config.xs);
    let b = bounds::report(dist, config.d, &xs, config.cap)?;
    let mut checks = vec![
        CheckRow::info("alpha", adj.alpha),
        CheckRow::info("riskiness", adj.riskiness),
        CheckRow::info("gaussian_rate", adj.gaussian_rate),
        CheckRow::info("d_plus", b.excess_unrestricted.d_plus),
        CheckRow::info("d_minus", b.excess_unrestricted.d_minus),
        CheckRow::info("d_zero", b.excess_unrestricted.d_zero),
    ];
    if b.excess.cap.is_some() {
        checks.push(CheckRow { param: b.excess.cap, ..CheckRow::info("d_zero_capped", b.excess.d_zero) });
    }
    if let Some(exact) = b.emax_exact {
        checks.push(CheckRow {
            check: "expected_max_exact".into(),
            param: Some(config.d),
            value: exact,
            stderr: None,
            lower: Some(b.emax_lower),
            upper: Some(b.emax_upper),
            band: Some(0.0),
            status: Status::of(b.emax_lower <= exact && exact <= b.emax_upper),
        });
    }

    let runner = RayonRunner;
    let emax = montecarlo::estimate_expected_max(dist, config.d, config.n, config.seed, &runner)?;
    checks.push(CheckRow::estimate("expected_max", config.d, &emax, b.emax_lower, b.emax_upper));
    let tails = montecarlo::estimate_min_tail(dist, &xs, config.n, config.seed, config.eps, &runner)?;
    for (tb, e) in b.min_tail.iter().zip(&tails) {
        checks.push(CheckRow::estimate("min_tail", tb.x, e, tb.lower, tb.upper));
    }
    let stopped = montecarlo::stopped_martingale_check(dist, config.d, config.n, config.seed, &runner)?;
    checks.push(CheckRow::estimate("stopped_martingale", config.d, &stopped, 1.0, 1.0));

    let coupling = if dist.atoms().is_some() {
        let c = embedding::coupled_drawdown_experiment(dist, config.d, config.n.min(COUPLING_PATHS), config.seed, &runner)?;
        let violations = c.total_violations() as f64;
        checks.push(CheckRow {
            check: "coupling_violations".into(),
            param: Some(config.d),
            value: violations,
            stderr: None,
            lower: Some(0.0),
            upper: Some(0.0),
            band: Some(0.0),
            status: Status::of(c.total_violations() == 0),
        });
        checks.push(CheckRow::estimate("coupling_expected_max", config.d, &c.expected_max, c.bm_expected_max, f64::INFINITY));
        Some(c)
    } else {
        None
    };

    let all_pass = checks.iter().all(|c| c.status != Status::Fail);
    let mut t = Table::new(&REPORT_COLUMNS);
    checks.iter().for_each(|c| t.push(c.cells()));
    let out = ReportOutput { family: dist.family().name(), adjustment: adj, bounds: b, coupling, checks, all_pass };
    Ok(Output::new(&out, t))
}
