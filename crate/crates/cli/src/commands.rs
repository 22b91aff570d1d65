//! One function per subcommand. Each is a pure function of the config and
//! seed, returning the bytes to write.

use std::sync::Arc;

use isinglab::analytic::{ising_critical_temperature, onsager_exponent_fit, onsager_magnetization};
use isinglab::clusters::{dobrushin_interface, interface_census};
use isinglab::exact::enumerate;
use isinglab::lattice::{BoundaryCondition, Lattice, Pin};
use isinglab::mcmc::{auto_burn_in, chain_seed, estimate_many, ChainState, Estimate, Schedule, MIN_BATCHES};
use isinglab::series::{
    calibrate_first_order, cumulant_direct, cumulant_from_generating, verify_generating_identity, RandomVariable,
};
use isinglab::spin::{Model, ModelParams, SpinConfig};
use isinglab::Sampler;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::{OnsagerSpec, RunConfig, SeriesSpec, Snapshot};
use crate::render::render;
use crate::{CliError, Command};

/// Threshold above which a Gibbs-equation residual counts as a violation.
pub const GIBBS_TOLERANCE: f64 = 1e-10;

const DEFAULT_SWEEPS: u64 = 10_000;

/// Result of one subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub bytes: Vec<u8>,
    /// False when a check failed or a row carries an error marker.
    pub ok: bool,
    /// Human-readable notes for standard error.
    pub messages: Vec<String>,
}

pub fn execute(command: Command, config: Option<&RunConfig>, seed: Option<u64>) -> Result<Output, CliError> {
    if command == Command::Onsager {
        return cmd_onsager(config.and_then(|c| c.onsager.clone()).unwrap_or_default());
    }
    let cfg = config.ok_or_else(|| CliError::Config("--config is required".into()))?;
    match command {
        Command::Enumerate => cmd_enumerate(cfg),
        Command::Sample => cmd_sample(cfg, seed, false),
        Command::Sweep => cmd_sample(cfg, seed, true),
        Command::SeriesCheck => cmd_series(cfg),
        Command::Census => cmd_census(cfg),
        Command::Render => cmd_render(cfg, seed),
        Command::Onsager => unreachable!(),
    }
}

fn temperature_json(t: f64) -> Value {
    if t.is_infinite() {
        Value::String("inf".into())
    } else {
        t.into()
    }
}

fn json(value: &impl Serialize) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(CliError::runtime)?;
    bytes.push(b'\n');
    Ok(bytes)
}

#[derive(Serialize)]
struct LatticeOut<'a> {
    extents: &'a [usize],
    boundary: &'a BoundaryCondition,
    sites: usize,
    edges: usize,
}

impl<'a> LatticeOut<'a> {
    fn of(l: &'a Lattice) -> Self {
        LatticeOut { extents: l.extents(), boundary: l.boundary(), sites: l.site_count(), edges: l.edge_count() }
    }
}

#[derive(Serialize)]
struct LevelOut {
    coupling_energy: i64,
    magnetization: i64,
    count: u64,
    /// Total probability of the level.
    probability: f64,
}

#[derive(Serialize)]
struct MarginalOut {
    window: Vec<usize>,
    pattern: Vec<i8>,
    probability: f64,
}

#[derive(Serialize)]
struct CorrelationOut {
    sites: Vec<usize>,
    value: f64,
}

#[derive(Serialize)]
struct GibbsOut {
    window_size: usize,
    windows_checked: usize,
    classes_checked: usize,
    max_violation: f64,
    ok: bool,
}

#[derive(Serialize)]
struct FkgOut {
    pairs_checked: usize,
    violations: Vec<[usize; 2]>,
    ok: bool,
}

#[derive(Serialize)]
struct EnumerateReport<'a> {
    lattice: LatticeOut<'a>,
    model: String,
    temperature: Value,
    field: f64,
    log_z: f64,
    configurations: u64,
    free_sites: usize,
    levels: Vec<LevelOut>,
    marginals: Vec<MarginalOut>,
    correlations: Vec<CorrelationOut>,
    gibbs: Option<GibbsOut>,
    fkg: Option<FkgOut>,
    ok: bool,
}

fn cmd_enumerate(cfg: &RunConfig) -> Result<Output, CliError> {
    let lattice = cfg.lattice()?;
    let params = cfg.params()?;
    let q = &cfg.queries;
    for m in &q.marginals {
        if m.window.len() != m.pattern.len() {
            return Err(CliError::Config("marginal window and pattern lengths differ".into()));
        }
        for &s in &m.window {
            lattice.check_site(s).map_err(CliError::config)?;
        }
        if let Some(bad) = m.pattern.iter().find(|&&s| !params.model.is_valid(s)) {
            return Err(CliError::Config(format!("state {bad} is not valid for {}", params.model)));
        }
    }
    if params.model != Model::Ising && (!q.correlations.is_empty() || q.fkg) {
        return Err(CliError::Config("correlation and FKG queries need Ising spins".into()));
    }
    for c in &q.correlations {
        for &s in c {
            lattice.check_site(s).map_err(CliError::config)?;
        }
    }
    if q.fkg
        && (params.field < 0.0
            || !matches!(
                lattice.boundary(),
                BoundaryCondition::Free | BoundaryCondition::Periodic | BoundaryCondition::AllPlus
            ))
    {
        return Err(CliError::Config("the FKG check needs h >= 0 and a free, periodic or all-plus boundary".into()));
    }

    let table = enumerate(lattice.clone(), params).map_err(CliError::runtime)?;
    let levels = table
        .levels()
        .iter()
        .map(|l| LevelOut {
            coupling_energy: l.coupling_energy,
            magnetization: l.magnetization,
            count: l.count,
            probability: l.count as f64 * l.config_probability(),
        })
        .collect();
    let marginals = q
        .marginals
        .iter()
        .map(|m| {
            let probability = table.window_marginal(&m.window, &m.pattern).map_err(CliError::runtime)?;
            Ok(MarginalOut { window: m.window.clone(), pattern: m.pattern.clone(), probability })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let correlations = q
        .correlations
        .iter()
        .map(|c| Ok(CorrelationOut { sites: c.clone(), value: table.correlation(c).map_err(CliError::runtime)? }))
        .collect::<Result<Vec<_>, CliError>>()?;
    let gibbs = match q.gibbs_window {
        None => None,
        Some(w) => {
            let r = table.verify_gibbs_equations(w).map_err(CliError::runtime)?;
            Some(GibbsOut {
                window_size: w,
                windows_checked: r.windows_checked,
                classes_checked: r.classes_checked,
                max_violation: r.max_violation,
                ok: r.max_violation <= GIBBS_TOLERANCE,
            })
        }
    };
    let fkg = if q.fkg {
        let n = lattice.site_count();
        let mut violations = Vec::new();
        let mut pairs = 0;
        for v in 0..n {
            for w in v + 1..n {
                pairs += 1;
                if !table.verify_fkg(v, w).map_err(CliError::runtime)?.holds {
                    violations.push([v, w]);
                }
            }
        }
        Some(FkgOut { pairs_checked: pairs, ok: violations.is_empty(), violations })
    } else {
        None
    };
    let ok = gibbs.as_ref().is_none_or(|g| g.ok) && fkg.as_ref().is_none_or(|f| f.ok);
    let report = EnumerateReport {
        lattice: LatticeOut::of(&lattice),
        model: params.model.to_string(),
        temperature: temperature_json(params.temperature),
        field: params.field,
        log_z: table.log_z(),
        configurations: table.configurations() as u64,
        free_sites: table.free_site_count(),
        levels,
        marginals,
        correlations,
        gibbs,
        fkg,
        ok,
    };
    let mut messages = vec![format!("logZ = {}", report.log_z)];
    if !ok {
        messages.push("an invariant check failed".into());
    }
    Ok(Output { bytes: json(&report)?, ok, messages })
}

fn schedule(cfg: &RunConfig) -> Result<Schedule, CliError> {
    let n_sweeps = cfg.n_sweeps.unwrap_or(DEFAULT_SWEEPS);
    let batches = cfg.batches.unwrap_or(MIN_BATCHES);
    if batches < MIN_BATCHES {
        return Err(CliError::Config(format!("batches must be at least {MIN_BATCHES}")));
    }
    let burn_in = cfg.burn_in.unwrap_or(0);
    if n_sweeps <= burn_in || n_sweeps - burn_in < batches as u64 {
        return Err(CliError::Config(format!(
            "n_sweeps = {n_sweeps} leaves too few post-burn-in sweeps for {batches} batches"
        )));
    }
    Ok(Schedule::new(cfg.sampler.unwrap_or(Sampler::Metropolis), n_sweeps, burn_in)
        .with_batches(batches)
        .with_global_flip(cfg.global_flip)
        .with_estimator(cfg.estimator))
}

fn sampling_params(cfg: &RunConfig, temperature: f64) -> Result<ModelParams, CliError> {
    let p = cfg.params_at(temperature)?;
    if p.is_zero_temperature() {
        return Err(CliError::Config("samplers need T > 0; use enumerate for T = 0".into()));
    }
    Ok(p)
}

fn run_point(
    cfg: &RunConfig,
    lattice: &Arc<Lattice>,
    params: ModelParams,
    observables: &[isinglab::Observable],
    mut schedule: Schedule,
    seed: u64,
) -> isinglab::Result<Vec<Estimate>> {
    let mut chain = ChainState::start(lattice.clone(), params, cfg.start, seed)?;
    if cfg.burn_in.is_none() {
        let pilot = (schedule.n_sweeps / 10).clamp(100, 10_000);
        let limit = schedule.n_sweeps - schedule.batches as u64;
        schedule.burn_in = auto_burn_in(&chain, &schedule, pilot)?.min(limit);
    }
    estimate_many(&mut chain, observables, &schedule)
}

fn cmd_sample(cfg: &RunConfig, seed: Option<u64>, sweep: bool) -> Result<Output, CliError> {
    let lattice = cfg.lattice()?;
    let temperatures: Vec<f64> = if sweep {
        cfg.temperatures
            .as_ref()
            .ok_or_else(|| CliError::Config("sweep needs a temperatures list".into()))?
            .iter()
            .map(|t| t.value())
            .collect::<Result<_, _>>()?
    } else {
        vec![cfg.params()?.temperature]
    };
    let params: Vec<ModelParams> =
        temperatures.iter().map(|&t| sampling_params(cfg, t)).collect::<Result<_, _>>()?;
    let observables = cfg.observables()?;
    for o in &observables {
        o.check(&lattice).map_err(CliError::config)?;
    }
    let schedule = schedule(cfg)?;
    let master = cfg.seed(seed);

    let points: Vec<(f64, u64, isinglab::Result<Vec<Estimate>>)> = params
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let s = chain_seed(master, i as u64);
            (p.temperature, s, run_point(cfg, &lattice, p, &observables, schedule, s))
        })
        .collect();

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["temperature", "observable", "estimate", "stderr", "ess", "n_sweeps", "seed"])
        .map_err(CliError::runtime)?;
    let mut ok = true;
    let mut messages = Vec::new();
    for (t, s, result) in &points {
        match result {
            Ok(estimates) => {
                for e in estimates {
                    writer
                        .write_record([
                            t.to_string(),
                            e.observable.clone(),
                            e.mean.to_string(),
                            e.std_error.to_string(),
                            e.ess.to_string(),
                            e.n_sweeps.to_string(),
                            s.to_string(),
                        ])
                        .map_err(CliError::runtime)?;
                }
            }
            Err(err) => {
                ok = false;
                messages.push(format!("T = {t}: {err}"));
                for o in &observables {
                    writer
                        .write_record([
                            t.to_string(),
                            o.name(),
                            "error".into(),
                            String::new(),
                            String::new(),
                            schedule.n_sweeps.to_string(),
                            s.to_string(),
                        ])
                        .map_err(CliError::runtime)?;
                }
            }
        }
    }
    let bytes = writer.into_inner().map_err(CliError::runtime)?;
    Ok(Output { bytes, ok, messages })
}

fn cmd_onsager(spec: OnsagerSpec) -> Result<Output, CliError> {
    if !(spec.t_min > 0.0 && spec.t_min < spec.t_max && spec.points >= 2) {
        return Err(CliError::Config("onsager grid needs 0 < t_min < t_max and at least 2 points".into()));
    }
    let tc = ising_critical_temperature();
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["temperature", "magnetization"]).map_err(CliError::runtime)?;
    for i in 0..spec.points {
        let t = spec.t_min + (spec.t_max - spec.t_min) * i as f64 / (spec.points - 1) as f64;
        let m = onsager_magnetization(t).map_err(CliError::runtime)?;
        writer.write_record([t.to_string(), m.to_string()]).map_err(CliError::runtime)?;
    }
    let mut messages = vec![format!("T_c = {tc}")];
    if let Some(fit) = spec.fit {
        let f = onsager_exponent_fit(fit.min_distance, fit.max_distance, fit.points).map_err(CliError::config)?;
        messages.push(format!(
            "log-log slope over T_c - T in [{}, {}] with {} points: {}",
            f.min_distance, f.max_distance, f.points, f.slope
        ));
    }
    Ok(Output { bytes: writer.into_inner().map_err(CliError::runtime)?, ok: true, messages })
}

/// Parses `s3` (a spin) or `s1*s2*s5` (a product of spins).
fn parse_variable(text: &str, lattice: &Lattice) -> Result<RandomVariable, CliError> {
    let sites = text
        .split('*')
        .map(|part| {
            let site: usize = part
                .trim()
                .strip_prefix('s')
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| CliError::Config(format!("variable {text:?} is not of the form s3 or s1*s2")))?;
            lattice.check_site(site).map_err(CliError::config)?;
            Ok(site)
        })
        .collect::<Result<Vec<usize>, CliError>>()?;
    Ok(if sites.len() == 1 { RandomVariable::spin(sites[0]) } else { RandomVariable::product(&sites) })
}

#[derive(Serialize)]
struct GeneratingOut {
    variables: Vec<String>,
    order: usize,
    ts: Vec<f64>,
    residuals: Vec<f64>,
    ratios: Vec<f64>,
    required_ratio: f64,
    ok: bool,
}

#[derive(Serialize)]
struct CumulantOut {
    variables: Vec<String>,
    direct: Option<f64>,
    generating: f64,
}

#[derive(Serialize)]
struct CalibrationOut {
    variable: String,
    beta: f64,
    first_order: f64,
    richardson: f64,
    gap: f64,
}

#[derive(Serialize)]
struct SeriesReport<'a> {
    lattice: LatticeOut<'a>,
    temperature: Value,
    generating: Vec<GeneratingOut>,
    cumulants: Vec<CumulantOut>,
    calibration: Vec<CalibrationOut>,
    ok: bool,
}

fn cmd_series(cfg: &RunConfig) -> Result<Output, CliError> {
    let lattice = cfg.lattice()?;
    let params = cfg.params()?;
    if params.model != Model::Ising {
        return Err(CliError::Config("series checks use Ising spins".into()));
    }
    let spec = cfg.series.clone().unwrap_or(SeriesSpec {
        generating: vec![vec!["s0".into()]],
        order: 2,
        t0: 0.2,
        halvings: 3,
        cumulants: Vec::new(),
        calibrate: Vec::new(),
        step: 1e-3,
    });
    let parse_all = |names: &[String]| -> Result<Vec<RandomVariable>, CliError> {
        names.iter().map(|n| parse_variable(n, &lattice)).collect()
    };
    let generating_vars: Vec<Vec<RandomVariable>> =
        spec.generating.iter().map(|g| parse_all(g)).collect::<Result<_, _>>()?;
    let cumulant_vars: Vec<Vec<RandomVariable>> =
        spec.cumulants.iter().map(|g| parse_all(g)).collect::<Result<_, _>>()?;
    let calibrate_vars = parse_all(&spec.calibrate)?;
    if !(1..=isinglab::series::MAX_ORDER).contains(&spec.order) {
        return Err(CliError::Config(format!("series order must be 1..={}", isinglab::series::MAX_ORDER)));
    }
    if generating_vars.iter().any(|g| g.is_empty() || g.len() > 3) {
        return Err(CliError::Config("generating checks take 1 to 3 variables".into()));
    }
    if cumulant_vars.iter().any(|c| c.is_empty() || c.len() > isinglab::series::MAX_ORDER) {
        return Err(CliError::Config("cumulants take 1 to 4 variables".into()));
    }

    let table = enumerate(lattice.clone(), params).map_err(CliError::runtime)?;
    let mut messages = vec!["variables        order  t          residual     ratio".to_string()];
    let mut generating = Vec::new();
    for (names, vars) in spec.generating.iter().zip(&generating_vars) {
        let c = verify_generating_identity(&table, vars, spec.order, spec.t0, spec.halvings)
            .map_err(CliError::runtime)?;
        for (i, (t, r)) in c.ts.iter().zip(&c.residuals).enumerate() {
            let ratio = if i == 0 { String::from("-") } else { format!("{:.3}", c.ratios[i - 1]) };
            messages.push(format!("{:<16} {:<6} {:<10.6} {:<12.4e} {}", names.join(","), c.order, t, r, ratio));
        }
        generating.push(GeneratingOut {
            variables: names.clone(),
            order: c.order,
            ts: c.ts,
            residuals: c.residuals,
            ratios: c.ratios,
            required_ratio: c.required_ratio,
            ok: c.passes,
        });
    }
    let cumulants = spec
        .cumulants
        .iter()
        .zip(&cumulant_vars)
        .map(|(names, vars)| {
            Ok(CumulantOut {
                variables: names.clone(),
                direct: if vars.len() <= 3 { Some(cumulant_direct(&table, vars).map_err(CliError::runtime)?) } else { None },
                generating: cumulant_from_generating(&table, vars).map_err(CliError::runtime)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let calibration = spec
        .calibrate
        .iter()
        .zip(&calibrate_vars)
        .map(|(name, f)| {
            let c = calibrate_first_order(&table, f, spec.step).map_err(CliError::runtime)?;
            Ok(CalibrationOut {
                variable: name.clone(),
                beta: c.beta,
                first_order: c.first_order,
                richardson: c.richardson,
                gap: c.gap,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let ok = generating.iter().all(|g| g.ok);
    let report = SeriesReport {
        lattice: LatticeOut::of(&lattice),
        temperature: temperature_json(params.temperature),
        generating,
        cumulants,
        calibration,
        ok,
    };
    Ok(Output { bytes: json(&report)?, ok, messages })
}

#[derive(Serialize)]
struct AreaCount {
    area: usize,
    count: u64,
}

#[derive(Serialize)]
struct CensusReport<'a> {
    lattice: LatticeOut<'a>,
    free_sites: usize,
    total: u64,
    counts: Vec<AreaCount>,
    /// `ln(count) / area` for positive areas.
    growth_rates: Vec<(usize, f64)>,
}

fn cmd_census(cfg: &RunConfig) -> Result<Output, CliError> {
    let lattice = cfg.lattice_with_default(BoundaryCondition::AllPlus)?;
    if cfg.model()? != Model::Ising {
        return Err(CliError::Config("the interface census uses Ising spins".into()));
    }
    let census = interface_census(lattice.clone()).map_err(CliError::runtime)?;
    let report = CensusReport {
        lattice: LatticeOut::of(&lattice),
        free_sites: census.free_sites,
        total: census.total(),
        counts: census.counts.iter().map(|(&area, &count)| AreaCount { area, count }).collect(),
        growth_rates: census.growth_rates(),
    };
    let messages = vec![format!("{} configurations over {} areas", report.total, report.counts.len())];
    Ok(Output { bytes: json(&report)?, ok: true, messages })
}

fn ground_state(lattice: &Arc<Lattice>, model: Model) -> Result<SpinConfig, CliError> {
    let side = |site: usize| -> Pin {
        match lattice.boundary() {
            BoundaryCondition::AllMinus => Pin::Minus,
            &BoundaryCondition::Dobrushin { axis, below } if lattice.coord(site, axis) >= below => Pin::Minus,
            _ => Pin::Plus,
        }
    };
    if matches!(lattice.boundary(), BoundaryCondition::Fixed(_)) {
        return Err(CliError::Config("no canonical ground state for an arbitrary fixed boundary".into()));
    }
    let states = (0..lattice.site_count())
        .map(|s| model.resolve(lattice.pin(s).unwrap_or_else(|| side(s))))
        .collect();
    SpinConfig::from_states(lattice.clone(), model, states).map_err(CliError::runtime)
}

fn cmd_render(cfg: &RunConfig, seed: Option<u64>) -> Result<Output, CliError> {
    let lattice = cfg.lattice()?;
    if lattice.dim() != 2 {
        return Err(CliError::Config(format!("rendering needs a 2D lattice, got d = {}", lattice.dim())));
    }
    let spec = cfg.render.as_ref().ok_or_else(|| CliError::Config("render needs a render section".into()))?;
    let model = cfg.model()?;
    let config = match &spec.snapshot {
        Snapshot::States { states } => {
            SpinConfig::from_states(lattice.clone(), model, states.clone()).map_err(CliError::config)?
        }
        Snapshot::Uniform { state } => SpinConfig::uniform(lattice.clone(), model, *state).map_err(CliError::config)?,
        Snapshot::Ground {} => ground_state(&lattice, model)?,
        Snapshot::Sample { sweeps } => {
            let params = sampling_params(cfg, cfg.params()?.temperature)?;
            let schedule = Schedule::new(cfg.sampler.unwrap_or(Sampler::Metropolis), *sweeps, 0)
                .with_global_flip(cfg.global_flip);
            let mut chain = ChainState::start(lattice.clone(), params, cfg.start, chain_seed(cfg.seed(seed), 0))
                .map_err(CliError::runtime)?;
            for _ in 0..*sweeps {
                chain.step(&schedule).map_err(CliError::runtime)?;
            }
            chain.config().clone()
        }
    };
    let mut messages = Vec::new();
    if model == Model::Ising && matches!(lattice.boundary(), BoundaryCondition::Dobrushin { .. }) {
        match dobrushin_interface(&config).map_err(CliError::runtime)? {
            Some(w) => messages.push(format!(
                "spanning interface: area {}, fluctuation {}",
                w.area, w.fluctuation
            )),
            None => messages.push("no spanning interface".into()),
        }
    }
    Ok(Output { bytes: render(&config, spec.overlay)?, ok: true, messages })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::from_json(text).unwrap()
    }

    #[test]
    fn enumerate_log_z() {
        let zero = cfg(r#"{"lattice": {"extents": [2, 2]}, "beta": 0.0}"#);
        let out = execute(Command::Enumerate, Some(&zero), None).unwrap();
        let v: Value = serde_json::from_slice(&out.bytes).unwrap();
        assert!((v["log_z"].as_f64().unwrap() - 16f64.ln()).abs() < 1e-12);
        assert_eq!(v["temperature"], "inf");

        let one = cfg(r#"{"lattice": {"extents": [2, 2]}, "beta": 1.0,
                          "queries": {"gibbs_window": 1, "fkg": true, "correlations": [[0, 3]],
                                      "marginals": [{"window": [0, 1], "pattern": [1, 1]}]}}"#);
        let out = execute(Command::Enumerate, Some(&one), None).unwrap();
        assert!(out.ok);
        let v: Value = serde_json::from_slice(&out.bytes).unwrap();
        let e4 = 4f64.exp();
        assert!((v["log_z"].as_f64().unwrap() - (2.0 * e4 + 12.0 + 2.0 / e4).ln()).abs() < 1e-12);
        assert_eq!(v["fkg"]["pairs_checked"], 6);
    }

    #[test]
    fn sampler_rejects_zero_temperature() {
        let c = cfg(r#"{"lattice": {"extents": [4, 4]}, "temperatures": [1.0, 0.0], "n_sweeps": 200, "burn_in": 10}"#);
        assert!(matches!(execute(Command::Sweep, Some(&c), None), Err(CliError::Config(_))));
    }

    #[test]
    fn precondition_failures_become_error_rows() {
        let c = cfg(r#"{"lattice": {"extents": [4, 4], "boundary": {"kind": "all_plus"}}, "temperature": 2.0,
                        "sampler": "wolff", "n_sweeps": 200, "burn_in": 10, "observables": ["m"]}"#);
        let out = execute(Command::Sample, Some(&c), Some(3)).unwrap();
        assert!(!out.ok);
        let text = String::from_utf8(out.bytes).unwrap();
        assert_eq!(text.lines().nth(1).unwrap().split(',').nth(2), Some("error"));
    }

    #[test]
    fn ground_states() {
        let c = cfg(r#"{"lattice": {"extents": [4, 6], "boundary": {"kind": "dobrushin"}},
                        "render": {"snapshot": {"kind": "ground"}}}"#);
        let out = execute(Command::Render, Some(&c), None).unwrap();
        let body = &out.bytes[b"P5\n6 4\n255\n".len()..];
        for row in body.chunks(6) {
            assert_eq!(row, &[255, 255, 255, 0, 0, 0]);
        }
        assert_eq!(out.messages, vec!["spanning interface: area 4, fluctuation 0".to_string()]);
    }

    #[test]
    fn variables_parse() {
        let l = Lattice::new(vec![3, 3], BoundaryCondition::Free).unwrap();
        assert_eq!(parse_variable("s4", &l).unwrap().name(), "s4");
        assert_eq!(parse_variable("s1*s2", &l).unwrap().name(), "s1*s2");
        assert!(parse_variable("s9", &l).is_err());
        assert!(parse_variable("x1", &l).is_err());
    }
}
