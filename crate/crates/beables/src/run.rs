//! Executes one scenario file: evaluate, emit, then verify from the emitted
//! files.

use std::path::{Path, PathBuf};

use beables_core::abl::{abl_evolved, oracle_joint_distribution, PrePostScenario};
use beables_core::field::trapezoid;
use beables_core::hilbert::{LinearOperator, ProjectorFamily};
use beables_core::nonrel::{
    abl_mass_field, born_mass_field, final_boundary_projector, final_configuration_distribution, mass_family_at,
    sample_final_configuration, FinalConfiguration, LatticeModel, Scope,
};
use beables_core::random::random_scenario;
use beables_core::relmodels::{
    ray_visible_outside_cone, sample_nature_choice, NatureChoice, SpacetimePoint, ToyModel, GAUSSIAN_CUTOFF,
};
use beables_core::Tolerances;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{self, Format, Kind, ScenarioConfig};
use crate::emit::{self, branch_name, fmt_f64, FieldTable};
use crate::error::{Result, RunError};
use crate::report::{Check, Outcome, RunReport, Timing};

const TOL: Tolerances = Tolerances::DEFAULT;

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub format: Option<Format>,
}

/// Paths derived from the output prefix.
struct Outputs {
    prefix: String,
    format: Format,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn path(&mut self, suffix: &str, ext: &str) -> PathBuf {
        let p = PathBuf::from(format!("{}_{suffix}.{ext}", self.prefix));
        self.written.push(p.clone());
        p
    }

    fn names(&self) -> Vec<String> {
        self.written.iter().map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned()).collect()
    }
}

/// Loads, runs and reports. Returns the report when every check passed and
/// an invariant error (after writing the report) otherwise.
pub fn run(config_path: &Path, overrides: &Overrides) -> Result<RunReport> {
    let mut cfg = config::load(config_path)?;
    apply(&mut cfg, overrides);
    run_config(&cfg)
}

pub fn apply(cfg: &mut ScenarioConfig, overrides: &Overrides) {
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &overrides.out {
        cfg.output.prefix = out.clone();
    }
    if let Some(format) = overrides.format {
        cfg.output.format = format;
    }
}

pub fn run_config(cfg: &ScenarioConfig) -> Result<RunReport> {
    let mut timing = Timing { threads: rayon::current_num_threads(), phases: Vec::new() };
    let mut out = Outputs { prefix: cfg.output.prefix.clone(), format: cfg.output.format, written: Vec::new() };
    let (outcome, checks) = match cfg.kind {
        Kind::Toy1 | Kind::Toy2 => run_toy(cfg, &mut out, &mut timing)?,
        Kind::NonrelNparticle | Kind::NonrelClasses => run_lattice(cfg, &mut out, &mut timing)?,
        Kind::AblCheck => run_abl_check(cfg, &mut out, &mut timing)?,
    };
    let report_path = out.path("report", "json");
    let timing_path = out.path("timing", "json");
    let report = RunReport {
        schema: config::SCHEMA_VERSION,
        kind: cfg.kind.name().to_owned(),
        seed: cfg.seed,
        scenario: scenario_echo(cfg),
        outcome,
        passed: checks.iter().all(|c| c.passed),
        checks,
        outputs: out.names(),
    };
    emit::write_json(&report_path, &report)?;
    emit::write_json(&timing_path, &timing)?;
    if !report.passed {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        return Err(RunError::Invariant(format!("checks failed: {}", failed.join(", "))));
    }
    Ok(report)
}

/// Physics-relevant part of the configuration: everything but `output`.
fn scenario_echo(cfg: &ScenarioConfig) -> serde_json::Value {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    if let Some(map) = v.as_object_mut() {
        map.remove("output");
        map.remove("seed");
        map.remove("schema");
        map.remove("kind");
    }
    v
}

fn run_toy(cfg: &ScenarioConfig, out: &mut Outputs, timing: &mut Timing) -> Result<(Outcome, Vec<Check>)> {
    let model = cfg.toy_model()?;
    let grid = cfg.toy_grid()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let choice = sample_nature_choice(&model, &mut rng);
    let field = timing.time("evaluate", || model.beable_field(choice, &grid))?;
    let field_path = out.path("field", out.format.extension());
    let rays_path = out.path("rays", "csv");
    timing.time("emit", || -> Result<()> {
        emit::write_field(&field_path, &field, out.format)?;
        emit::write_rays(&rays_path, &model.ray_polylines(grid.t_min, grid.t_max))
    })?;
    let checks = timing.time("verify", || -> Result<Vec<Check>> {
        let table = emit::read_field(&field_path, out.format)?;
        Ok(toy_checks(&model, choice, &table, grid.dx()))
    })?;
    let (wa, wb) = model.born_weights();
    let born_probability = if choice == NatureChoice::Cloud1 { wa } else { wb };
    Ok((Outcome::NatureChoice { branch: branch_name(choice).to_owned(), born_probability }, checks))
}

/// Verifications of a toy-model field read back from disk.
pub fn toy_checks(model: &ToyModel, choice: NatureChoice, table: &FieldTable, dx: f64) -> Vec<Check> {
    let c = model.config();
    let mass = c.mass;

    let mut closed_form = 0.0f64;
    let mut mismatches = 0usize;
    for k in 0..table.len() {
        let y = SpacetimePoint::new(table.t[k], table.x[k]);
        let expected = model.beable_value(choice, &y);
        let diff = (table.rho[k] - expected).abs();
        closed_form = closed_form.max(if diff == 0.0 { 0.0 } else { diff / expected.abs() });
        // Inside the ROI no outgoing ray of either branch may be visible.
        let hidden = [NatureChoice::Cloud1, NatureChoice::Cloud2]
            .iter()
            .flat_map(|&b| model.outgoing_rays(b))
            .all(|r| !ray_visible_outside_cone(&r, &y));
        if hidden != model.in_region_of_indeterminacy(&y) {
            mismatches += 1;
        }
    }
    let mut checks = vec![
        Check::new("field_matches_closed_form", closed_form, 1e-12).with_note("max relative deviation"),
        Check::new("roi_matches_ray_visibility", mismatches as f64, 0.0).with_note("grid points that disagree"),
    ];

    let eps = 1e-6 * mass;
    let covers = table.x.iter().copied().fold(f64::INFINITY, f64::min) <= c.x1 - GAUSSIAN_CUTOFF * c.sigma1
        && table.x.iter().copied().fold(f64::NEG_INFINITY, f64::max) >= c.x2 + GAUSSIAN_CUTOFF * c.sigma2;
    let resolved = dx > 0.0 && dx <= 0.5 * c.sigma1.min(c.sigma2);
    if covers && resolved {
        // A mixed slice holds the Born-weighted part of one cloud inside the
        // ROI plus, outside it, either nothing or the whole chosen cloud.
        let (wa, wb) = model.born_weights();
        let floor = wa.min(wb) * mass;
        let ceiling = (1.0 + wa.max(wb)) * mass;
        // The field jumps at the ROI edges. On a cell straddling an edge both
        // the trapezoid and the true integral lie in [0, dx·M·peak].
        let peak = model.cloud_density(NatureChoice::Cloud1, c.x1).max(model.cloud_density(NatureChoice::Cloud2, c.x2));
        let mut worst = 0.0f64;
        for (t, row) in table.slices() {
            let rho: Vec<f64> = row.iter().map(|&(_, r)| r).collect();
            let integral = trapezoid(&rho, dx);
            let inside: Vec<bool> =
                row.iter().map(|&(x, _)| model.in_region_of_indeterminacy(&SpacetimePoint::new(t, x))).collect();
            let violation = if inside.iter().all(|&b| b) || inside.iter().all(|&b| !b) {
                (integral - mass).abs()
            } else {
                let edges = inside.windows(2).filter(|w| w[0] != w[1]).count() as f64;
                let slack = edges * dx * mass * peak;
                (floor - slack - integral).max(integral - ceiling - slack).max(0.0)
            };
            worst = worst.max(violation);
        }
        checks.push(Check::new("slice_mass_budget", worst, eps).with_note("distance of slice integrals from the allowed band"));
    } else {
        checks.push(Check::skipped("slice_mass_budget", eps, "grid does not cover and resolve both clouds"));
    }
    checks
}

fn scope_name(scope: Scope) -> String {
    match scope {
        Scope::All => "all".to_owned(),
        Scope::Class(c) => format!("{c:?}"),
    }
}

fn run_lattice(cfg: &ScenarioConfig, out: &mut Outputs, timing: &mut Timing) -> Result<(Outcome, Vec<Check>)> {
    let model = timing.time("setup", || cfg.lattice_model())?;
    let (observed, post) = cfg.scopes()?;
    let (t_min, t_max, nt) = cfg.time_axis()?;
    let distribution = final_configuration_distribution(&model, post)?;
    let (fc, sampled) = match cfg.fixed_final_configuration(&model, post)? {
        Some(fc) => (fc, false),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            (sample_final_configuration(&model, post, &mut rng)?, true)
        }
    };
    let born_probability = distribution.iter().find(|(c, _)| *c == fc).map_or(0.0, |(_, p)| *p);
    let (field, born) = timing.time("evaluate", || -> Result<_> {
        Ok((
            abl_mass_field(&model, observed, &fc, t_min, t_max, nt)?,
            born_mass_field(&model, observed, t_min, t_max, nt)?,
        ))
    })?;
    let field_path = out.path("field", out.format.extension());
    let born_path = out.path("born", out.format.extension());
    timing.time("emit", || -> Result<()> {
        emit::write_field(&field_path, &field, out.format)?;
        emit::write_field(&born_path, &born, out.format)
    })?;
    let checks = timing.time("verify", || -> Result<Vec<Check>> {
        let field = emit::read_field(&field_path, out.format)?;
        let born = emit::read_field(&born_path, out.format)?;
        lattice_checks(&model, observed, &fc, &field, &born)
    })?;
    let outcome = Outcome::FinalConfiguration {
        scope: scope_name(post),
        sites: fc.sites().to_vec(),
        born_probability,
        sampled,
    };
    Ok((outcome, checks))
}

/// Per-point ABL expectation from the literal measurement sequence.
pub fn oracle_mass_expectation(
    model: &LatticeModel,
    observed: Scope,
    fc: &FinalConfiguration,
    site: usize,
    t: f64,
) -> Result<f64> {
    let p_c = final_boundary_projector(model, fc)?;
    let rest = &LinearOperator::identity(model.dim()) - &p_c;
    let final_family = ProjectorFamily::new(vec![p_c.clone(), rest], vec![1.0, 0.0])?;
    let scenario = PrePostScenario::new(
        model.initial().clone(),
        mass_family_at(model, observed, site)?,
        p_c,
        model.hamiltonian().clone(),
        t,
        model.t_final(),
    )?;
    Ok(oracle_joint_distribution(&scenario, &final_family)?.conditioned()?.expectation())
}

pub fn lattice_checks(
    model: &LatticeModel,
    observed: Scope,
    fc: &FinalConfiguration,
    field: &FieldTable,
    born: &FieldTable,
) -> Result<Vec<Check>> {
    let spacing = model.spacing();
    let residuals = (0..field.len())
        .into_par_iter()
        .map(|k| {
            let site = (field.x[k] / spacing).round() as usize;
            let oracle = oracle_mass_expectation(model, observed, fc, site, field.t[k])?;
            Ok((field.rho[k] - oracle).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let oracle = residuals.into_iter().fold(0.0, f64::max);

    let total = model.scope_mass(observed);
    let range = field.rho.iter().map(|&v| (-v).max(v - total).max(0.0)).fold(0.0, f64::max);

    let conservation = born
        .slices()
        .iter()
        .map(|(_, row)| (row.iter().map(|&(_, r)| r).sum::<f64>() - total).abs())
        .fold(0.0, f64::max);

    Ok(vec![
        Check::new("abl_field_matches_oracle", oracle, TOL.structural).with_note("max absolute deviation"),
        Check::new("abl_field_in_mass_range", range, TOL.structural),
        Check::new("born_mass_conserved", conservation, TOL.structural),
    ])
}

fn run_abl_check(cfg: &ScenarioConfig, out: &mut Outputs, timing: &mut Timing) -> Result<(Outcome, Vec<Check>)> {
    let acfg = cfg.abl_check();
    if acfg.scenarios == 0 {
        return Err(RunError::validation("abl_check.scenarios", "must be at least 1"));
    }
    if !(2..=64).contains(&acfg.max_dim) {
        return Err(RunError::validation("abl_check.max_dim", "must lie in [2, 64]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scenarios = timing.time("setup", || {
        (0..acfg.scenarios).map(|_| random_scenario(&mut rng, acfg.max_dim)).collect::<Result<Vec<_>, _>>()
    })?;
    let rows = timing.time("evaluate", || {
        scenarios
            .par_iter()
            .map(|(s, fam)| {
                let closed = abl_evolved(s);
                let oracle = oracle_joint_distribution(s, fam).and_then(|j| j.conditioned());
                let residual = match (closed, oracle) {
                    (Ok(a), Ok(b)) => Some(
                        a.probabilities().iter().zip(b.probabilities()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
                    ),
                    (Err(beables_core::Error::ImpossiblePostSelection { .. }), Err(_)) => None,
                    (Err(e), _) | (_, Err(e)) => return Err(RunError::from(e)),
                };
                Ok(vec![
                    s.dim().to_string(),
                    s.intermediate().len().to_string(),
                    residual.map_or_else(|| "impossible".to_owned(), fmt_f64),
                ])
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let rows: Vec<Vec<String>> =
        rows.into_iter().enumerate().map(|(i, mut r)| {
            r.insert(0, i.to_string());
            r
        }).collect();
    let path = out.path("abl_check", "csv");
    timing.time("emit", || emit::write_table(&path, &["scenario", "dim", "outcomes", "residual"], &rows))?;
    let (worst, impossible) = timing.time("verify", || -> Result<(f64, usize)> {
        let (_, rows) = emit::read_table(&path)?;
        let mut worst = 0.0f64;
        let mut impossible = 0;
        for r in &rows {
            match r[3].as_str() {
                "impossible" => impossible += 1,
                s => {
                    let v: f64 = s.parse().map_err(|_| RunError::Invariant(format!("bad residual {s:?}")))?;
                    worst = worst.max(v);
                }
            }
        }
        Ok((worst, impossible))
    })?;
    let check = Check::new("abl_matches_oracle", worst, acfg.tolerance)
        .with_note(format!("{} scenarios, dim ≤ {}", acfg.scenarios, acfg.max_dim));
    Ok((Outcome::OracleSweep { scenarios: acfg.scenarios, impossible }, vec![check]))
}
