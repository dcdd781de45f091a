//! Scenario files: TOML with a mandatory `schema = 1` and no unknown keys.
//!
//! ```toml
//! schema = 1
//! kind = "toy1"          # abl-check | nonrel-nparticle | nonrel-classes | toy1 | toy2
//! seed = 42
//!
//! [output]
//! prefix = "out/toy1"
//! format = "csv"         # or "json"
//!
//! [grid]
//! x_min = -1.0
//! x_max = 2.0
//! nx = 301
//! t_min = 0.0
//! t_max = 8.0
//! nt = 161
//!
//! [toy]
//! x1 = 0.0
//! x2 = 1.0
//! sigma1 = 0.05
//! sigma2 = 0.05
//! amp_a = [0.7071067811865476, 0.0]
//! amp_b = [0.7071067811865476, 0.0]
//! mass = 1.0
//! t1 = 5.0
//! ```
//!
//! Lattice kinds take `[lattice]` (with `[[lattice.particles]]`) and a
//! `[grid]` holding only the time axis; the space axis is the lattice.

use std::path::Path;

use beables_core::field::GridSpec;
use beables_core::hilbert::LinearOperator;
use beables_core::nonrel::{
    hopping_contact_hamiltonian, product_state, symmetrize, Boundary, Class, FinalConfiguration, HamiltonianSpec,
    LatticeModel, ParticleSpec, Scope, Statistics,
};
use beables_core::relmodels::{Photons, ToyModel, ToyModelConfig, DEFAULT_SEPARATION_RATIO};
use beables_core::C64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RunError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    AblCheck,
    NonrelNparticle,
    NonrelClasses,
    Toy1,
    Toy2,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::AblCheck => "abl-check",
            Kind::NonrelNparticle => "nonrel-nparticle",
            Kind::NonrelClasses => "nonrel-classes",
            Kind::Toy1 => "toy1",
            Kind::Toy2 => "toy2",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub kind: Kind,
    pub seed: u64,
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toy: Option<ToyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abl_check: Option<AblCheckConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub prefix: String,
    #[serde(default)]
    pub format: Format,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyConfig {
    pub x1: f64,
    pub x2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    /// [re, im]
    pub amp_a: [f64; 2],
    pub amp_b: [f64; 2],
    pub mass: f64,
    pub t1: f64,
    #[serde(default = "default_separation_ratio")]
    pub separation_ratio: f64,
}

fn default_separation_ratio() -> f64 {
    DEFAULT_SEPARATION_RATIO
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryConfig {
    Open,
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatisticsConfig {
    Distinguishable,
    Boson,
    Fermion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassConfig {
    B,
    F,
}

impl From<ClassConfig> for Class {
    fn from(c: ClassConfig) -> Self {
        match c {
            ClassConfig::B => Class::B,
            ClassConfig::F => Class::F,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleConfig {
    pub mass: f64,
    pub statistics: StatisticsConfig,
    pub class: ClassConfig,
    /// Real parts of the initial single-particle orbital, one per site.
    pub orbital: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbital_imag: Option<Vec<f64>>,
}

/// An explicit Hamiltonian as row-major real and (optional) imaginary parts.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixConfig {
    pub real: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub sites: usize,
    #[serde(default = "one")]
    pub spacing: f64,
    pub t_final: f64,
    #[serde(default = "open")]
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub hopping: f64,
    #[serde(default)]
    pub contact: f64,
    #[serde(default)]
    pub mass_scaled: bool,
    /// Replaces the hopping/contact Hamiltonian when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<MatrixConfig>,
    pub particles: Vec<ParticleConfig>,
    /// Class whose mass field is reported (nonrel-classes only); the other
    /// class is post-selected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observe: Option<ClassConfig>,
    /// Fixed late-time sites of the post-selected particles, in label order.
    /// Sampled from the Born distribution with the seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_sites: Option<Vec<usize>>,
}

fn one() -> f64 {
    1.0
}

fn open() -> BoundaryConfig {
    BoundaryConfig::Open
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblCheckConfig {
    #[serde(default = "default_scenarios")]
    pub scenarios: usize,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_scenarios() -> usize {
    100
}

fn default_max_dim() -> usize {
    16
}

fn default_tolerance() -> f64 {
    1e-10
}

pub fn parse(text: &str) -> Result<ScenarioConfig> {
    // Check the version before the full schema so old files get a clear message.
    let raw: toml::Table = text.parse().map_err(|e: toml::de::Error| RunError::validation("config", e.message()))?;
    match raw.get("schema").and_then(toml::Value::as_integer) {
        Some(v) if v == SCHEMA_VERSION as i64 => {}
        Some(v) => return Err(RunError::validation("schema", format!("version {v} is not supported (expected 1)"))),
        None => return Err(RunError::validation("schema", "missing mandatory `schema = 1`")),
    }
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        RunError::validation("config", msg)
    })?;
    cfg.check_sections()?;
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
    parse(&text)
}

impl ScenarioConfig {
    fn check_sections(&self) -> Result<()> {
        let (toy, lattice, abl) = match self.kind {
            Kind::AblCheck => (false, false, true),
            Kind::NonrelNparticle | Kind::NonrelClasses => (false, true, false),
            Kind::Toy1 | Kind::Toy2 => (true, false, false),
        };
        for (name, wanted, present) in [
            ("toy", toy, self.toy.is_some()),
            ("lattice", lattice, self.lattice.is_some()),
            ("abl_check", abl, self.abl_check.is_some()),
        ] {
            if present && !wanted {
                return Err(RunError::validation(name, format!("not used by kind {}", self.kind.name())));
            }
            if wanted && !present && name != "abl_check" {
                return Err(RunError::validation(name, format!("required by kind {}", self.kind.name())));
            }
        }
        let needs_grid = self.kind != Kind::AblCheck;
        match (&self.grid, needs_grid) {
            (None, true) => return Err(RunError::validation("grid", "required")),
            (Some(_), false) => return Err(RunError::validation("grid", "not used by kind abl-check")),
            _ => {}
        }
        if self.output.prefix.is_empty() {
            return Err(RunError::validation("output.prefix", "must not be empty"));
        }
        Ok(())
    }

    pub fn abl_check(&self) -> AblCheckConfig {
        self.abl_check.clone().unwrap_or(AblCheckConfig {
            scenarios: default_scenarios(),
            max_dim: default_max_dim(),
            tolerance: default_tolerance(),
        })
    }

    pub fn toy_model(&self) -> Result<ToyModel> {
        let toy = self.toy.as_ref().ok_or_else(|| RunError::validation("toy", "missing"))?;
        let photons = if self.kind == Kind::Toy2 { Photons::Two } else { Photons::One };
        let cfg = ToyModelConfig {
            x1: toy.x1,
            x2: toy.x2,
            sigma1: toy.sigma1,
            sigma2: toy.sigma2,
            amp_a: C64::new(toy.amp_a[0], toy.amp_a[1]),
            amp_b: C64::new(toy.amp_b[0], toy.amp_b[1]),
            mass: toy.mass,
            t1: toy.t1,
            photons,
            separation_ratio: toy.separation_ratio,
        };
        ToyModel::new(cfg).map_err(|e| prefix_field(e.into(), "toy"))
    }

    /// Full spacetime grid for toy kinds.
    pub fn toy_grid(&self) -> Result<GridSpec> {
        let g = self.grid.as_ref().ok_or_else(|| RunError::validation("grid", "missing"))?;
        let (Some(x_min), Some(x_max), Some(nx)) = (g.x_min, g.x_max, g.nx) else {
            return Err(RunError::validation("grid", "toy models need x_min, x_max and nx"));
        };
        Ok(GridSpec::new(x_min, x_max, nx, g.t_min, g.t_max, g.nt)?)
    }

    /// Time axis for lattice kinds.
    pub fn time_axis(&self) -> Result<(f64, f64, usize)> {
        let g = self.grid.as_ref().ok_or_else(|| RunError::validation("grid", "missing"))?;
        if g.x_min.is_some() || g.x_max.is_some() || g.nx.is_some() {
            return Err(RunError::validation("grid", "lattice kinds take their x axis from the lattice sites"));
        }
        Ok((g.t_min, g.t_max, g.nt))
    }

    pub fn lattice_model(&self) -> Result<LatticeModel> {
        let lat = self.lattice.as_ref().ok_or_else(|| RunError::validation("lattice", "missing"))?;
        let particles: Vec<ParticleSpec> = lat
            .particles
            .iter()
            .map(|p| {
                let statistics = match p.statistics {
                    StatisticsConfig::Distinguishable => Statistics::Distinguishable,
                    StatisticsConfig::Boson => Statistics::Boson,
                    StatisticsConfig::Fermion => Statistics::Fermion,
                };
                ParticleSpec::new(p.mass, statistics, p.class.into())
            })
            .collect();
        if self.kind == Kind::NonrelNparticle && lat.observe.is_some() {
            return Err(RunError::validation("lattice.observe", "only used by nonrel-classes"));
        }
        let mut orbitals = Vec::with_capacity(lat.particles.len());
        for (i, p) in lat.particles.iter().enumerate() {
            let imag = p.orbital_imag.clone().unwrap_or_else(|| vec![0.0; p.orbital.len()]);
            if imag.len() != p.orbital.len() {
                return Err(RunError::validation(
                    format!("lattice.particles[{i}].orbital_imag"),
                    "length must match orbital",
                ));
            }
            orbitals.push(p.orbital.iter().zip(&imag).map(|(&re, &im)| C64::new(re, im)).collect::<Vec<_>>());
        }
        let product = product_state(lat.sites, &orbitals).map_err(|e| prefix_field(e.into(), "lattice"))?;
        let initial = symmetrize(lat.sites, &particles, &product).map_err(|e| prefix_field(e.into(), "lattice"))?;
        let hamiltonian = match &lat.hamiltonian {
            Some(m) => explicit_matrix(m, initial.dim())?,
            None => {
                let spec = HamiltonianSpec {
                    hopping: lat.hopping,
                    contact: lat.contact,
                    boundary: match lat.boundary {
                        BoundaryConfig::Open => Boundary::Open,
                        BoundaryConfig::Periodic => Boundary::Periodic,
                    },
                    mass_scaled: lat.mass_scaled,
                };
                hopping_contact_hamiltonian(lat.sites, &particles, &spec)?
            }
        };
        let model = LatticeModel::new(lat.sites, lat.spacing, particles, hamiltonian, initial, lat.t_final)
            .map_err(|e| prefix_field(e.into(), "lattice"))?;
        // Identical particles must not be told apart by the Hamiltonian.
        for i in 0..model.n_particles() {
            for j in (i + 1)..model.n_particles() {
                let (a, b) = (model.particles()[i].statistics, model.particles()[j].statistics);
                if a == b && a != Statistics::Distinguishable {
                    let swap = model.swap_operator(i, j);
                    let r = model.hamiltonian().commutator(&swap).max_abs();
                    if r > beables_core::Tolerances::DEFAULT.structural {
                        return Err(RunError::validation(
                            "lattice.hamiltonian",
                            format!("does not commute with exchanging particles {i} and {j} (residual {r:e})"),
                        ));
                    }
                }
            }
        }
        Ok(model)
    }

    /// (observed scope, post-selected scope) for lattice kinds.
    pub fn scopes(&self) -> Result<(Scope, Scope)> {
        match self.kind {
            Kind::NonrelNparticle => Ok((Scope::All, Scope::All)),
            Kind::NonrelClasses => {
                let lat = self.lattice.as_ref().ok_or_else(|| RunError::validation("lattice", "missing"))?;
                let observed: Class = lat.observe.unwrap_or(ClassConfig::B).into();
                Ok((Scope::Class(observed), Scope::Class(observed.other())))
            }
            _ => Err(RunError::Invariant(format!("kind {} has no lattice scopes", self.kind.name()))),
        }
    }

    pub fn fixed_final_configuration(&self, model: &LatticeModel, scope: Scope) -> Result<Option<FinalConfiguration>> {
        let lat = self.lattice.as_ref().ok_or_else(|| RunError::validation("lattice", "missing"))?;
        match &lat.final_sites {
            None => Ok(None),
            Some(sites) => Ok(Some(
                FinalConfiguration::new(model, scope, sites.clone())
                    .map_err(|e| prefix_field(e.into(), "lattice"))?
                    .canonical(model),
            )),
        }
    }
}

fn explicit_matrix(m: &MatrixConfig, dim: usize) -> Result<LinearOperator> {
    let imag = m.imag.clone().unwrap_or_else(|| vec![vec![0.0; dim]; dim]);
    if m.real.len() != dim || imag.len() != dim || m.real.iter().chain(&imag).any(|r| r.len() != dim) {
        return Err(RunError::validation("lattice.hamiltonian", format!("must be {dim}×{dim}")));
    }
    let entries: Vec<C64> =
        m.real.iter().zip(&imag).flat_map(|(re, im)| re.iter().zip(im).map(|(&a, &b)| C64::new(a, b))).collect();
    let h = LinearOperator::from_rows(dim, &entries)?;
    let r = h.hermiticity_residual();
    if r > beables_core::Tolerances::DEFAULT.scalar {
        return Err(RunError::validation("lattice.hamiltonian", format!("not Hermitian (residual {r:e})")));
    }
    Ok(h)
}

fn prefix_field(e: RunError, section: &str) -> RunError {
    match e {
        RunError::Validation { field, constraint } if !field.starts_with(section) => {
            RunError::Validation { field: format!("{section}.{field}"), constraint }
        }
        other => other,
    }
}

