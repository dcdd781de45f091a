//! Mass-density beables: the unconditioned (Born) class densities and the
//! ABL-conditioned mass field given a late-time boundary configuration.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::projectors::{exchange_group, final_boundary_projector, mass_family_at};
use super::{LatticeModel, Scope, Statistics, TOL};
use crate::abl::{abl_evolved_with, ConditionalDistribution, PrePostScenario};
use crate::error::{Error, Result};
use crate::field::{BeableField, GridSpec};
use crate::par;

/// Sites occupied at time T by the particles of one scope, listed in label
/// order. Identical particles are matched as a multiset, so two
/// configurations differing by a permutation within an exchange group
/// describe the same boundary condition; [`FinalConfiguration::canonical`]
/// picks the sorted representative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinalConfiguration {
    scope: Scope,
    sites: Vec<usize>,
}

impl FinalConfiguration {
    pub fn new(model: &LatticeModel, scope: Scope, sites: Vec<usize>) -> Result<Self> {
        let fc = Self { scope, sites };
        fc.check_against(model)?;
        Ok(fc)
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub(crate) fn check_against(&self, model: &LatticeModel) -> Result<()> {
        let labels = model.labels_in(self.scope);
        if labels.len() != self.sites.len() {
            return Err(Error::validation(
                "final.sites",
                format!("{} sites given for {} particles in scope", self.sites.len(), labels.len()),
            ));
        }
        if let Some(&x) = self.sites.iter().find(|&&x| x >= model.sites()) {
            return Err(Error::validation("final.sites", format!("site {x} out of range")));
        }
        Ok(())
    }

    /// Exchange groups inside the scope, each with its sorted site multiset.
    pub(crate) fn groups(&self, model: &LatticeModel) -> Vec<(Vec<usize>, Vec<usize>)> {
        let labels = model.labels_in(self.scope);
        let mut out: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        for &i in &labels {
            if out.iter().any(|(g, _)| g.contains(&i)) {
                continue;
            }
            let group: Vec<usize> = exchange_group(model, i).into_iter().filter(|j| labels.contains(j)).collect();
            let mut wanted: Vec<usize> =
                group.iter().map(|j| self.sites[labels.iter().position(|l| l == j).expect("in scope")]).collect();
            wanted.sort_unstable();
            out.push((group, wanted));
        }
        out
    }

    /// Same boundary condition with sites sorted within each exchange group.
    pub fn canonical(&self, model: &LatticeModel) -> Self {
        let labels = model.labels_in(self.scope);
        let mut sites = self.sites.clone();
        for (group, wanted) in self.groups(model) {
            for (j, x) in group.iter().zip(wanted) {
                sites[labels.iter().position(|l| l == j).expect("in scope")] = x;
            }
        }
        Self { scope: self.scope, sites }
    }
}

fn check_time(model: &LatticeModel, t: f64) -> Result<()> {
    if !(t.is_finite() && (0.0..=model.t_final()).contains(&t)) {
        return Err(Error::validation("t", format!("{t} outside [0, {}]", model.t_final())));
    }
    Ok(())
}

/// Mass per site of one scope at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct MassDistribution {
    site_masses: Vec<f64>,
}

impl MassDistribution {
    pub fn site_masses(&self) -> &[f64] {
        &self.site_masses
    }

    pub fn total(&self) -> f64 {
        self.site_masses.iter().sum()
    }
}

/// Σ_{i∈scope} m_i ⟨ψ(t)|P_i^x|ψ(t)⟩ for every site x.
pub fn mass_distribution(model: &LatticeModel, scope: Scope, t: f64) -> Result<MassDistribution> {
    check_time(model, t)?;
    let psi = model.state_at(t);
    let labels = model.labels_in(scope);
    let mut site_masses = alloc::vec![0.0; model.sites()];
    for (k, a) in psi.amplitudes().iter().enumerate() {
        let w = a.norm_sqr();
        let c = model.configuration(k);
        for &i in &labels {
            site_masses[c[i]] += model.particles()[i].mass * w;
        }
    }
    Ok(MassDistribution { site_masses })
}

pub fn class_mass_density(model: &LatticeModel, scope: Scope, x: usize, t: f64) -> Result<f64> {
    model.check_site(x)?;
    Ok(mass_distribution(model, scope, t)?.site_masses[x])
}

fn site_time_grid(model: &LatticeModel, t_min: f64, t_max: f64, nt: usize) -> Result<GridSpec> {
    check_time(model, t_min)?;
    check_time(model, t_max)?;
    let x_max = model.coordinate(model.sites() - 1);
    GridSpec::new(0.0, x_max, model.sites(), t_min, t_max, nt)
}

/// Unconditioned class density on all sites × `nt` times in [t_min, t_max].
pub fn born_mass_field(model: &LatticeModel, scope: Scope, t_min: f64, t_max: f64, nt: usize) -> Result<BeableField> {
    let grid = site_time_grid(model, t_min, t_max, nt)?;
    let rows = par::map_indices(nt, |j| mass_distribution(model, scope, grid.t(j)));
    let mut values = Vec::with_capacity(grid.len());
    for row in rows {
        values.extend(row?.site_masses);
    }
    BeableField::new(grid, values)
}

/// ABL distribution of the mass found at site `x` at time `t` among the
/// particles of `scope`, given ψ₀ at time 0 and `final_config` at T.
/// The label 0 stands for "no single in-scope particle at x".
pub fn abl_mass_distribution(
    model: &LatticeModel,
    scope: Scope,
    final_config: &FinalConfiguration,
    x: usize,
    t: f64,
) -> Result<ConditionalDistribution> {
    check_time(model, t)?;
    let scenario = PrePostScenario::new(
        model.initial().clone(),
        mass_family_at(model, scope, x)?,
        final_boundary_projector(model, final_config)?,
        model.hamiltonian().clone(),
        t,
        model.t_final(),
    )?;
    abl_evolved_with(&scenario, model.propagator())
}

/// Expected ABL mass of `scope` at every site and `nt` times in
/// [t_min, t_max], conditioned on `final_config` (usually the other class).
///
/// Under the no-overlap reading the field agrees with [`class_mass_density`]
/// whenever the boundary condition is trivial and at most one in-scope
/// particle can occupy a site.
pub fn abl_mass_field(
    model: &LatticeModel,
    scope: Scope,
    final_config: &FinalConfiguration,
    t_min: f64,
    t_max: f64,
    nt: usize,
) -> Result<BeableField> {
    let grid = site_time_grid(model, t_min, t_max, nt)?;
    let final_projector = final_boundary_projector(model, final_config)?;
    let families = (0..model.sites()).map(|x| mass_family_at(model, scope, x)).collect::<Result<Vec<_>>>()?;
    let sites = model.sites();
    let values = par::map_indices(grid.len(), |k| {
        let scenario = PrePostScenario::new(
            model.initial().clone(),
            families[k % sites].clone(),
            final_projector.clone(),
            model.hamiltonian().clone(),
            grid.t(k / sites),
            model.t_final(),
        )?;
        Ok(abl_evolved_with(&scenario, model.propagator())?.expectation())
    });
    BeableField::new(grid, values.into_iter().collect::<Result<Vec<f64>>>()?)
}

/// Born probabilities at T of every distinct boundary configuration of
/// `scope`, in canonical form and lexicographic order. Configurations of
/// probability below the impossibility threshold are omitted.
pub fn final_configuration_distribution(model: &LatticeModel, scope: Scope) -> Result<Vec<(FinalConfiguration, f64)>> {
    let psi = model.state_at(model.t_final());
    let labels = model.labels_in(scope);
    let mut weights: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (k, a) in psi.amplitudes().iter().enumerate() {
        let c = model.configuration(k);
        let fc = FinalConfiguration { scope, sites: labels.iter().map(|&i| c[i]).collect() }.canonical(model);
        *weights.entry(fc.sites).or_insert(0.0) += a.norm_sqr();
    }
    Ok(weights
        .into_iter()
        .filter(|&(_, w)| w >= TOL.impossibility)
        .map(|(sites, w)| (FinalConfiguration { scope, sites }, w))
        .collect())
}

/// Nature's draw of the late-time configuration of `scope` from the Born
/// distribution at T. Consumes exactly one `f64` from `rng`.
pub fn sample_final_configuration<R: Rng + ?Sized>(
    model: &LatticeModel,
    scope: Scope,
    rng: &mut R,
) -> Result<FinalConfiguration> {
    let dist = final_configuration_distribution(model, scope)?;
    let total: f64 = dist.iter().map(|(_, w)| w).sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (fc, w) in &dist {
        acc += w;
        if u < acc {
            return Ok(fc.clone());
        }
    }
    dist.last().map(|(fc, _)| fc.clone()).ok_or(Error::ImpossiblePostSelection { denominator: total })
}

/// True when every exchange group of the model has at most one member in
/// `scope`, i.e. single-label observables in that scope are physical.
pub fn scope_is_labelled(model: &LatticeModel, scope: Scope) -> bool {
    model.labels_in(scope).iter().all(|&i| {
        model.particles()[i].statistics == Statistics::Distinguishable || exchange_group(model, i).len() == 1
    })
}
