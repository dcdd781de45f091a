//! One- and two-photon "billiard" toy models in 1+1 dimensions.
//!
//! A massive body of mass M sits in a superposition a|cloud at x₁⟩ +
//! b|cloud at x₂⟩ (Gaussian profiles of widths σ₁, σ₂). Photons travel on
//! null lines, bounce off whichever cloud they meet, and escape to infinity;
//! Nature's late-time boundary condition records which branch the photons
//! reveal. Before the news of the bounce can reach a spacetime point y (the
//! region of indeterminacy, ROI), the mass density at y is the Born-weighted
//! average of both clouds; afterwards it is the chosen cloud alone.
//!
//! Units have c = 1. Rays are idealized point pulses.
//!
//! One photon: it moves right, reaches x₁ at t₁, and either reflects there
//! (cloud 1) or reaches x₂ at t₂ = t₁ + Δx and reflects (cloud 2).
//! Two photons: a second photon arrives from the right, reaching x₂ at t₁;
//! each photon reflects from the cloud it meets.
//!
//! Light-ray visibility uses the convention that a point on the ray's own
//! null line already sees it, so the ROI is the strict set
//! `t′ < t₁ − (x′ − x₁)` (and, for two photons, `t′ < t₁ + (x′ − x₂)`),
//! and ROI membership is exactly "no information-carrying ray visible".

use alloc::vec::Vec;

use rand::Rng;

use crate::abl::ConditionalDistribution;
use crate::error::{Error, Result};
use crate::field::{BeableField, GridSpec};
use crate::fmath;
use crate::tolerance::Tolerances;
use crate::C64;

const TOL: Tolerances = Tolerances::DEFAULT;

/// Gaussians are treated as exactly zero beyond this many widths.
pub const GAUSSIAN_CUTOFF: f64 = 8.0;

/// Default bound on σ / (x₂ − x₁) for the clouds to count as well separated.
pub const DEFAULT_SEPARATION_RATIO: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Photons {
    One,
    Two,
}

impl Photons {
    pub fn count(self) -> usize {
        match self {
            Photons::One => 1,
            Photons::Two => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToyModelConfig {
    pub x1: f64,
    pub x2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub amp_a: C64,
    pub amp_b: C64,
    pub mass: f64,
    pub t1: f64,
    pub photons: Photons,
    pub separation_ratio: f64,
}

impl ToyModelConfig {
    /// Equal widths, real amplitudes √p and √(1 − p), default separation.
    pub fn simple(photons: Photons, x1: f64, x2: f64, sigma: f64, p: f64, mass: f64, t1: f64) -> Self {
        Self {
            x1,
            x2,
            sigma1: sigma,
            sigma2: sigma,
            amp_a: C64::new(fmath::sqrt(p), 0.0),
            amp_b: C64::new(fmath::sqrt(1.0 - p), 0.0),
            mass,
            t1,
            photons,
            separation_ratio: DEFAULT_SEPARATION_RATIO,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NatureChoice {
    Cloud1,
    Cloud2,
}

impl NatureChoice {
    pub fn index(self) -> usize {
        match self {
            NatureChoice::Cloud1 => 0,
            NatureChoice::Cloud2 => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            NatureChoice::Cloud1 => NatureChoice::Cloud2,
            NatureChoice::Cloud2 => NatureChoice::Cloud1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x: f64,
}

impl SpacetimePoint {
    pub fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
}

/// x(t) = x₀ ± (t − t₀) for t ≥ t₀.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LightRay {
    pub origin: SpacetimePoint,
    pub direction: Direction,
}

impl LightRay {
    pub fn left(t: f64, x: f64) -> Self {
        Self { origin: SpacetimePoint::new(t, x), direction: Direction::Left }
    }

    pub fn right(t: f64, x: f64) -> Self {
        Self { origin: SpacetimePoint::new(t, x), direction: Direction::Right }
    }

    pub fn position_at(&self, t: f64) -> f64 {
        match self.direction {
            Direction::Left => self.origin.x - (t - self.origin.t),
            Direction::Right => self.origin.x + (t - self.origin.t),
        }
    }
}

/// Whether the ray eventually passes outside the future light cone of `y`,
/// so that a late-time record of it is spacelike to or in the past of `y`.
/// Points on the ray's own null line count as seeing it.
pub fn ray_visible_outside_cone(ray: &LightRay, y: &SpacetimePoint) -> bool {
    let o = ray.origin;
    match ray.direction {
        Direction::Left => y.t + y.x >= o.t + o.x,
        Direction::Right => y.t - y.x >= o.t - o.x,
    }
}

/// One branch of the superposition at a given time.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub choice: NatureChoice,
    pub amplitude: C64,
    pub cloud_center: f64,
    /// Photon positions, in photon order.
    pub photons: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RayPolyline {
    pub branch: NatureChoice,
    pub photon: usize,
    pub vertices: Vec<SpacetimePoint>,
}

/// A validated toy model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToyModel {
    cfg: ToyModelConfig,
}

impl ToyModel {
    pub fn new(cfg: ToyModelConfig) -> Result<Self> {
        let finite = [cfg.x1, cfg.x2, cfg.sigma1, cfg.sigma2, cfg.mass, cfg.t1, cfg.separation_ratio];
        if finite.iter().any(|v| !v.is_finite()) || !(cfg.amp_a.is_finite() && cfg.amp_b.is_finite()) {
            return Err(Error::validation("toy", "all parameters must be finite"));
        }
        if cfg.x1 >= cfg.x2 {
            return Err(Error::validation("toy.x2", "must exceed x1"));
        }
        if !(cfg.mass > 0.0) {
            return Err(Error::validation("toy.mass", "must be positive"));
        }
        if !(cfg.separation_ratio > 0.0) {
            return Err(Error::validation("toy.separation_ratio", "must be positive"));
        }
        let limit = cfg.separation_ratio * (cfg.x2 - cfg.x1);
        for (name, s) in [("toy.sigma1", cfg.sigma1), ("toy.sigma2", cfg.sigma2)] {
            if !(s > 0.0 && s <= limit) {
                return Err(Error::validation(name, alloc::format!("must lie in (0, {limit}]")));
            }
        }
        let norm = cfg.amp_a.norm_sqr() + cfg.amp_b.norm_sqr();
        if fmath::abs(norm - 1.0) > TOL.scalar {
            return Err(Error::validation("toy.amp_a/amp_b", alloc::format!("|a|² + |b|² = {norm}, expected 1")));
        }
        Ok(Self { cfg })
    }

    pub fn config(&self) -> &ToyModelConfig {
        &self.cfg
    }

    pub fn photons(&self) -> Photons {
        self.cfg.photons
    }

    pub fn separation(&self) -> f64 {
        self.cfg.x2 - self.cfg.x1
    }

    pub fn t1(&self) -> f64 {
        self.cfg.t1
    }

    pub fn t2(&self) -> f64 {
        self.cfg.t1 + self.separation()
    }

    /// (|a|², |b|²).
    pub fn born_weights(&self) -> (f64, f64) {
        (self.cfg.amp_a.norm_sqr(), self.cfg.amp_b.norm_sqr())
    }

    fn center(&self, choice: NatureChoice) -> f64 {
        match choice {
            NatureChoice::Cloud1 => self.cfg.x1,
            NatureChoice::Cloud2 => self.cfg.x2,
        }
    }

    fn amplitude(&self, choice: NatureChoice) -> C64 {
        match choice {
            NatureChoice::Cloud1 => self.cfg.amp_a,
            NatureChoice::Cloud2 => self.cfg.amp_b,
        }
    }

    /// Photon positions in each branch at time `t`.
    pub fn branch_structure(&self, t: f64) -> [Branch; 2] {
        let (x1, x2, t1, t2) = (self.cfg.x1, self.cfg.x2, self.cfg.t1, self.t2());
        let photons = |choice: NatureChoice| -> Vec<f64> {
            let cloud1 = choice == NatureChoice::Cloud1;
            match self.cfg.photons {
                Photons::One => alloc::vec![if t <= t1 {
                    x1 + (t - t1)
                } else if cloud1 {
                    x1 - (t - t1)
                } else if t <= t2 {
                    x1 + (t - t1)
                } else {
                    x2 - (t - t2)
                }],
                Photons::Two => {
                    let (a, b) = if t <= t1 {
                        (x1 + (t - t1), x2 - (t - t1))
                    } else if cloud1 {
                        (x1 - (t - t1), if t <= t2 { x2 - (t - t1) } else { x1 + (t - t2) })
                    } else {
                        (if t <= t2 { x1 + (t - t1) } else { x2 - (t - t2) }, x2 + (t - t1))
                    };
                    alloc::vec![a, b]
                }
            }
        };
        [NatureChoice::Cloud1, NatureChoice::Cloud2].map(|choice| Branch {
            choice,
            amplitude: self.amplitude(choice),
            cloud_center: self.center(choice),
            photons: photons(choice),
        })
    }

    /// The rays leaving the clouds after the bounces in branch `choice`, in
    /// photon order.
    pub fn outgoing_rays(&self, choice: NatureChoice) -> Vec<LightRay> {
        let (x1, x2, t1, t2) = (self.cfg.x1, self.cfg.x2, self.cfg.t1, self.t2());
        match (self.cfg.photons, choice) {
            (Photons::One, NatureChoice::Cloud1) => alloc::vec![LightRay::left(t1, x1)],
            (Photons::One, NatureChoice::Cloud2) => alloc::vec![LightRay::left(t2, x2)],
            (Photons::Two, NatureChoice::Cloud1) => alloc::vec![LightRay::left(t1, x1), LightRay::right(t2, x1)],
            (Photons::Two, NatureChoice::Cloud2) => alloc::vec![LightRay::left(t2, x2), LightRay::right(t1, x2)],
        }
    }

    /// The outgoing rays of a branch that `y` can see: the part of the
    /// late-time record that bears on `y`.
    fn signature(&self, choice: NatureChoice, y: &SpacetimePoint) -> Vec<LightRay> {
        self.outgoing_rays(choice).into_iter().filter(|r| ray_visible_outside_cone(r, y)).collect()
    }

    /// t < t₁ − (x − x₁), and for two photons also t < t₁ + (x − x₂),
    /// compared in null coordinates t ± x so that points on a ray's own null
    /// line round exactly as in [`ray_visible_outside_cone`].
    pub fn in_region_of_indeterminacy(&self, y: &SpacetimePoint) -> bool {
        let (x1, x2, t1) = (self.cfg.x1, self.cfg.x2, self.cfg.t1);
        let left = y.t + y.x < t1 + x1;
        match self.cfg.photons {
            Photons::One => left,
            Photons::Two => left && y.t - y.x < t1 - x2,
        }
    }

    /// Earliest time at which (t, x) lies outside the ROI.
    pub fn collapse_time_at(&self, x: f64) -> f64 {
        let (x1, x2, t1) = (self.cfg.x1, self.cfg.x2, self.cfg.t1);
        let left = t1 - (x - x1);
        match self.cfg.photons {
            Photons::One => left,
            Photons::Two => left.min(t1 + (x - x2)),
        }
    }

    /// |ψ_j(x)|²: a normalized Gaussian about the cloud centre, cut off at
    /// [`GAUSSIAN_CUTOFF`] widths.
    pub fn cloud_density(&self, choice: NatureChoice, x: f64) -> f64 {
        let (mu, sigma) = match choice {
            NatureChoice::Cloud1 => (self.cfg.x1, self.cfg.sigma1),
            NatureChoice::Cloud2 => (self.cfg.x2, self.cfg.sigma2),
        };
        let z = (x - mu) / sigma;
        if fmath::abs(z) > GAUSSIAN_CUTOFF {
            return 0.0;
        }
        fmath::exp(-0.5 * z * z) / (sigma * fmath::sqrt(2.0 * core::f64::consts::PI))
    }

    /// (M|ψ₁(x)|², M|ψ₂(x)|²): the mass density at x in each branch.
    pub fn branch_densities(&self, x: f64) -> [f64; 2] {
        let m = self.cfg.mass;
        [m * self.cloud_density(NatureChoice::Cloud1, x), m * self.cloud_density(NatureChoice::Cloud2, x)]
    }

    /// The ABL reduction inside the ROI: no ray distinguishing the branches
    /// is visible from `y`, every branch is compatible with either boundary
    /// condition, and the conditional reduces to the Born weights.
    pub fn born_reduction_check(&self, y: &SpacetimePoint) -> Result<ConditionalDistribution> {
        if !self.in_region_of_indeterminacy(y) {
            return Err(Error::Contract(alloc::format!("({}, {}) is outside the region of indeterminacy", y.t, y.x)));
        }
        self.rel_conditional(y, NatureChoice::Cloud1)
    }

    /// Pr(branch | initial state, boundary condition visible from `y`), with
    /// outcome labels the branch mass densities at `y.x`.
    ///
    /// A branch is compatible with the boundary condition when it predicts
    /// the same visible rays as the branch Nature chose; compatible branches
    /// keep their Born weight, the others get zero.
    pub fn rel_conditional(&self, y: &SpacetimePoint, choice: NatureChoice) -> Result<ConditionalDistribution> {
        let seen = self.signature(choice, y);
        let (wa, wb) = self.born_weights();
        let compatible = [NatureChoice::Cloud1, NatureChoice::Cloud2].map(|b| self.signature(b, y) == seen);
        let labels = self.branch_densities(y.x).to_vec();
        if compatible.iter().all(|&c| c) {
            // Pr(c | b_i) = 1 for every branch: the denominator is exactly one.
            return ConditionalDistribution::new(labels, alloc::vec![wa, wb]);
        }
        let weights = [wa, wb].iter().zip(compatible).map(|(&w, c)| if c { w } else { 0.0 }).collect();
        ConditionalDistribution::from_weights(labels, weights)
    }

    /// ⟨ρ(x; t)⟩ at one point given Nature's choice.
    pub fn beable_value(&self, choice: NatureChoice, y: &SpacetimePoint) -> f64 {
        let [r1, r2] = self.branch_densities(y.x);
        if self.in_region_of_indeterminacy(y) {
            let (wa, wb) = self.born_weights();
            wa * r1 + wb * r2
        } else {
            match choice {
                NatureChoice::Cloud1 => r1,
                NatureChoice::Cloud2 => r2,
            }
        }
    }

    pub fn beable_field(&self, choice: NatureChoice, grid: &GridSpec) -> Result<BeableField> {
        BeableField::try_from_fn(*grid, |t, x| Ok(self.beable_value(choice, &SpacetimePoint::new(t, x))))
    }

    /// Photon worldlines over [t_min, t_max], one polyline per branch and
    /// photon, with vertices at the interval ends and at any bounce inside it.
    pub fn ray_polylines(&self, t_min: f64, t_max: f64) -> Vec<RayPolyline> {
        let mut times = alloc::vec![t_min];
        times.extend([self.t1(), self.t2()].into_iter().filter(|&t| t > t_min && t < t_max));
        if t_max > t_min {
            times.push(t_max);
        }
        let snapshots: Vec<[Branch; 2]> = times.iter().map(|&t| self.branch_structure(t)).collect();
        let mut out = Vec::new();
        for b in 0..2 {
            for p in 0..self.cfg.photons.count() {
                out.push(RayPolyline {
                    branch: snapshots[0][b].choice,
                    photon: p,
                    vertices: times.iter().zip(&snapshots).map(|(&t, s)| SpacetimePoint::new(t, s[b].photons[p])).collect(),
                });
            }
        }
        out
    }

    /// Reflection x → x₁ + x₂ − x, exchanging the clouds and their data.
    pub fn mirrored(&self) -> Self {
        let c = self.cfg;
        Self { cfg: ToyModelConfig { sigma1: c.sigma2, sigma2: c.sigma1, amp_a: c.amp_b, amp_b: c.amp_a, ..c } }
    }

    /// Shift of the whole configuration by (dt, dx).
    pub fn translated(&self, dt: f64, dx: f64) -> Self {
        let c = self.cfg;
        Self { cfg: ToyModelConfig { x1: c.x1 + dx, x2: c.x2 + dx, t1: c.t1 + dt, ..c } }
    }
}

/// Nature's choice of late-time boundary condition: Cloud1 with probability
/// |a|². Consumes exactly one `f64` from `rng`.
pub fn sample_nature_choice<R: Rng + ?Sized>(model: &ToyModel, rng: &mut R) -> NatureChoice {
    if rng.gen::<f64>() < model.born_weights().0 {
        NatureChoice::Cloud1
    } else {
        NatureChoice::Cloud2
    }
}
