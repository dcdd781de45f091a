mod common;

use beables_core::field::{trapezoid, GridSpec};
use beables_core::relmodels::{
    ray_visible_outside_cone, sample_nature_choice, LightRay, NatureChoice, Photons, SpacetimePoint, ToyModel,
    ToyModelConfig,
};
use beables_core::{Error, C64};
use common::rng;
use proptest::prelude::*;
use rand::Rng;

const CHOICES: [NatureChoice; 2] = [NatureChoice::Cloud1, NatureChoice::Cloud2];

fn toy(photons: Photons, p: f64) -> ToyModel {
    ToyModel::new(ToyModelConfig::simple(photons, 0.0, 1.0, 0.05, p, 2.0, 5.0)).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn photon_positions_follow_the_bounces() {
    let m = toy(Photons::One, 0.5);
    // Before t₁ both branches agree: the photon is still on its way in.
    let [b1, b2] = m.branch_structure(4.5);
    assert_eq!(b1.photons, vec![-0.5]);
    assert_eq!(b2.photons, vec![-0.5]);
    // Between t₁ and t₂ branch 1 has bounced back, branch 2 flies on.
    let [b1, b2] = m.branch_structure(5.5);
    assert_eq!((b1.photons[0], b2.photons[0]), (-0.5, 0.5));
    // After t₂ = 6 branch 2 has bounced off x₂ too.
    let [b1, b2] = m.branch_structure(7.0);
    assert_eq!((b1.photons[0], b2.photons[0]), (-2.0, 0.0));

    let m = toy(Photons::Two, 0.5);
    let [b1, b2] = m.branch_structure(5.5);
    assert_eq!(b1.photons, vec![-0.5, 0.5]);
    assert_eq!(b2.photons, vec![0.5, 1.5]);
    let [b1, b2] = m.branch_structure(7.0);
    assert_eq!(b1.photons, vec![-2.0, 1.0]);
    assert_eq!(b2.photons, vec![0.0, 3.0]);
}

#[test]
fn polylines_pass_through_the_branch_structure() {
    for photons in [Photons::One, Photons::Two] {
        let m = toy(photons, 0.3);
        let lines = m.ray_polylines(0.0, 9.0);
        assert_eq!(lines.len(), 2 * photons.count());
        for line in &lines {
            assert_eq!(line.vertices.len(), 4); // 0, t₁, t₂, 9
            for v in &line.vertices {
                let b = &m.branch_structure(v.t)[line.branch.index()];
                assert_eq!(b.photons[line.photon], v.x);
            }
        }
    }
}

#[test]
fn visibility_compares_null_coordinates() {
    let left = LightRay::left(5.0, 0.0);
    // On the ray itself, behind it, and off to the left: still visible.
    assert!(ray_visible_outside_cone(&left, &SpacetimePoint::new(6.0, -1.0)));
    assert!(ray_visible_outside_cone(&left, &SpacetimePoint::new(7.0, 0.0)));
    // Ahead of the ray in its own direction: it falls into the future cone.
    assert!(!ray_visible_outside_cone(&left, &SpacetimePoint::new(4.0, -0.5)));
    let right = LightRay::right(5.0, 0.0);
    assert!(ray_visible_outside_cone(&right, &SpacetimePoint::new(6.0, 1.0)));
    assert!(!ray_visible_outside_cone(&right, &SpacetimePoint::new(4.0, 0.5)));
    assert_eq!(left.position_at(8.0), -3.0);
    assert_eq!(right.position_at(8.0), 3.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn resolution_is_monotone_in_time(x in -2.0f64..3.0, t in 0.0f64..10.0, two in any::<bool>()) {
        let m = toy(if two { Photons::Two } else { Photons::One }, 0.4);
        let y = SpacetimePoint::new(t, x);
        prop_assert_eq!(m.in_region_of_indeterminacy(&y), t < m.collapse_time_at(x));
        if !m.in_region_of_indeterminacy(&y) {
            prop_assert!(!m.in_region_of_indeterminacy(&SpacetimePoint::new(t + 0.25, x)));
        }
    }

    #[test]
    fn translation_moves_everything_together(
        x in -2.0f64..3.0, t in 0.0f64..10.0, dt in -3.0f64..3.0, dx in -3.0f64..3.0, two in any::<bool>(),
    ) {
        let m = toy(if two { Photons::Two } else { Photons::One }, 0.3);
        let moved = m.translated(dt, dx);
        let (y, y2) = (SpacetimePoint::new(t, x), SpacetimePoint::new(t + dt, x + dx));
        // Keep clear of the ROI boundary, where the shifted sums round differently.
        prop_assume!((t - m.collapse_time_at(x)).abs() > 1e-9);
        prop_assert_eq!(m.in_region_of_indeterminacy(&y), moved.in_region_of_indeterminacy(&y2));
        for choice in CHOICES {
            prop_assert!(close(m.beable_value(choice, &y), moved.beable_value(choice, &y2)));
        }
    }

    #[test]
    fn two_photon_model_is_mirror_symmetric(x in -2.0f64..3.0, t in 0.0f64..10.0, p in 0.05f64..0.95) {
        let m = toy(Photons::Two, p);
        let mirror = m.mirrored();
        let (y, ym) = (SpacetimePoint::new(t, x), SpacetimePoint::new(t, 1.0 - x));
        prop_assume!((t - m.collapse_time_at(x)).abs() > 1e-9);
        prop_assert_eq!(m.in_region_of_indeterminacy(&y), mirror.in_region_of_indeterminacy(&ym));
        for choice in CHOICES {
            prop_assert!(close(m.beable_value(choice, &y), mirror.beable_value(choice.other(), &ym)));
        }
    }

    #[test]
    fn conditional_expectation_is_the_field(x in -1.0f64..2.0, t in 0.0f64..10.0, p in 0.01f64..0.99, two in any::<bool>()) {
        let m = toy(if two { Photons::Two } else { Photons::One }, p);
        let y = SpacetimePoint::new(t, x);
        for choice in CHOICES {
            let d = m.rel_conditional(&y, choice).unwrap();
            let v = m.beable_value(choice, &y);
            prop_assert!((d.expectation() - v).abs() <= 1e-12 * v.abs().max(1.0));
            if !m.in_region_of_indeterminacy(&y) {
                prop_assert_eq!(d.probabilities()[choice.index()], 1.0);
            }
        }
    }
}

#[test]
fn born_reduction_is_refused_outside_the_region() {
    let m = toy(Photons::One, 0.3);
    let inside = m.born_reduction_check(&SpacetimePoint::new(1.0, 0.5)).unwrap();
    let (wa, wb) = m.born_weights();
    assert_eq!(inside.probabilities(), &[wa, wb]);
    assert!((wa - 0.3).abs() < 1e-15);
    assert!(matches!(m.born_reduction_check(&SpacetimePoint::new(9.0, 0.5)), Err(Error::Contract(_))));
}

#[test]
fn collapse_times_at_the_clouds() {
    let one = toy(Photons::One, 0.5);
    let two = toy(Photons::Two, 0.5);
    let dx = one.separation();
    assert_eq!(one.collapse_time_at(1.0), 5.0 - dx);
    assert_eq!(one.collapse_time_at(0.0), 5.0);
    assert_eq!(two.collapse_time_at(0.0), 5.0 - dx);
    assert_eq!(two.collapse_time_at(1.0), 5.0 - dx);
    // The two-photon region is a wedge with its apex half way between.
    assert_eq!(two.collapse_time_at(0.5), 5.0 - 0.5 * dx);
}

#[test]
fn cloud_densities_are_normalized() {
    let m = toy(Photons::One, 0.5);
    let n = 4001;
    let dx = 2.0 / (n - 1) as f64;
    for choice in CHOICES {
        let samples: Vec<f64> = (0..n).map(|i| m.cloud_density(choice, -0.5 + i as f64 * dx)).collect();
        assert!((trapezoid(&samples, dx) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn inconsistent_parameters_are_rejected() {
    let base = ToyModelConfig::simple(Photons::One, 0.0, 1.0, 0.05, 0.5, 1.0, 5.0);
    let bad_norm = ToyModelConfig { amp_b: C64::new(0.6, 0.0), ..base };
    assert!(matches!(ToyModel::new(bad_norm), Err(Error::Validation { .. })));
    assert!(ToyModel::new(ToyModelConfig { sigma1: 0.2, ..base }).is_err());
    assert!(ToyModel::new(ToyModelConfig { x2: 0.0, ..base }).is_err());
    assert!(ToyModel::new(ToyModelConfig { mass: 0.0, ..base }).is_err());
    assert!(ToyModel::new(base).is_ok());
}

#[test]
fn nature_choice_uses_one_uniform_draw() {
    let m = toy(Photons::One, 0.3);
    let mut a = rng(3);
    let mut b = rng(3);
    let wa = m.born_weights().0;
    for _ in 0..100 {
        let expected = if b.gen::<f64>() < wa { NatureChoice::Cloud1 } else { NatureChoice::Cloud2 };
        assert_eq!(sample_nature_choice(&m, &mut a), expected);
    }
}

#[test]
fn field_grid_evaluation_matches_pointwise_values() {
    let m = toy(Photons::Two, 0.2);
    let grid = GridSpec::new(-0.5, 1.5, 41, 0.0, 8.0, 33).unwrap();
    let field = m.beable_field(NatureChoice::Cloud2, &grid).unwrap();
    for j in 0..grid.nt {
        for i in 0..grid.nx {
            let y = SpacetimePoint::new(grid.t(j), grid.x(i));
            assert_eq!(field.value(j, i), m.beable_value(NatureChoice::Cloud2, &y));
        }
    }
}
