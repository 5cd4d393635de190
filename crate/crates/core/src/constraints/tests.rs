use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geometry::Pose2D;
use crate::optimizer::{init_state, ParamState};
use crate::scene::{parse_scene, SceneSpec};

fn room() -> Room {
    Room::new(6.0, 5.0, 3.0)
}

fn bx(x: f64, y: f64, theta: f64, l: f64, w: f64) -> FootprintBox {
    FootprintBox::from_size(Pose2D::new(x, y, theta), l, w)
}

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b}");
}

#[test]
fn collision_examples() {
    let a = bx(0.0, 0.0, 0.0, 1.0, 1.0);
    close(collision_loss(&a, &a).value, 1.0, 1e-12);
    let b = bx(0.5, 0.0, 0.0, 1.0, 1.0);
    // IoU 1/3, centre distance 0.25, enclosing diagonal 3.25, overlap ratio 1/2.
    close(
        collision_loss(&a, &b).value,
        1.0 / 3.0 - 0.25 / 3.25 * 0.5,
        1e-12,
    );
    let touching = bx(1.0, 0.0, 0.0, 1.0, 1.0);
    assert_eq!(collision_loss(&a, &touching).value, 0.0);
}

#[test]
fn collision_is_bounded_below() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let a = bx(
            rng.gen_range(0.0..2.0),
            rng.gen_range(0.0..2.0),
            rng.gen_range(-PI..PI),
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.1..2.0),
        );
        let b = bx(
            rng.gen_range(0.0..2.0),
            rng.gen_range(0.0..2.0),
            rng.gen_range(-PI..PI),
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.1..2.0),
        );
        let v = collision_loss(&a, &b).value;
        assert!((-1.0..=1.0 + 1e-12).contains(&v), "{v}");
    }
}

#[test]
fn boundary_counts_corner_excess() {
    let r = room();
    assert_eq!(boundary_loss(&bx(3.0, 2.5, 0.3, 1.0, 1.0), &r).value, 0.0);
    // Two corners 0.2 beyond the left wall.
    close(
        boundary_loss(&bx(0.3, 2.5, 0.0, 1.0, 1.0), &r).value,
        0.4,
        1e-12,
    );
}

#[test]
fn satisfied_configurations_score_zero() {
    let r = room();
    let a = bx(1.0, 1.0, 0.4, 1.0, 0.5);
    let b = bx(2.5, 3.0, -1.0, 0.6, 0.6);
    let d = (1.5f64).hypot(2.0);
    assert!(distance_loss(&a, &b, d).value < 1e-12);

    let left = bx(0.0, 0.0, 0.0, 1.0, 1.0);
    let right = bx(1.7, 0.0, 0.0, 1.0, 1.0);
    assert!(gap_loss(&left, &right, 0.7).value < 1e-12);

    let bed = bx(3.0, 5.0 - 1.0, -FRAC_PI_2, 2.0, 1.6);
    assert!(against_wall_loss(&bed, Wall::T, &r).value < 1e-12);
    let seat = bx(0.25, 0.5, 0.0, 0.5, 1.0);
    assert!(corner_loss(&seat, Corner::BL, Wall::L, &r).value < 1e-12);
    let across = bx(0.5, 0.25, FRAC_PI_2, 0.5, 1.0);
    assert!(corner_loss(&across, Corner::BL, Wall::B, &r).value < 1e-12);

    let viewer = bx(1.0, 1.0, 0.0, 0.5, 0.5);
    let tv = bx(3.0, 1.0, PI, 1.0, 0.2);
    // The norm offset leaves exactly eps / |d| at perfect alignment.
    let facing = facing_loss(&viewer, &tv).value;
    assert!(
        (facing - FACING_EPS / (2.0 + FACING_EPS)).abs() < 1e-15,
        "{facing}"
    );
    assert!(angle_loss(&tv, &viewer, PI).value < 1e-12);

    let pinned = bx(2.0, 1.0, 0.0, 0.5, 0.5);
    assert!(placement_loss(&pinned, true, 2.0, 0.0, &r).value < 1e-12);
    assert!(placement_loss(&pinned, false, 1.2, 0.05, &r).value < 1e-12);
}

#[test]
fn directional_sides() {
    let table = bx(2.0, 2.0, 0.0, 1.6, 0.9);
    let chair = |x: f64, y: f64| bx(x, y, 0.0, 0.45, 0.45);
    // Front is the target's local +y, left its local -x.
    let front = chair(2.0 - 0.2875, 2.0 + 0.8);
    assert!(directional_loss(&front, &table, Side::Front, 0.25).value < 1e-12);
    let behind = chair(2.0, 2.0 - 0.7);
    assert!(directional_loss(&behind, &table, Side::Behind, 0.5).value < 1e-12);
    let left = chair(2.0 - 1.1, 2.0);
    assert!(directional_loss(&left, &table, Side::Left, 0.5).value < 1e-12);
    assert!(directional_loss(&left, &table, Side::Right, 0.5).value > 1.0);
    let right = chair(2.0 + 1.1, 2.0);
    assert!(directional_loss(&right, &table, Side::Right, 0.5).value < 1e-12);
}

#[test]
fn around_is_zero_on_even_arc() {
    let focal = bx(2.0, 2.0, 0.7, 0.8, 0.8);
    for n in 2..=6 {
        let sweep = 2.0;
        let center = 0.3;
        let sources: Vec<_> = (0..n)
            .map(|i| {
                let a = center - sweep / 2.0 + sweep * i as f64 / (n - 1) as f64;
                let p = focal
                    .pose
                    .compose(&Pose2D::new(1.2 * a.cos(), 1.2 * a.sin(), 0.0));
                bx(p.x, p.y, 0.0, 0.3, 0.3)
            })
            .collect();
        let v = around_loss(&sources, &focal, sweep, center).value;
        assert!(v < 1e-12, "n={n}: {v}");
    }
}

fn perturbed(spec: &SceneSpec, seed: u64) -> ParamState {
    // Random but overlapping, out-of-bounds and unsatisfied: every term active.
    init_state(spec, seed).unwrap()
}

/// Central differences at `h` and `h / 10`; `None` when they disagree, which
/// means a kink lies inside the stencil.
fn central(f: &dyn Fn(&[f64]) -> f64, x: &[f64], i: usize) -> Option<f64> {
    let at = |d: f64| {
        let mut v = x.to_vec();
        v[i] += d;
        f(&v)
    };
    let h = 1e-5;
    let fd = (at(h) - at(-h)) / (2.0 * h);
    let fine = (at(h / 10.0) - at(-h / 10.0)) / (2.0 * h / 10.0);
    ((fd - fine).abs() <= 1e-5 * fd.abs().max(1.0)).then_some(fd)
}

fn check_slots(name: &str, f: &dyn Fn(&[f64]) -> f64, x: &[f64], grad: &[f64], slots: &[usize]) {
    let mut checked = 0;
    for &i in slots {
        let Some(fd) = central(f, x, i) else { continue };
        checked += 1;
        let g = grad[i];
        let err = (fd - g).abs();
        assert!(
            err < 1e-6 || err < 1e-4 * g.abs(),
            "{name} slot {i}: {g} vs {fd}"
        );
    }
    assert!(
        checked * 10 >= slots.len() * 9,
        "{name}: too many skipped slots"
    );
}

fn with_values(state: &ParamState, v: &[f64]) -> ParamState {
    let mut s = state.clone();
    s.values.copy_from_slice(v);
    s
}

#[test]
fn local_gradient_matches_differences() {
    let w = Weights::default();
    for (name, text) in crate::harness::fixtures::ALL {
        let spec = parse_scene(text).unwrap();
        let state = perturbed(&spec, 17);
        for k in 0..spec.units.len() {
            let ev = aggregate_local(&spec, &state, &w, k);
            let f = |v: &[f64]| aggregate_local(&spec, &with_values(&state, v), &w, k).total;
            let slots: Vec<usize> = (0..state.values.len()).collect();
            check_slots(name, &f, &state.values, &ev.grad, &slots);
        }
    }
}

/// Scene-frame terms see a unit through its bounding box, which is held
/// constant for differentiation, so only slots that leave the box shape
/// unchanged are compared.
#[test]
fn global_gradient_matches_differences() {
    let w = Weights::default();
    for (name, text) in crate::harness::fixtures::ALL {
        let spec = parse_scene(text).unwrap();
        let state = perturbed(&spec, 17);
        let ev = aggregate_global(&spec, &state, &w);
        let f = |v: &[f64]| aggregate_global(&spec, &with_values(&state, v), &w).total;
        let members: Vec<usize> = state
            .layout
            .member
            .iter()
            .flatten()
            .flat_map(|&o| o..o + 3)
            .collect();
        let slots: Vec<usize> = (0..state.values.len())
            .filter(|i| !members.contains(i))
            .collect();
        check_slots(name, &f, &state.values, &ev.grad, &slots);
    }
}

#[test]
fn prior_gradient_matches_differences() {
    let spec = parse_scene(crate::harness::fixtures::BOOKSTORE_ROWS).unwrap();
    let mut state = perturbed(&spec, 2);
    for (g, o) in state.layout.shared.clone().into_iter().enumerate() {
        state.values[o] += 0.1 * (g as f64 + 1.0);
    }
    let sel = TermSelection::relations_only().with_prior(1.0);
    let sel = TermSelection {
        learn_shared: true,
        ..sel
    };
    let w = Weights::default();
    let ev = evaluate(&spec, &state, &w, &sel);
    let f = |v: &[f64]| evaluate(&spec, &with_values(&state, v), &w, &sel).total;
    check_slots(
        "bookstore-rows",
        &f,
        &state.values,
        &ev.grad,
        &state.layout.shared,
    );
}

#[test]
fn global_parameterization_matches_mixed() {
    let w = Weights::default();
    for (name, text) in crate::harness::fixtures::ALL {
        let spec = parse_scene(text).unwrap();
        let mixed = perturbed(&spec, 5);
        let global = mixed.to_global(&spec);
        let full = TermSelection::all().with_prior(1.0);
        let a = evaluate(&spec, &mixed, &w, &full);
        let b = evaluate(&spec, &global, &w, &full);
        assert!(
            (a.total - b.total).abs() < 1e-9,
            "{name}: {} vs {}",
            a.total,
            b.total
        );

        // Relation terms on assets only: exact chain rule through the change
        // of coordinates.
        let sel = TermSelection {
            learn_shared: true,
            ..TermSelection::relations_only()
        };
        let ev = evaluate(&spec, &global, &w, &sel);
        let f = |v: &[f64]| evaluate(&spec, &with_values(&global, v), &w, &sel).total;
        let slots: Vec<usize> = (0..global.values.len()).collect();
        check_slots(name, &f, &global.values, &ev.grad, &slots);
    }
}

#[test]
fn objective_splits_into_local_and_global() {
    let w = Weights::default();
    for (_, text) in crate::harness::fixtures::ALL {
        let spec = parse_scene(text).unwrap();
        let state = perturbed(&spec, 9);
        let total = evaluate(&spec, &state, &w, &TermSelection::all()).total;
        let mut sum = aggregate_global(&spec, &state, &w).total;
        for k in 0..spec.units.len() {
            sum += aggregate_local(&spec, &state, &w, k).total;
        }
        assert!((total - sum).abs() <= 1e-12 * total.abs().max(1.0));
    }
}

#[test]
fn local_terms_leave_unit_pose_untouched() {
    let w = Weights::default();
    for (_, text) in crate::harness::fixtures::ALL {
        let spec = parse_scene(text).unwrap();
        let state = perturbed(&spec, 21);
        for k in 0..spec.units.len() {
            let ev = aggregate_local(&spec, &state, &w, k);
            let o = state.layout.unit[k];
            assert_eq!(&ev.grad[o..o + 3], &[0.0, 0.0, 0.0]);
        }
    }
}

#[test]
fn fixed_shared_parameters_get_no_gradient() {
    let spec = parse_scene(crate::harness::fixtures::DINING_SET).unwrap();
    let state = perturbed(&spec, 1);
    let ev = evaluate(
        &spec,
        &state,
        &Weights::default(),
        &TermSelection::relations_only(),
    );
    assert_eq!(ev.grad[state.layout.shared[0]], 0.0);
    let ev = evaluate(&spec, &state, &Weights::default(), &TermSelection::all());
    assert_ne!(ev.grad[state.layout.shared[0]], 0.0);
}

#[test]
fn penalties_vanish_on_constructed_solution() {
    let spec = parse_scene(crate::harness::fixtures::DINING_SET).unwrap();
    let mut state = init_state(&spec, 0).unwrap();
    state.set_pose(state.layout.unit[0], Pose2D::new(2.5, 2.0, 0.4));
    // Chairs 0.15 m off each table edge, turned toward it.
    let (side, end) = (0.45 + 0.15 + 0.225, 0.8 + 0.15 + 0.225);
    let locals = [
        Pose2D::new(0.0, side, -FRAC_PI_2),
        Pose2D::new(0.0, -side, FRAC_PI_2),
        Pose2D::new(-end, 0.0, 0.0),
        Pose2D::new(end, 0.0, PI),
    ];
    for (j, p) in locals.into_iter().enumerate() {
        let o = state.layout.member[0][j];
        state.set_pose(o, p);
    }
    for (r, v) in relation_penalties(&spec, &state).into_iter().enumerate() {
        let rel = &spec.relations[r];
        if rel.kind.name() == "facing" {
            let j: usize = rel.sources[0]["chair_".len()..].parse().unwrap();
            let d = locals[j - 1].x.hypot(locals[j - 1].y);
            let expected = FACING_EPS / (d + FACING_EPS);
            assert!((v - expected).abs() < 1e-12, "relation {r}: {v}");
        } else {
            assert!(v < 1e-12, "relation {r}: {v}");
        }
    }
}

#[test]
fn pairwise_losses_are_translation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let shift = |b: &FootprintBox, dx: f64, dy: f64| {
        FootprintBox::new(
            Pose2D::new(b.pose.x + dx, b.pose.y + dy, b.pose.theta),
            b.half_l,
            b.half_w,
        )
    };
    for _ in 0..200 {
        let a = bx(
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..3.0),
            rng.gen_range(-PI..PI),
            1.0,
            0.6,
        );
        let b = bx(
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..3.0),
            rng.gen_range(-PI..PI),
            0.5,
            0.4,
        );
        let (dx, dy) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let (a2, b2) = (shift(&a, dx, dy), shift(&b, dx, dy));
        let pairs: [(f64, f64); 6] = [
            (
                distance_loss(&a, &b, 1.0).value,
                distance_loss(&a2, &b2, 1.0).value,
            ),
            (gap_loss(&a, &b, 0.2).value, gap_loss(&a2, &b2, 0.2).value),
            (facing_loss(&a, &b).value, facing_loss(&a2, &b2).value),
            (
                angle_loss(&a, &b, 0.3).value,
                angle_loss(&a2, &b2, 0.3).value,
            ),
            (
                directional_loss(&a, &b, Side::Left, 0.3).value,
                directional_loss(&a2, &b2, Side::Left, 0.3).value,
            ),
            (collision_loss(&a, &b).value, collision_loss(&a2, &b2).value),
        ];
        for (u, v) in pairs {
            assert!((u - v).abs() < 1e-9);
        }
    }
}

#[test]
fn distance_angle_facing_are_rotation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    for _ in 0..200 {
        let a = bx(
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..3.0),
            rng.gen_range(-PI..PI),
            1.0,
            0.6,
        );
        let b = bx(
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..3.0),
            rng.gen_range(-PI..PI),
            0.5,
            0.4,
        );
        let t = Pose2D::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-PI..PI),
        );
        let mv = |x: &FootprintBox| FootprintBox::new(t.compose(&x.pose), x.half_l, x.half_w);
        let (a2, b2) = (mv(&a), mv(&b));
        assert!(
            (distance_loss(&a, &b, 1.0).value - distance_loss(&a2, &b2, 1.0).value).abs() < 1e-9
        );
        assert!((angle_loss(&a, &b, 0.3).value - angle_loss(&a2, &b2, 0.3).value).abs() < 1e-9);
        assert!((facing_loss(&a, &b).value - facing_loss(&a2, &b2).value).abs() < 1e-9);
    }
}
