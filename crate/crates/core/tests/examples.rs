//! Worked examples with hand-checkable values.

mod common;

use compopt::dynamics::{simulate, DynamD};
use compopt::experiment::three_network_instance;
use compopt::flownet::{dual_decomposition_standard, DualConfig, FlowNet};
use compopt::freevect::{max_abs_diff, pullback_matrix};
use compopt::morphisms::{gad, gd, generate_solver};
use compopt::problems::{Objective, Opt, QuadraticSpec, Saddle, SaddleObjective};
use compopt::random;
use compopt::uwd::fixtures;
use compopt::{oapply, Curvature, FinFunction, FinsetAlgebra, OpenObject, Uwd};
use nalgebra::DVector;
use rand::Rng;

/// Point on the apex whose junction `j` carries `vals[j]`.
fn on_apex(port_map: &FinFunction, vals: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; port_map.codom_size()];
    for (j, v) in vals.iter().enumerate() {
        z[port_map.apply(j)] = *v;
    }
    z
}

#[test]
fn three_box_composite_is_the_sum_of_its_parts() {
    let mut rng = common::rng(1);
    let f = random::pd_quadratic(&mut rng, 2, 0.5);
    let g = random::pd_quadratic(&mut rng, 3, 0.5);
    let h = random::pd_quadratic(&mut rng, 3, 0.5);
    let d = fixtures::three_box_chain();
    let fillers: Vec<_> = [&f, &g, &h]
        .into_iter()
        .map(|o| OpenObject::closed_identity(&Opt, o.clone()))
        .collect();
    let composite = oapply(&Opt, &d, &fillers).unwrap();
    assert_eq!(composite.domain_size, 5);
    for _ in 0..20 {
        let v: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
        let (u, w, x, y, z) = (v[0], v[1], v[2], v[3], v[4]);
        let expected = f.eval(&[w, x]) + g.eval(&[u, w, y]) + h.eval(&[u, w, z]);
        let got = composite.payload.eval(&on_apex(&composite.port_map, &v));
        assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0));
    }
}

#[test]
fn scalar_gradient_descent_is_geometric() {
    let f = QuadraticSpec { p: vec![vec![2.0]], q: vec![0.0] }.to_objective().unwrap();
    let traj = simulate(&gd(&f, 0.1).unwrap(), &[1.0], 5).unwrap();
    let mut want = 1.0;
    for x in traj {
        assert!((x[0] - want).abs() < 1e-15);
        want *= 0.8;
    }
}

#[test]
fn uzawa_on_a_one_constraint_lagrangian() {
    // L(x, λ) = x² + λ(x − 1); saddle point (1, −2).
    let l = Objective::differentiable(
        2,
        |z| z[0] * z[0] + z[1] * (z[0] - 1.0),
        |z| vec![2.0 * z[0] + z[1], z[0] - 1.0],
    );
    let l = SaddleObjective::new(l, vec![Curvature::Convex, Curvature::Concave]).unwrap();
    let traj = simulate(&gad(&l, 0.1).unwrap(), &[0.0, 0.0], 2000).unwrap();
    let last = traj.last().unwrap();
    assert!((last[0] - 1.0).abs() < 1e-8 && (last[1] + 2.0).abs() < 1e-8, "{last:?}");
}

#[test]
fn lagrangian_from_labelled_blocks() {
    // Objective block on x (convex junction), constraint block on (x, λ)
    // with λ on a concave junction.
    let f = SaddleObjective::convex(Objective::differentiable(1, |x| x[0] * x[0], |x| vec![2.0 * x[0]]));
    let c = SaddleObjective::new(
        Objective::differentiable(2, |z| z[1] * (z[0] - 1.0), |z| vec![z[1], z[0] - 1.0]),
        vec![Curvature::Convex, Curvature::Concave],
    )
    .unwrap();
    let d = Uwd::new(vec![1, 2], 2, vec![0, 0, 1], vec![0, 1])
        .unwrap()
        .with_labels(vec![Curvature::Convex, Curvature::Concave])
        .unwrap();
    let fillers = [
        OpenObject::closed_identity(&Saddle, f),
        OpenObject::closed_identity(&Saddle, c),
    ];
    let l = oapply(&Saddle, &d, &fillers).unwrap();
    let mut rng = common::rng(2);
    for _ in 0..20 {
        let (x, lam) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let z = on_apex(&l.port_map, &[x, lam]);
        assert!((l.payload.objective.eval(&z) - (x * x + lam * (x - 1.0))).abs() < 1e-12);
    }
    // Swapping the block labels is rejected.
    let bad = d.clone().with_labels(vec![Curvature::Concave, Curvature::Concave]).unwrap();
    assert!(oapply(&Saddle, &bad, &fillers).is_err());
}

#[test]
fn algorithm_loop_with_explicit_matrices() {
    // s ← s − γ Kᵀ ∇F(K s), with K the duplication matrix of the gluing.
    let mut rng = common::rng(3);
    let d = fixtures::three_box_chain();
    let fs: Vec<Objective> = [2, 3, 3].iter().map(|&k| random::pd_quadratic(&mut rng, k, 0.5)).collect();
    let fillers: Vec<_> = fs.iter().map(|f| OpenObject::closed_identity(&Opt, f.clone())).collect();
    let gamma = 0.05;
    let solver = generate_solver(&d, &fillers, gamma).unwrap().payload;
    let po = compopt::opensys::glue(&d, &fillers).unwrap();
    let k = pullback_matrix(&po.proj_left);
    let s0: Vec<f64> = (0..po.apex_size).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut s = DVector::from_vec(s0.clone());
    let traj = simulate(&solver, &s0, 200).unwrap();
    for expected in traj.iter().skip(1) {
        let t = &k * &s;
        let mut grads = Vec::new();
        let mut offset = 0;
        for f in &fs {
            grads.extend(f.grad(&t.as_slice()[offset..offset + f.dim()]));
            offset += f.dim();
        }
        s -= gamma * k.transpose() * DVector::from_vec(grads);
        assert!(max_abs_diff(s.as_slice(), expected) <= 1e-12);
    }
}

#[test]
fn two_box_fixture_validates() {
    assert!(fixtures::two_box_explicit().validate().is_empty());
    let d = fixtures::two_box_explicit();
    assert_eq!((d.n_boxes(), d.junctions, d.n_outer()), (2, 3, 2));
}

#[test]
fn units_are_empty() {
    let z = Opt.combine(&[]);
    assert_eq!(z.dim(), 0);
    assert_eq!(z.eval(&[]), 0.0);
    let g = FlowNet.combine(&[]);
    assert_eq!((g.vertices(), g.edges()), (0, 0));
    assert_eq!(DynamD.combine(&[]).dim, 0);
}

#[test]
fn three_networks_merge_boundary_vertices() {
    let (d, nets) = three_network_instance(10, 0.4, 7).unwrap();
    let g = oapply(&FlowNet, &d, &nets).unwrap().payload;
    // Seven boundary vertices collapse onto three junctions.
    assert_eq!(g.vertices(), 30 - 4);
    assert_eq!(g.edges(), nets.iter().map(|n| n.payload.edges()).sum::<usize>());
    assert!(g.balance.iter().sum::<f64>().abs() <= 1e-12);
    // A few hundred dual steps shrink the composite residual.
    let early = dual_decomposition_standard(&d, &nets, &DualConfig { iters: 1, ..DualConfig::default() }).unwrap();
    let late = dual_decomposition_standard(&d, &nets, &DualConfig { iters: 500, ..DualConfig::default() }).unwrap();
    assert!(late.residual < early.residual);
}
