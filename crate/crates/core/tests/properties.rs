use std::collections::BTreeSet;

use graph_eikonal::eikonal::{assemble_algebra, partition_grid};
use graph_eikonal::fixtures::{random_small_graph, seeded_rng};
use graph_eikonal::graph::{GraphPoint, MetricGraph};
use graph_eikonal::hydra::{Hydra, HydraUnion, SpaceTimePoint, DEFAULT_MAX_EVENTS};
use graph_eikonal::lattice::{build_partition, critical_points, lattice_closure, DEFAULT_MAX_LATTICE_POINTS};
use graph_eikonal::rational::{q, qi, to_f64, Rational};
use graph_eikonal::sampled::{Placement, SampledFunction};
use graph_eikonal::verify::{monotonicity_violation, setup};
use graph_eikonal::wave::{evaluate_wave, is_reachable, wave_snapshot, Control};
use nalgebra::SymmetricEigen;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn graph(seed: u64) -> MetricGraph {
    random_small_graph(&mut seeded_rng(seed), 8)
}

fn random_point(g: &MetricGraph, rng: &mut impl Rng) -> GraphPoint {
    if rng.gen_bool(0.2) {
        return GraphPoint::Vertex(rng.gen_range(0..g.vertices().len()));
    }
    let e = rng.gen_range(0..g.edges().len());
    let s = g.length(e) * q(rng.gen_range(1..16), 16);
    g.edge_point(e, s).expect("inside the edge")
}

fn sources(g: &MetricGraph, rng: &mut impl Rng) -> Vec<usize> {
    let b = g.boundary_vertices();
    let picked: Vec<usize> = b.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    if picked.is_empty() {
        vec![b[0]]
    } else {
        picked
    }
}

fn horizon(rng: &mut impl Rng) -> Rational {
    q(rng.gen_range(1..=12), 8)
}

/// Horizons for the checks that build dense blocks and fine grids.
fn short_horizon(rng: &mut impl Rng) -> Rational {
    q(rng.gen_range(1..=8), 8)
}

fn random_control(srcs: &[usize], t: &Rational, rng: &mut impl Rng) -> Control {
    let mut f = Control::zero();
    for &s in srcs {
        let knots = (0..=4)
            .map(|k| (t * q(k, 4), q(rng.gen_range(-8..=8), 4)))
            .collect();
        f = f.with(s, knots);
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn metric_axioms(seed in any::<u64>()) {
        let g = graph(seed);
        let mut rng = StdRng::seed_from_u64(seed);
        let (x, y, z) = (random_point(&g, &mut rng), random_point(&g, &mut rng), random_point(&g, &mut rng));
        prop_assert_eq!(g.distance(&x, &x), qi(0));
        prop_assert_eq!(g.distance(&x, &y), g.distance(&y, &x));
        prop_assert!(g.distance(&x, &z) <= g.distance(&x, &y) + g.distance(&y, &z));
        if x != y {
            prop_assert!(g.distance(&x, &y) > qi(0));
        }
    }

    #[test]
    fn neighbourhoods_grow_with_radius(seed in any::<u64>(), a in 1i64..24, b in 1i64..24) {
        let g = graph(seed);
        let mut rng = StdRng::seed_from_u64(seed);
        let centre = vec![random_point(&g, &mut rng)];
        let (lo, hi) = (q(a.min(b), 8), q(a.max(b), 8));
        prop_assert!(g.neighborhood(&centre, &lo).is_subset(&g.neighborhood(&centre, &hi)));
    }

    #[test]
    fn hydra_is_deterministic_and_causal(seed in any::<u64>()) {
        let g = graph(seed);
        let mut rng = StdRng::seed_from_u64(seed);
        let src = sources(&g, &mut rng)[0];
        let t = horizon(&mut rng);
        let h = Hydra::build(&g, src, &t, DEFAULT_MAX_EVENTS).unwrap();
        prop_assert_eq!(&h, &Hydra::build(&g, src, &t, DEFAULT_MAX_EVENTS).unwrap());
        let root = GraphPoint::Vertex(src);
        for seg in &h.segments {
            prop_assert!(seg.s_lo < seg.s_hi);
            for s in [&seg.s_lo, &seg.s_hi] {
                let point = g.edge_point(seg.edge, s.clone()).unwrap();
                let time = seg.time_at(s);
                prop_assert!(g.distance(&root, &point) <= time);
                prop_assert!(time <= t);
            }
        }
        // each segment starts where the singularity was emitted
        for seg in &h.segments {
            let (start, _) = seg.time_range();
            let s = seg.position_at(&start);
            let p = g.edge_point(seg.edge, s).unwrap();
            prop_assert!(h.events.iter().any(|ev| GraphPoint::Vertex(ev.vertex) == p && ev.time == start));
        }
    }

    #[test]
    fn lattice_closure_is_a_closure(seed in any::<u64>()) {
        let g = graph(seed);
        let mut rng = StdRng::seed_from_u64(seed);
        let srcs = sources(&g, &mut rng);
        let h = HydraUnion::build(&g, &srcs, &horizon(&mut rng), DEFAULT_MAX_EVENTS).unwrap();
        let segs: Vec<_> = h.segments().collect();
        let pick = |rng: &mut StdRng| -> BTreeSet<SpaceTimePoint> {
            (0..2).map(|_| {
                let seg = segs[rng.gen_range(0..segs.len())];
                let s = &seg.s_lo + (&seg.s_hi - &seg.s_lo) * q(rng.gen_range(0..=8), 8);
                SpaceTimePoint::new(g.edge_point(seg.edge, s.clone()).unwrap(), seg.time_at(&s))
            }).collect()
        };
        let (a, b) = (pick(&mut rng), pick(&mut rng));
        let cl = |s: &BTreeSet<SpaceTimePoint>| lattice_closure(&h, s, DEFAULT_MAX_LATTICE_POINTS).unwrap();
        let ca = cl(&a);
        prop_assert!(ca.is_superset(&a));
        prop_assert_eq!(cl(&ca), ca.clone());
        let ab: BTreeSet<_> = a.union(&b).cloned().collect();
        let expect: BTreeSet<_> = ca.union(&cl(&b)).cloned().collect();
        prop_assert_eq!(cl(&ab), expect);
    }

    #[test]
    fn partition_structure(seed in any::<u64>()) {
        let g = graph(seed);
        let mut rng = StdRng::seed_from_u64(seed);
        let srcs = sources(&g, &mut rng);
        let t = horizon(&mut rng);
        let h = HydraUnion::build(&g, &srcs, &t, DEFAULT_MAX_EVENTS).unwrap();
        let p = build_partition(&h, DEFAULT_MAX_LATTICE_POINTS).unwrap();
        prop_assert_eq!(p.check_cover(), Ok(()));
        // Θ of the union contains Θ of each single source
        for &s in &srcs {
            let single = HydraUnion::build(&g, &[s], &t, DEFAULT_MAX_EVENTS).unwrap();
            let theta = critical_points(&single, DEFAULT_MAX_LATTICE_POINTS).unwrap();
            prop_assert!(theta.is_subset(&p.critical));
        }
        for fam in &p.families {
            for (i, iv) in fam.intervals.iter().enumerate() {
                let (a, b) = fam.interval_bounds(i);
                prop_assert_eq!(&a, &iv.start);
                prop_assert_eq!(b - a, fam.delta.clone());
            }
            for c in &fam.cells {
                prop_assert_eq!(c.length(), fam.delta.clone());
            }
            // determination sets are shared by every point they contain
            let r = &fam.delta * q(rng.gen_range(1..8), 8);
            let x = fam.cells[0].point_at(&r);
            let lambda = p.determination_set(&x).unwrap();
            prop_assert!(lambda.contains(&x));
            for y in &lambda {
                prop_assert_eq!(&p.determination_set(y).unwrap(), &lambda);
            }
        }
    }

    #[test]
    fn wave_is_linear_and_causal(seed in any::<u64>()) {
        let g = graph(seed);
        let mut rng = StdRng::seed_from_u64(seed);
        let srcs = sources(&g, &mut rng);
        let t = horizon(&mut rng);
        let h = HydraUnion::build(&g, &srcs, &t, DEFAULT_MAX_EVENTS).unwrap();
        let f = random_control(&srcs, &t, &mut rng);
        let k = random_control(&srcs, &t, &mut rng);
        let (a, b) = (q(rng.gen_range(-5..=5), 3), q(rng.gen_range(-5..=5), 2));
        let combo = scaled(&f, &a).add(&scaled(&k, &b));
        let roots: Vec<GraphPoint> = srcs.iter().map(|&s| GraphPoint::Vertex(s)).collect();
        for _ in 0..4 {
            let x = random_point(&g, &mut rng);
            let time = &t * q(rng.gen_range(0..=8), 8);
            let u = |c: &Control| evaluate_wave(&h, c, &x, &time).unwrap();
            prop_assert_eq!(u(&combo), &a * u(&f) + &b * u(&k));
            if g.distance_to_set(&roots, &x) > time {
                prop_assert_eq!(u(&f), qi(0));
            }
        }
    }

    #[test]
    fn snapshots_are_reachable(seed in any::<u64>()) {
        let g = graph(seed);
        let mut rng = StdRng::seed_from_u64(seed);
        let srcs = sources(&g, &mut rng);
        let t = short_horizon(&mut rng);
        let s = setup(&g, &srcs, &t).unwrap();
        let step = partition_grid(&s.partition) * q(1, 2);
        let f = random_control(&srcs, &t, &mut rng);
        let y = wave_snapshot(&s.hydra, &f, &t, &step, Placement::Midpoints).unwrap();
        let r = is_reachable(&s.algebra, &srcs, &y, 1e-9).unwrap();
        prop_assert!(r.reachable, "residual {}", r.residual);
    }

    #[test]
    fn eikonal_spectrum_and_beta_form(seed in any::<u64>()) {
        let g = graph(seed);
        let mut rng = StdRng::seed_from_u64(seed);
        let srcs = sources(&g, &mut rng);
        let t = short_horizon(&mut rng);
        let h = HydraUnion::build(&g, &srcs, &t, DEFAULT_MAX_EVENTS).unwrap();
        let p = build_partition(&h, DEFAULT_MAX_LATTICE_POINTS).unwrap();
        let alg = assemble_algebra(&p, &h).unwrap();
        let horizon_f = to_f64(&t);
        for fb in &alg.families {
            let delta = &p.families[fb.family].delta;
            for b in &fb.blocks {
                for k in 0..=4 {
                    let r = delta * q(k, 4);
                    let e = b.eval(&r);
                    prop_assert!(e.is_symmetric());
                    prop_assert_eq!(&e, &b.factorized(&r));
                    let ef = e.to_f64();
                    for lambda in SymmetricEigen::new(ef.clone()).eigenvalues.iter() {
                        prop_assert!(*lambda >= -1e-9 && *lambda <= horizon_f + 1e-9, "eigenvalue {}", lambda);
                    }
                    prop_assert!((b.beta_form(&r) - ef).abs().max() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn projections_grow_with_horizon(seed in any::<u64>(), a in 1i64..=10, b in 1i64..=10) {
        let g = graph(seed);
        let src = g.boundary_vertices()[0];
        let mut ts = vec![q(a.min(b), 8), q(a.max(b), 8)];
        ts.dedup();
        prop_assert!(monotonicity_violation(&g, src, &ts, 3, seed).unwrap() <= 1e-9);
    }
}

fn scaled(f: &Control, c: &Rational) -> Control {
    let mut out = f.clone();
    for knots in out.knots.values_mut() {
        for (_, v) in knots.iter_mut() {
            *v = &*v * c;
        }
    }
    out
}

#[test]
fn snapshot_grid_sampling_matches_pointwise() {
    let g = graph(3);
    let h = HydraUnion::build(&g, &[g.boundary_vertices()[0]], &qi(1), DEFAULT_MAX_EVENTS).unwrap();
    let f = Control::ramp(g.boundary_vertices()[0], &qi(1));
    let step = q(1, 840);
    let snap = wave_snapshot(&h, &f, &qi(1), &step, Placement::Nodes).unwrap();
    let pointwise = SampledFunction::from_fn(&g, &step, Placement::Nodes, |e, s| {
        to_f64(&evaluate_wave(&h, &f, &g.edge_point(e, s.clone()).unwrap(), &qi(1)).unwrap())
    })
    .unwrap();
    assert_eq!(snap, pointwise);
}
