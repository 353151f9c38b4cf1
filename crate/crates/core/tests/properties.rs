use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tsplab::bnb::{enumerate_tours, hk_one_tree_bound, propagate, DEFAULT_ITERS};
use tsplab::exact::{held_karp_path, held_karp_tour, PathEnds};
use tsplab::geometry::perturb;
use tsplab::heuristics::{run, run_constrained};
use tsplab::instance::{parse, to_text};
use tsplab::tour::{canonical_cycle, sequence_length};
use tsplab::{Domain, Edge, EdgeConstraints, Heuristic, Instance, Point, Tour};

fn planar_points(lo: usize, hi: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((0.0..100.0f64, 0.0..100.0f64), lo..=hi)
        .prop_map(|v| v.into_iter().map(|(x, y)| Point::xy(x, y)).collect())
}

fn torus_instance(lo: usize, hi: usize) -> impl Strategy<Value = Instance> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), lo..=hi).prop_map(|v| {
        let t = (v.len() as f64).sqrt();
        let pts = v.into_iter().map(|(x, y)| Point::xy(t * x, t * y)).collect();
        Instance::new(pts, Domain::torus(2, t))
    })
}

fn is_permutation(order: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    order.len() == n && order.iter().all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
}

/// Forced edges taken from a random Hamiltonian cycle, so they extend to a tour.
fn forced_from_cycle(n: usize, perm_seed: u64, keep: usize) -> EdgeConstraints {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
    let mut cons = EdgeConstraints::new();
    for i in 0..keep.min(n - 1) {
        cons.forced.insert(Edge::new(order[i], order[(i + 1) % n]));
    }
    cons
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn heuristics_return_hamiltonian_cycles_above_optimum(inst in torus_instance(3, 9)) {
        let opt = held_karp_tour(&inst).unwrap().length;
        for h in Heuristic::ALL {
            let t = run(h, &inst).unwrap();
            prop_assert!(is_permutation(&t.order, inst.len()), "{h}");
            prop_assert!((sequence_length(&inst, &t.order, true) - t.length).abs() < 1e-9);
            prop_assert!(t.length >= opt - 1e-9, "{h}: {} < {opt}", t.length);
        }
    }

    #[test]
    fn heuristics_are_deterministic(inst in torus_instance(3, 40)) {
        for h in Heuristic::ALL {
            prop_assert_eq!(run(h, &inst).unwrap().order, run(h, &inst.clone()).unwrap().order);
        }
    }

    #[test]
    fn path_and_tour_optima_are_ordered(pts in planar_points(3, 9), a in 0usize..9, b in 0usize..9) {
        let inst = Instance::planar(pts);
        let n = inst.len();
        let (a, b) = (a % n, b % n);
        prop_assume!(a != b);
        let tour = held_karp_tour(&inst).unwrap().length;
        let free = held_karp_path(&inst, PathEnds::Free).unwrap();
        let fixed = held_karp_path(&inst, PathEnds::Fixed(a, b)).unwrap();
        prop_assert!(free.length <= tour + 1e-9);
        prop_assert!(fixed.length >= free.length - 1e-9);
        // closing the fixed path gives a tour, which cannot beat the optimum
        prop_assert!(fixed.length + inst.dist(a, b) >= tour - 1e-9);
        prop_assert_eq!(fixed.order.first(), Some(&a));
        prop_assert_eq!(fixed.order.last(), Some(&b));
    }

    #[test]
    fn canonical_cycle_ignores_rotation_and_direction(n in 3usize..12, shift in 0usize..12, rev in any::<bool>()) {
        let base: Vec<usize> = (0..n).map(|i| (i * 5 + 2) % n).collect();
        prop_assume!(is_permutation(&base, n));
        let mut other: Vec<usize> = base.iter().cycle().skip(shift % n).take(n).copied().collect();
        if rev {
            other.reverse();
        }
        prop_assert_eq!(canonical_cycle(&base), canonical_cycle(&other));
    }

    #[test]
    fn perturbation_stays_within_delta(inst in torus_instance(1, 30), delta in 0.0..2.0f64, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let moved = perturb(&inst.points, delta, &mut rng, &inst.domain);
        for (a, b) in inst.points.iter().zip(&moved) {
            prop_assert!(inst.domain.contains(b));
            prop_assert!(inst.domain.dist(a, b) <= delta + 1e-12);
        }
    }

    #[test]
    fn text_format_round_trips(inst in torus_instance(1, 30)) {
        let back = parse(&to_text(&inst).unwrap()).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn one_tree_bound_is_a_lower_bound(pts in planar_points(3, 10)) {
        let inst = Instance::planar(pts);
        let opt = held_karp_tour(&inst).unwrap().length;
        let b = hk_one_tree_bound(&inst, &EdgeConstraints::new(), DEFAULT_ITERS, None).bound;
        prop_assert!(b <= opt + 1e-9 * opt.max(1.0), "{b} > {opt}");
    }

    #[test]
    fn constrained_heuristics_keep_forced_edges(
        inst in torus_instance(4, 10),
        perm_seed in any::<u64>(),
        keep in 0usize..6,
    ) {
        let cons = forced_from_cycle(inst.len(), perm_seed, keep);
        for h in Heuristic::SCALEFREE {
            let t = run_constrained(h, &inst, &cons).unwrap();
            prop_assert!(is_permutation(&t.order, inst.len()));
            let edges = t.edges();
            prop_assert!(cons.forced.iter().all(|e| edges.contains(e)), "{h}");
        }
    }

    #[test]
    fn constrained_heuristics_avoid_forbidden_edges(inst in torus_instance(5, 9), pick in any::<u64>()) {
        // forbid one edge of each heuristic's own unconstrained tour
        for h in Heuristic::SCALEFREE {
            let free = run(h, &inst).unwrap();
            let edges = free.edges();
            let e = edges[(pick % edges.len() as u64) as usize];
            let cons = EdgeConstraints::new().with_forbidden(e);
            let t = run_constrained(h, &inst, &cons).unwrap();
            prop_assert!(!t.edges().contains(&e), "{h} kept {e:?}");
        }
    }

    #[test]
    fn propagation_keeps_the_tour_set(n in 4usize..8, perm_seed in any::<u64>(), keep in 0usize..5, bans in prop::collection::vec((0usize..8, 0usize..8), 0..4)) {
        let mut cons = forced_from_cycle(n, perm_seed, keep);
        for (a, b) in bans {
            let (a, b) = (a % n, b % n);
            if a != b && !cons.is_forced(a, b) {
                cons.forbidden.insert(Edge::new(a, b));
            }
        }
        let before = enumerate_tours(n, &cons);
        match propagate(n, &cons) {
            Some(p) => {
                prop_assert!(cons.forced.is_subset(&p.forced) && cons.forbidden.is_subset(&p.forbidden));
                prop_assert_eq!(enumerate_tours(n, &p), before);
            }
            None => prop_assert!(before.is_empty()),
        }
    }
}

#[test]
fn fully_forced_optimum_is_reproduced() {
    let inst = tsplab::instance::gen_uniform(9, 2, 5, tsplab::Topology::Cube).unwrap();
    let opt: Tour = held_karp_tour(&inst).unwrap();
    let mut cons = EdgeConstraints::new();
    cons.forced.extend(opt.edges());
    for h in Heuristic::SCALEFREE {
        let t = run_constrained(h, &inst, &cons).unwrap();
        assert_eq!(canonical_cycle(&t.order), canonical_cycle(&opt.order), "{h}");
    }
}
