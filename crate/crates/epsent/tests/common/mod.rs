#![allow(dead_code)]

//! Shared helpers for the integration suites: seeded random instances with
//! deliberate value coincidences, zero cells, and boundary-tied fidelities.

use epsent::curve::critical_epsilons;
use epsent::hypergraph::build_hypergraph;
use epsent::model::ProblemInstance;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

/// Random instance with nx <= 5, ny <= 3, dim <= 2. Function values sit on
/// a half-integer grid so coincidences and ties happen often; epsilon is
/// drawn from the instance's own candidate radii (sometimes exactly on a
/// boundary, sometimes strictly between two).
pub fn random_instance(rng: &mut ChaCha12Rng) -> ProblemInstance {
    let nx = rng.gen_range(2..=5);
    let ny = rng.gen_range(1..=3usize);
    let dim = rng.gen_range(1..=2usize);
    let f: Vec<Vec<Vec<f64>>> = (0..nx)
        .map(|_| {
            (0..ny)
                .map(|_| (0..dim).map(|_| rng.gen_range(0..5) as f64 * 0.5).collect())
                .collect()
        })
        .collect();
    let mut p: Vec<Vec<f64>>;
    loop {
        p = (0..nx).map(|_| (0..ny).map(|_| rng.gen::<f64>() + 0.05).collect()).collect();
        if rng.gen_bool(0.3) {
            let kills = rng.gen_range(1..=nx.min(3));
            for _ in 0..kills {
                let x = rng.gen_range(0..nx);
                let y = rng.gen_range(0..ny);
                p[x][y] = 0.0;
            }
        }
        let total: f64 = p.iter().flatten().sum();
        if total > 0.0 {
            for row in &mut p {
                for v in row.iter_mut() {
                    *v /= total;
                }
            }
            break;
        }
    }
    let base = ProblemInstance::new(nx, ny, dim, 0.0, p, f).expect("generated instance is valid");
    let cands = critical_epsilons(&base).expect("small instance");
    let eps = match rng.gen_range(0..4) {
        // Exactly on a candidate radius.
        0 => cands[rng.gen_range(0..cands.len())],
        // Strictly inside an interval.
        1 => {
            let i = rng.gen_range(0..cands.len());
            let lo = cands[i];
            let hi = cands.get(i + 1).copied().unwrap_or(lo + 0.5);
            0.5 * (lo + hi)
        }
        // Beyond every candidate: one big edge.
        2 => cands.last().unwrap() + 0.25,
        // Zero fidelity.
        _ => 0.0,
    };
    base.with_epsilon(eps).expect("epsilon is nonnegative")
}

/// Count of positive-probability vertices lying in more than one maximal
/// edge, plus the total free channel parameters they contribute.
pub fn ambiguity_profile(inst: &ProblemInstance) -> (usize, usize) {
    let graph = build_hypergraph(inst).expect("instance within guard");
    let mut ambiguous = 0;
    let mut free = 0;
    for x in 0..inst.nx {
        if inst.px(x) == 0.0 {
            continue;
        }
        let deg = graph.edges_containing(x).len();
        if deg >= 2 {
            ambiguous += 1;
            free += deg - 1;
        }
    }
    (ambiguous, free)
}

/// Random zero-fidelity instance satisfying the both-zero-or-both-positive
/// probability condition, by rejection. Uses repeated function values and
/// occasional zero cells so the condition is exercised nontrivially.
pub fn random_condition1_instance(rng: &mut ChaCha12Rng) -> ProblemInstance {
    loop {
        let nx = rng.gen_range(2..=6);
        let ny = rng.gen_range(1..=3usize);
        // Few distinct values per column forces repeated rows.
        let f: Vec<Vec<Vec<f64>>> = (0..nx)
            .map(|_| (0..ny).map(|_| vec![rng.gen_range(0..3) as f64]).collect())
            .collect();
        let mut p: Vec<Vec<f64>> = (0..nx)
            .map(|_| (0..ny).map(|_| rng.gen::<f64>() + 0.05).collect())
            .collect();
        if rng.gen_bool(0.5) {
            // Zero out whole columns for some x rows; column-aligned zeros
            // keep a chance of satisfying the condition.
            for x in 0..nx {
                if rng.gen_bool(0.2) {
                    let y = rng.gen_range(0..ny);
                    p[x][y] = 0.0;
                }
            }
        }
        let total: f64 = p.iter().flatten().sum();
        if total <= 0.0 {
            continue;
        }
        for row in &mut p {
            for v in row.iter_mut() {
                *v /= total;
            }
        }
        let inst = match ProblemInstance::new(nx, ny, 1, 0.0, p, f) {
            Ok(inst) => inst,
            Err(_) => continue,
        };
        if epsent::hypergraph::check_condition1(&inst) {
            return inst;
        }
    }
}
