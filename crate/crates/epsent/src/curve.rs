//! The rate curve R(epsilon) as an exact piecewise-constant function, plus
//! the Lipschitz and surrogate-function upper bounds.
//!
//! The hypergraph can only change at radii realized by some subset of
//! function values, so sweeping the sorted candidate radii and solving one
//! entropy problem per distinct hypergraph reproduces the whole
//! (discontinuous) curve. Intervals are closed on the left: a radius equal
//! to epsilon is admitted, so the curve takes the lower value exactly at
//! each breakpoint.

use serde::{Deserialize, Serialize};

use crate::entropy::{solve_entropy, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::geometry::min_enclosing_ball;
use crate::hypergraph::{build_hypergraph, ENUMERATION_GUARD};
use crate::model::{Distribution, ProblemInstance};

/// Piecewise-constant rate curve; `rates` has one more entry than
/// `breakpoints` and the curve is right-continuous at each breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    /// Ascending fidelity values where the hypergraph (hence the rate) changes.
    pub breakpoints: Vec<f64>,
    /// Rate on each interval [b_i, b_{i+1}), starting at [0, b_0).
    pub rates: Vec<f64>,
}

impl RateCurve {
    /// Rate at a given fidelity (right-continuous lookup).
    pub fn rate_at(&self, epsilon: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= epsilon);
        self.rates[idx]
    }

    /// CSV rows (eps_lo, eps_hi, rate); the last interval ends at inf.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps_lo,eps_hi,rate\n");
        for (i, &rate) in self.rates.iter().enumerate() {
            let lo = if i == 0 { 0.0 } else { self.breakpoints[i - 1] };
            let hi = self.breakpoints.get(i).copied().unwrap_or(f64::INFINITY);
            s.push_str(&format!("{},{},{}\n", lo, hi, rate));
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("curve serializes");
        s.push('\n');
        s
    }
}

/// All fidelity values at which the hypergraph can change: the enclosing-ball
/// radii of every per-y positive-support subset of function values, sorted
/// and deduplicated at 1e-9.
pub fn critical_epsilons(inst: &ProblemInstance) -> Result<Vec<f64>> {
    if inst.nx > ENUMERATION_GUARD {
        return Err(Error::InstanceTooLarge { nx: inst.nx, guard: ENUMERATION_GUARD });
    }
    let mut radii: Vec<f64> = Vec::new();
    for y in 0..inst.ny {
        let support: Vec<usize> = (0..inst.nx).filter(|&x| inst.p[x][y] > 0.0).collect();
        if support.is_empty() {
            continue;
        }
        let m = support.len();
        for mask in 1u64..(1u64 << m) {
            let points: Vec<Vec<f64>> = (0..m)
                .filter(|&i| mask & (1 << i) != 0)
                .map(|i| inst.point(support[i], y).to_vec())
                .collect();
            radii.push(min_enclosing_ball(&points)?.radius);
        }
    }
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::new();
    for r in radii {
        if out.last().map_or(true, |&last| r - last > 1e-9) {
            out.push(r);
        }
    }
    Ok(out)
}

/// Traces R(epsilon) by solving one entropy problem per distinct hypergraph.
pub fn rate_curve(inst: &ProblemInstance) -> Result<RateCurve> {
    let candidates = critical_epsilons(inst)?;
    let mut breakpoints = Vec::new();
    let mut rates = Vec::new();
    let mut prev_edges: Option<Vec<Vec<usize>>> = None;
    for &c in &candidates {
        let at_c = inst.with_epsilon(c)?;
        let graph = build_hypergraph(&at_c)?;
        if prev_edges.as_ref() == Some(&graph.maximal_edges) {
            continue;
        }
        if prev_edges.is_some() {
            breakpoints.push(c);
        }
        let sol = solve_entropy(&at_c, &graph, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
        rates.push(sol.value);
        prev_edges = Some(graph.maximal_edges);
    }
    Ok(RateCurve { breakpoints, rates })
}

/// Achievable rate bound for an encoder that only knows the source embedding
/// and a Lipschitz constant of the (unknown) function: the entropy of the
/// identity-function instance at fidelity epsilon / L.
pub fn lipschitz_bound(
    points: &[Vec<f64>],
    px: &Distribution,
    l: f64,
    epsilon: f64,
) -> Result<f64> {
    if !(l > 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "Lipschitz constant must be positive, got {l}"
        )));
    }
    if points.len() != px.len() {
        return Err(Error::LengthMismatch {
            what: format!("{} points vs {} probabilities", points.len(), px.len()),
        });
    }
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let dim = points[0].len();
    let p: Vec<Vec<f64>> = px.as_slice().iter().map(|&v| vec![v]).collect();
    let f: Vec<Vec<Vec<f64>>> = points.iter().map(|pt| vec![pt.clone()]).collect();
    let inst = ProblemInstance::new(points.len(), 1, dim, epsilon / l, p, f)?;
    let graph = build_hypergraph(&inst)?;
    Ok(solve_entropy(&inst, &graph, DEFAULT_TOL, DEFAULT_MAX_ITER)?.value)
}

/// Achievable rate bound for an encoder that can only evaluate a surrogate
/// within `delta` of the true function: the surrogate instance solved at the
/// shrunk fidelity epsilon - 2 delta. Requires epsilon > 2 delta.
pub fn approx_function_bound(
    inst_g: &ProblemInstance,
    delta: f64,
    epsilon: f64,
) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::PreconditionViolated(format!("delta must be nonnegative, got {delta}")));
    }
    if !(epsilon > 2.0 * delta) {
        return Err(Error::PreconditionViolated(format!(
            "surrogate bound needs epsilon > 2*delta, got epsilon = {epsilon}, delta = {delta}"
        )));
    }
    let shrunk = inst_g.with_epsilon(epsilon - 2.0 * delta)?;
    let graph = build_hypergraph(&shrunk)?;
    Ok(solve_entropy(&shrunk, &graph, DEFAULT_TOL, DEFAULT_MAX_ITER)?.value)
}
