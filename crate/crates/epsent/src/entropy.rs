//! Functional entropy of a characteristic hypergraph.
//!
//! H_G(X|Y) is the minimum of I(W;X|Y) over channels p(w|x) whose support at
//! each vertex stays inside hyperedges containing that vertex. The problem
//! is convex in the channel, and the solver is an alternating minimization
//! of J(p, r) = sum p(x,y) p(w|x) log2( p(w|x) / r(w|y) ):
//!
//!   (i)  r(w|y) <- sum_x p(x|y) p(w|x), the exact minimizer over r;
//!   (ii) p(w|x) <- normalize over {w containing x} of
//!        prod_y r(w|y)^p(y|x), the exact minimizer over each row.
//!
//! Both steps are coordinate minimizers, so J never increases and converges
//! to the functional entropy. A brute-force simplex grid search over the
//! ambiguous vertices serves as an independent oracle for small instances.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::min_enclosing_ball;
use crate::hypergraph::Hypergraph;
use crate::model::{conditional_mutual_information, ProblemInstance, GEOM_TOL};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Internal seed for the symmetric-plateau-breaking init noise; fixed so the
/// solver is deterministic.
const INIT_NOISE_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

/// A randomized quantizer: a conditional distribution over hyperedges for
/// each vertex. Edges are stored as explicit vertex sets so that refined
/// channels (whose edges need not be maximal) fit the same type; channels
/// produced by the solver list the maximal edges in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizerChannel {
    edges: Vec<Vec<usize>>,
    rows: Vec<Vec<f64>>,
}

impl QuantizerChannel {
    pub fn new(edges: Vec<Vec<usize>>, rows: Vec<Vec<f64>>) -> Self {
        QuantizerChannel { edges, rows }
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Checks the support and normalization invariants for an instance.
    pub fn validate_for(&self, inst: &ProblemInstance) -> Result<()> {
        if self.rows.len() != inst.nx {
            return Err(Error::LengthMismatch {
                what: format!("channel rows ({}) vs nx ({})", self.rows.len(), inst.nx),
            });
        }
        for (x, row) in self.rows.iter().enumerate() {
            if row.len() != self.edges.len() {
                return Err(Error::LengthMismatch {
                    what: format!("row {} has {} entries, {} edges", x, row.len(), self.edges.len()),
                });
            }
            for (w, &v) in row.iter().enumerate() {
                if v > 0.0 && !self.edges[w].contains(&x) {
                    return Err(Error::PreconditionViolated(format!(
                        "p(w={w}|x={x}) > 0 but vertex {x} is not in edge {w}"
                    )));
                }
            }
            if inst.px(x) > 0.0 {
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > GEOM_TOL {
                    return Err(Error::ChannelNotNormalized { vertex: x, sum });
                }
            }
        }
        Ok(())
    }
}

/// Reconstruction points g(w, y), defined whenever edge w has a vertex with
/// p(x,y) > 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionMap {
    /// `points[w][y]`, None where undefined.
    pub points: Vec<Vec<Option<Vec<f64>>>>,
}

impl ReconstructionMap {
    pub fn get(&self, w: usize, y: usize) -> Option<&[f64]> {
        self.points.get(w)?.get(y)?.as_deref()
    }
}

/// Output of the entropy solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropySolution {
    /// H_G(X|Y) in bits.
    pub value: f64,
    pub channel: QuantizerChannel,
    pub recon: ReconstructionMap,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after each iteration; nonincreasing.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

impl EntropySolution {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("solution serializes");
        s.push('\n');
        s
    }
}

/// Centers of the per-(edge, y) enclosing balls of a hypergraph's maximal
/// edges. Every reconstruction point is within epsilon of each member's
/// function value, which is what makes the solved channel achievable.
pub fn build_reconstruction(inst: &ProblemInstance, graph: &Hypergraph) -> Result<ReconstructionMap> {
    reconstruction_for_edges(inst, &graph.maximal_edges)
}

pub(crate) fn reconstruction_for_edges(
    inst: &ProblemInstance,
    edges: &[Vec<usize>],
) -> Result<ReconstructionMap> {
    let mut points = Vec::with_capacity(edges.len());
    for edge in edges {
        let mut per_y = Vec::with_capacity(inst.ny);
        for y in 0..inst.ny {
            let pts: Vec<Vec<f64>> = edge
                .iter()
                .filter(|&&x| inst.p[x][y] > 0.0)
                .map(|&x| inst.point(x, y).to_vec())
                .collect();
            if pts.is_empty() {
                per_y.push(None);
            } else {
                per_y.push(Some(min_enclosing_ball(&pts)?.center));
            }
        }
        points.push(per_y);
    }
    Ok(ReconstructionMap { points })
}

/// Minimizes I(W;X|Y) over channels supported on the maximal edges.
pub fn solve_entropy(
    inst: &ProblemInstance,
    graph: &Hypergraph,
    tol: f64,
    max_iter: usize,
) -> Result<EntropySolution> {
    solve_entropy_over_edges(inst, &graph.maximal_edges, tol, max_iter)
}

/// Same minimization over an explicit hyperedge list (used to check that
/// restricting to maximal edges loses nothing).
pub fn solve_entropy_over_edges(
    inst: &ProblemInstance,
    edges: &[Vec<usize>],
    tol: f64,
    max_iter: usize,
) -> Result<EntropySolution> {
    if tol <= 0.0 {
        return Err(Error::PreconditionViolated("solver tolerance must be positive".into()));
    }
    let nx = inst.nx;
    let ny = inst.ny;
    let nw = edges.len();
    let containing: Vec<Vec<usize>> = (0..nx)
        .map(|x| {
            edges
                .iter()
                .enumerate()
                .filter(|(_, e)| e.contains(&x))
                .map(|(w, _)| w)
                .collect()
        })
        .collect();
    for x in 0..nx {
        if inst.px(x) > 0.0 && containing[x].is_empty() {
            return Err(Error::PreconditionViolated(format!(
                "vertex {x} has positive probability but no containing edge"
            )));
        }
    }

    let px: Vec<f64> = (0..nx).map(|x| inst.px(x)).collect();

    // Strictly positive start, perturbed to break symmetric plateaus.
    let mut rng = ChaCha12Rng::seed_from_u64(INIT_NOISE_SEED);
    let mut rows = vec![vec![0.0; nw]; nx];
    for x in 0..nx {
        if px[x] > 0.0 {
            for &w in &containing[x] {
                rows[x][w] = 1.0 + 0.01 * (rng.gen::<f64>() - 0.5) * 2.0;
            }
            let sum: f64 = rows[x].iter().sum();
            for v in rows[x].iter_mut() {
                *v /= sum;
            }
        } else if let Some(&w) = containing[x].first() {
            rows[x][w] = 1.0;
        }
    }

    let mut r = vec![vec![0.0; ny]; nw];
    let mut trace = Vec::new();
    let mut prev = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..max_iter {
        iterations += 1;
        // (i) r(w|y) is the W marginal given y under the current channel.
        for w in 0..nw {
            for y in 0..ny {
                r[w][y] = 0.0;
            }
        }
        for x in 0..nx {
            if px[x] == 0.0 {
                continue;
            }
            for y in 0..ny {
                let pxy = inst.p_x_given_y(x, y);
                if pxy == 0.0 {
                    continue;
                }
                for &w in &containing[x] {
                    r[w][y] += pxy * rows[x][w];
                }
            }
        }
        // With r at its minimizer, J equals I(W;X|Y) for the current channel.
        let mut objective = 0.0;
        for x in 0..nx {
            for y in 0..ny {
                let pxy = inst.p[x][y];
                if pxy == 0.0 {
                    continue;
                }
                for &w in &containing[x] {
                    let pwx = rows[x][w];
                    if pwx > 0.0 {
                        objective += pxy * pwx * (pwx / r[w][y]).log2();
                    }
                }
            }
        }
        debug_assert!(objective <= prev + 1e-9, "objective increased: {prev} -> {objective}");
        trace.push(objective);
        if prev - objective < tol {
            converged = true;
            break;
        }
        prev = objective;
        // (ii) each row moves to the exact minimizer given r.
        for x in 0..nx {
            if px[x] == 0.0 {
                continue;
            }
            let mut logits: Vec<f64> = Vec::with_capacity(containing[x].len());
            for &w in &containing[x] {
                let mut l = 0.0;
                for y in 0..ny {
                    let pyx = inst.p_y_given_x(y, x);
                    if pyx > 0.0 {
                        l += pyx * r[w][y].ln();
                    }
                }
                logits.push(l);
            }
            let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            let weights: Vec<f64> = logits.iter().map(|&l| (l - m).exp()).collect();
            for &v in &weights {
                sum += v;
            }
            for (&w, &v) in containing[x].iter().zip(&weights) {
                rows[x][w] = v / sum;
            }
        }
    }

    let channel = QuantizerChannel::new(edges.to_vec(), rows);
    let value = conditional_mutual_information(inst, &channel)?;
    let recon = reconstruction_for_edges(inst, edges)?;
    Ok(EntropySolution { value, channel, recon, iterations, converged, objective_trace: trace })
}

/// Grid-search oracle: exhaustively sweeps each ambiguous vertex's simplex
/// at resolution `step` and returns the minimum I(W;X|Y) found. Independent
/// of the iterative solver; limited to 4 free channel parameters.
pub fn entropy_oracle_grid(inst: &ProblemInstance, graph: &Hypergraph, step: f64) -> Result<f64> {
    if !(step > 0.0 && step <= 0.1) {
        return Err(Error::PreconditionViolated(format!(
            "grid step must lie in (0, 0.1], got {step}"
        )));
    }
    let edges = &graph.maximal_edges;
    let nw = edges.len();
    let ny = inst.ny;
    let containing: Vec<Vec<usize>> = (0..inst.nx)
        .map(|x| {
            edges
                .iter()
                .enumerate()
                .filter(|(_, e)| e.contains(&x))
                .map(|(w, _)| w)
                .collect()
        })
        .collect();
    let ambiguous: Vec<usize> = (0..inst.nx)
        .filter(|&x| inst.px(x) > 0.0 && containing[x].len() >= 2)
        .collect();
    let free: usize = ambiguous.iter().map(|&x| containing[x].len() - 1).sum();
    if free > 4 {
        return Err(Error::TooManyFreeParameters { count: free, limit: 4 });
    }

    let py: Vec<f64> = (0..ny).map(|y| inst.py(y)).collect();

    // p(w|y) accumulator from the forced (unambiguous) vertices.
    let mut base_acc = vec![vec![0.0; nw]; ny];
    for x in 0..inst.nx {
        if inst.px(x) == 0.0 || ambiguous.contains(&x) {
            continue;
        }
        let w = *containing[x].first().ok_or_else(|| {
            Error::PreconditionViolated(format!("vertex {x} has no containing edge"))
        })?;
        for (y, acc) in base_acc.iter_mut().enumerate() {
            acc[w] += inst.p_x_given_y(x, y);
        }
    }

    if ambiguous.is_empty() {
        return Ok(grid_leaf(&base_acc, 0.0, &py));
    }

    let k = (1.0 / step).round() as usize;
    // Per ambiguous vertex: every grid row, with its per-(y,w) additive
    // contribution and its p(x) sum_w p log p term.
    let mut grids: Vec<Vec<GridChoice>> = Vec::with_capacity(ambiguous.len());
    for &x in &ambiguous {
        let deg = containing[x].len();
        let px = inst.px(x);
        let mut choices = Vec::new();
        for comp in compositions(deg, k) {
            let q: Vec<f64> = comp.iter().map(|&c| c as f64 / k as f64).collect();
            let mut delta = Vec::new();
            for y in 0..ny {
                let pxy = inst.p_x_given_y(x, y);
                if pxy == 0.0 {
                    continue;
                }
                for (j, &w) in containing[x].iter().enumerate() {
                    if q[j] > 0.0 {
                        delta.push((y, w, pxy * q[j]));
                    }
                }
            }
            let a_term: f64 = px * q.iter().filter(|&&v| v > 0.0).map(|&v| v * v.log2()).sum::<f64>();
            choices.push(GridChoice { delta, a_term });
        }
        grids.push(choices);
    }

    // Parallel over the first vertex's grid; sequential below.
    let best = grids[0]
        .par_iter()
        .map(|choice| {
            let mut acc = base_acc.clone();
            for &(y, w, v) in &choice.delta {
                acc[y][w] += v;
            }
            grid_descend(&grids, 1, &mut acc, choice.a_term, &py)
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}

struct GridChoice {
    /// (y, w, p(x|y) * q_w) increments to the p(w|y) accumulator.
    delta: Vec<(usize, usize, f64)>,
    /// p(x) * sum_w q_w log2 q_w for this grid row.
    a_term: f64,
}

fn grid_descend(
    grids: &[Vec<GridChoice>],
    level: usize,
    acc: &mut [Vec<f64>],
    a_sum: f64,
    py: &[f64],
) -> f64 {
    if level == grids.len() {
        return grid_leaf(acc, a_sum, py);
    }
    let mut best = f64::INFINITY;
    for choice in &grids[level] {
        for &(y, w, v) in &choice.delta {
            acc[y][w] += v;
        }
        let val = grid_descend(grids, level + 1, acc, a_sum + choice.a_term, py);
        if val < best {
            best = val;
        }
        for &(y, w, v) in &choice.delta {
            acc[y][w] -= v;
        }
    }
    best
}

/// I(W;X|Y) = sum_x p(x) sum_w p(w|x) log2 p(w|x)
///          - sum_y p(y) sum_w p(w|y) log2 p(w|y);
/// `a_sum` carries the first term, `acc` the inner p(w|y) values.
fn grid_leaf(acc: &[Vec<f64>], a_sum: f64, py: &[f64]) -> f64 {
    let mut b = 0.0;
    for (y, acc_y) in acc.iter().enumerate() {
        if py[y] == 0.0 {
            continue;
        }
        for &v in acc_y {
            if v > 0.0 {
                b += py[y] * v * v.log2();
            }
        }
    }
    a_sum - b
}

/// All ways to split `total` grid ticks across `parts` nonnegative cells.
fn compositions(parts: usize, total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; parts];
    fn rec(cur: &mut Vec<usize>, idx: usize, left: usize, out: &mut Vec<Vec<usize>>) {
        if idx + 1 == cur.len() {
            cur[idx] = left;
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[idx] = v;
            rec(cur, idx + 1, left - v, out);
        }
    }
    rec(&mut cur, 0, total, &mut out);
    out
}

/// Collapses an arbitrary achievable auxiliary channel onto hyperedge
/// supports: each auxiliary symbol u maps to w(u) = {x : p(u,x) > 0}. The
/// result never increases I(.;X|Y), which the tests verify numerically.
///
/// `u_recon[u][y]` must reconstruct within epsilon whenever p(u,x,y) > 0.
pub fn refine_channel(
    inst: &ProblemInstance,
    u_rows: &[Vec<f64>],
    u_recon: &[Vec<Option<Vec<f64>>>],
) -> Result<QuantizerChannel> {
    if u_rows.len() != inst.nx {
        return Err(Error::LengthMismatch {
            what: format!("u channel has {} rows, instance has {}", u_rows.len(), inst.nx),
        });
    }
    let nu = u_rows.first().map_or(0, |r| r.len());
    for (x, row) in u_rows.iter().enumerate() {
        if row.len() != nu {
            return Err(Error::LengthMismatch { what: format!("ragged u channel at row {x}") });
        }
        if inst.px(x) > 0.0 {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > GEOM_TOL {
                return Err(Error::ChannelNotNormalized { vertex: x, sum });
            }
        }
    }
    // Precondition: zero maximal distortion under the given reconstruction.
    for u in 0..nu {
        for x in 0..inst.nx {
            if inst.px(x) == 0.0 || u_rows[x][u] == 0.0 {
                continue;
            }
            for y in 0..inst.ny {
                if inst.p[x][y] == 0.0 {
                    continue;
                }
                let ok = u_recon
                    .get(u)
                    .and_then(|per_y| per_y.get(y))
                    .and_then(|p| p.as_ref())
                    .map(|z| {
                        crate::model::euclidean_distance(z, inst.point(x, y))
                            <= inst.epsilon + GEOM_TOL
                    })
                    .unwrap_or(false);
                if !ok {
                    return Err(Error::RefinePrecondition { u, x, y });
                }
            }
        }
    }

    let mut edge_sets: Vec<Vec<usize>> = Vec::new();
    let mut u_to_edge: Vec<Option<usize>> = vec![None; nu];
    for u in 0..nu {
        let members: Vec<usize> = (0..inst.nx)
            .filter(|&x| inst.px(x) > 0.0 && u_rows[x][u] > 0.0)
            .collect();
        if members.is_empty() {
            continue;
        }
        let idx = match edge_sets.iter().position(|e| *e == members) {
            Some(i) => i,
            None => {
                edge_sets.push(members);
                edge_sets.len() - 1
            }
        };
        u_to_edge[u] = Some(idx);
    }
    let mut rows = vec![vec![0.0; edge_sets.len()]; inst.nx];
    for x in 0..inst.nx {
        if inst.px(x) == 0.0 {
            continue;
        }
        for u in 0..nu {
            if let Some(w) = u_to_edge[u] {
                rows[x][w] += u_rows[x][u];
            }
        }
    }
    Ok(QuantizerChannel::new(edge_sets, rows))
}
