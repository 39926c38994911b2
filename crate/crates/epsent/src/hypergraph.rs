//! Characteristic hypergraph of an instance at fidelity epsilon.
//!
//! A vertex set S is a hyperedge iff for every side-information symbol y the
//! function values of the positive-probability members of S fit inside a
//! ball of radius epsilon. The feasible sets form an independence system
//! (every subset of a hyperedge is a hyperedge), which is what the
//! enumerator exploits for pruning.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::min_enclosing_ball;
use crate::model::{ProblemInstance, GEOM_TOL};

/// Exact enumeration is exponential in the worst case; anything larger than
/// this vertex count is refused outright.
pub const ENUMERATION_GUARD: usize = 24;

/// A characteristic hypergraph, stored through its maximal hyperedges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypergraph {
    /// Vertex count.
    pub nx: usize,
    /// Fidelity the graph was built with.
    pub epsilon: f64,
    /// Maximal hyperedges, sorted by size descending then lexicographically.
    pub maximal_edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// Indices of the maximal edges containing vertex `x`.
    pub fn edges_containing(&self, x: usize) -> Vec<usize> {
        self.maximal_edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.contains(&x))
            .map(|(i, _)| i)
            .collect()
    }

    /// JSON form used by the CLI and test fixtures.
    pub fn to_json(&self) -> String {
        let value = serde_json::json!({
            "epsilon": self.epsilon,
            "maximal_edges": self.maximal_edges,
        });
        let mut s = serde_json::to_string_pretty(&value).expect("hypergraph serializes");
        s.push('\n');
        s
    }
}

/// A deterministic quantizer: each positive-probability vertex maps to the
/// unique maximal edge containing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// `assignment[x]` is the maximal-edge index for vertex x; None for
    /// zero-probability vertices, which never occur in an i.i.d. stream.
    pub assignment: Vec<Option<usize>>,
}

impl Clustering {
    pub fn edge_of(&self, x: usize) -> Option<usize> {
        self.assignment.get(x).copied().flatten()
    }

    /// Number of clusters in use.
    pub fn num_clusters(&self) -> usize {
        self.assignment.iter().flatten().map(|&e| e + 1).max().unwrap_or(0)
    }
}

/// Hyperedge membership test for an arbitrary vertex set.
pub fn is_hyperedge(inst: &ProblemInstance, set: &[usize]) -> Result<bool> {
    if set.is_empty() {
        return Err(Error::PreconditionViolated("hyperedge test needs a nonempty set".into()));
    }
    for &x in set {
        if x >= inst.nx {
            return Err(Error::IndexOutOfRange { what: format!("vertex {} (nx = {})", x, inst.nx) });
        }
    }
    for y in 0..inst.ny {
        let points: Vec<Vec<f64>> = set
            .iter()
            .filter(|&&x| inst.p[x][y] > 0.0)
            .map(|&x| inst.point(x, y).to_vec())
            .collect();
        if points.is_empty() {
            continue;
        }
        let ball = min_enclosing_ball(&points)?;
        if ball.radius > inst.epsilon + GEOM_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Enumerates all maximal hyperedges.
///
/// Depth-first extension in increasing vertex order: a feasible set is only
/// extended by higher-indexed vertices that keep it feasible, and a set is
/// emitted iff no single-vertex extension (any index) stays feasible.
pub fn build_hypergraph(inst: &ProblemInstance) -> Result<Hypergraph> {
    let edges = enumerate_edges(inst, true)?;
    Ok(Hypergraph { nx: inst.nx, epsilon: inst.epsilon, maximal_edges: edges })
}

/// Every hyperedge, maximal or not. Only feasible for tiny instances; the
/// entropy tests use it to confirm that restricting the solver to maximal
/// edges loses nothing.
pub fn enumerate_hyperedges(inst: &ProblemInstance) -> Result<Vec<Vec<usize>>> {
    enumerate_edges(inst, false)
}

fn enumerate_edges(inst: &ProblemInstance, maximal_only: bool) -> Result<Vec<Vec<usize>>> {
    if inst.nx > ENUMERATION_GUARD {
        return Err(Error::InstanceTooLarge { nx: inst.nx, guard: ENUMERATION_GUARD });
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for start in 0..inst.nx {
        current.push(start);
        extend(inst, &mut current, &mut out, maximal_only)?;
        current.pop();
    }
    out.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

fn extend(
    inst: &ProblemInstance,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    maximal_only: bool,
) -> Result<()> {
    // Singletons are always feasible (a single point has radius 0), so the
    // feasibility check is skipped for |current| = 1.
    if current.len() > 1 && !is_hyperedge(inst, current)? {
        return Ok(());
    }
    if maximal_only {
        let mut maximal = true;
        for v in 0..inst.nx {
            if current.contains(&v) {
                continue;
            }
            current.push(v);
            let feasible = is_hyperedge(inst, current)?;
            current.pop();
            if feasible {
                maximal = false;
                break;
            }
        }
        if maximal {
            out.push(current.clone());
        }
    } else {
        out.push(current.clone());
    }
    let last = *current.last().expect("non-empty during extension");
    for v in (last + 1)..inst.nx {
        current.push(v);
        extend(inst, current, out, maximal_only)?;
        current.pop();
    }
    Ok(())
}

/// True iff for every y, any two symbols whose function values differ at y
/// have either both zero or both positive probability with y.
pub fn check_condition1(inst: &ProblemInstance) -> bool {
    for y in 0..inst.ny {
        for x1 in 0..inst.nx {
            for x2 in (x1 + 1)..inst.nx {
                if inst.point(x1, y) == inst.point(x2, y) {
                    continue;
                }
                let p1 = inst.p[x1][y];
                let p2 = inst.p[x2][y];
                let both_zero = p1 == 0.0 && p2 == 0.0;
                let both_positive = p1 > 0.0 && p2 > 0.0;
                if !both_zero && !both_positive {
                    return false;
                }
            }
        }
    }
    true
}

/// Extracts the partition quantizer when every positive-probability vertex
/// lies in exactly one maximal edge; errors with the offending vertex and
/// its containing edges otherwise.
pub fn unique_clustering(inst: &ProblemInstance, graph: &Hypergraph) -> Result<Clustering> {
    let mut assignment = vec![None; inst.nx];
    for x in 0..inst.nx {
        let containing = graph.edges_containing(x);
        if inst.px(x) > 0.0 {
            match containing.len() {
                1 => assignment[x] = Some(containing[0]),
                0 => {
                    return Err(Error::PreconditionViolated(format!(
                        "vertex {x} is not covered by any maximal edge"
                    )))
                }
                _ => {
                    return Err(Error::AmbiguousClustering { vertex: x, edges: containing });
                }
            }
        } else if containing.len() == 1 {
            assignment[x] = Some(containing[0]);
        }
    }
    Ok(Clustering { assignment })
}
