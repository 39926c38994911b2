//! Problem-instance data model, probability utilities, distortion and
//! error-probability evaluation, and instance file I/O.
//!
//! An instance bundles finite alphabets for the source `X` and side
//! information `Y`, a joint pmf, a table of function values `f(x,y)` in
//! R^dim, and the fidelity cap `epsilon`. "No side information" is the
//! special case `ny = 1` with `p(y) = 1`; every formula below covers both.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::entropy::QuantizerChannel;
use crate::error::{Error, Result};

/// Tolerance for pmf normalization checks.
pub const NORM_TOL: f64 = 1e-12;

/// Absolute tolerance for all geometric / fidelity comparisons. Instance
/// files carry exact-rational values rounded to double precision, so a
/// boundary radius may land a few ulps past `epsilon`; comparisons admit it.
pub const GEOM_TOL: f64 = 1e-9;

/// A finite source-coding-for-computing instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemInstance {
    /// Number of source symbols.
    pub nx: usize,
    /// Number of side-information symbols (1 = no side information).
    pub ny: usize,
    /// Dimension of the value space.
    pub dim: usize,
    /// Fidelity cap on the Euclidean reconstruction error.
    pub epsilon: f64,
    /// Joint pmf, `p[x][y]`.
    pub p: Vec<Vec<f64>>,
    /// Function table, `f[x][y]` is a point in R^dim.
    pub f: Vec<Vec<Vec<f64>>>,
}

impl ProblemInstance {
    pub fn new(
        nx: usize,
        ny: usize,
        dim: usize,
        epsilon: f64,
        p: Vec<Vec<f64>>,
        f: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let inst = ProblemInstance { nx, ny, dim, epsilon, p, f };
        inst.validate()?;
        Ok(inst)
    }

    /// Checks every structural invariant, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let fail = |field: &str, reason: String| {
            Err(Error::InvalidInstance { field: field.into(), reason })
        };
        if self.nx == 0 {
            return fail("nx", "must be at least 1".into());
        }
        if self.ny == 0 {
            return fail("ny", "must be at least 1".into());
        }
        if self.dim == 0 {
            return fail("dim", "must be at least 1".into());
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return fail("epsilon", format!("must be a finite nonnegative real, got {}", self.epsilon));
        }
        if self.p.len() != self.nx {
            return fail("p", format!("expected {} rows, got {}", self.nx, self.p.len()));
        }
        let mut total = 0.0;
        for (x, row) in self.p.iter().enumerate() {
            if row.len() != self.ny {
                return fail("p", format!("row {} has {} entries, expected {}", x, row.len(), self.ny));
            }
            for (y, &v) in row.iter().enumerate() {
                if !(v >= 0.0) || !v.is_finite() {
                    return fail("p", format!("p[{}][{}] = {} is negative or non-finite", x, y, v));
                }
                total += v;
            }
        }
        if (total - 1.0).abs() > NORM_TOL {
            return fail("p", format!("probabilities sum to {}, expected 1 within {:e}", total, NORM_TOL));
        }
        if self.f.len() != self.nx {
            return fail("f", format!("expected {} rows, got {}", self.nx, self.f.len()));
        }
        for (x, row) in self.f.iter().enumerate() {
            if row.len() != self.ny {
                return fail("f", format!("row {} has {} entries, expected {}", x, row.len(), self.ny));
            }
            for (y, pt) in row.iter().enumerate() {
                if pt.len() != self.dim {
                    return fail(
                        "f",
                        format!("f[{}][{}] has {} coordinates, expected {}", x, y, pt.len(), self.dim),
                    );
                }
                if pt.iter().any(|c| !c.is_finite()) {
                    return fail("f", format!("f[{}][{}] has a non-finite coordinate", x, y));
                }
            }
        }
        Ok(())
    }

    /// Same instance with a different fidelity cap.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        let mut inst = self.clone();
        inst.epsilon = epsilon;
        inst.validate()?;
        Ok(inst)
    }

    pub fn point(&self, x: usize, y: usize) -> &[f64] {
        &self.f[x][y]
    }

    /// Marginal p(x).
    pub fn px(&self, x: usize) -> f64 {
        self.p[x].iter().sum()
    }

    /// Marginal p(y).
    pub fn py(&self, y: usize) -> f64 {
        self.p.iter().map(|row| row[y]).sum()
    }

    pub fn p_x_given_y(&self, x: usize, y: usize) -> f64 {
        let py = self.py(y);
        if py > 0.0 {
            self.p[x][y] / py
        } else {
            0.0
        }
    }

    pub fn p_y_given_x(&self, y: usize, x: usize) -> f64 {
        let px = self.px(x);
        if px > 0.0 {
            self.p[x][y] / px
        } else {
            0.0
        }
    }

    /// Marginal distribution of X.
    pub fn x_marginal(&self) -> Distribution {
        Distribution { probs: (0..self.nx).map(|x| self.px(x)).collect() }
    }

    /// True iff p(x,y) = p(x)p(y) for every pair, within `tol`.
    pub fn is_independent(&self, tol: f64) -> std::result::Result<(), (usize, usize, f64)> {
        for x in 0..self.nx {
            for y in 0..self.ny {
                let delta = (self.p[x][y] - self.px(x) * self.py(y)).abs();
                if delta > tol {
                    return Err((x, y, delta));
                }
            }
        }
        Ok(())
    }

    fn check_indices(&self, x: usize, y: usize) -> Result<()> {
        if x >= self.nx {
            return Err(Error::IndexOutOfRange { what: format!("x = {} (nx = {})", x, self.nx) });
        }
        if y >= self.ny {
            return Err(Error::IndexOutOfRange { what: format!("y = {} (ny = {})", y, self.ny) });
        }
        Ok(())
    }

    /// Canonical JSON serialization (pretty, fixed key order, trailing newline).
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }
}

/// Loads and validates an instance file (see `to_canonical_json` for the format).
pub fn load_instance(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    let text = std::fs::read_to_string(path)?;
    load_instance_str(&text)
}

pub fn load_instance_str(text: &str) -> Result<ProblemInstance> {
    let inst: ProblemInstance = serde_json::from_str(text)?;
    inst.validate()?;
    Ok(inst)
}

pub fn save_instance(inst: &ProblemInstance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, inst.to_canonical_json())?;
    Ok(())
}

/// A pmf over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if let Some((i, &v)) = probs.iter().enumerate().find(|(_, &v)| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInstance {
                field: "probs".into(),
                reason: format!("entry {} = {} is negative or non-finite", i, v),
            });
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInstance {
                field: "probs".into(),
                reason: format!("sums to {}, expected 1 within {:e}", total, NORM_TOL),
            });
        }
        Ok(Distribution { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2())
            .sum::<f64>()
    }
}

/// Per-block symbol-error accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// Blocklength.
    pub n: usize,
    /// Symbols whose reconstruction error exceeds epsilon.
    pub violations: usize,
    /// violations / n.
    pub p_avg: f64,
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
}

/// Per-symbol maximal-distortion indicator: 1 iff the reconstruction `z`
/// lies farther than epsilon from f(x,y).
pub fn distortion_eps(inst: &ProblemInstance, x: usize, y: usize, z: &[f64]) -> Result<u8> {
    inst.check_indices(x, y)?;
    if z.len() != inst.dim {
        return Err(Error::DimensionMismatch { expected: inst.dim, got: z.len() });
    }
    let d = euclidean_distance(z, inst.point(x, y));
    Ok(u8::from(d > inst.epsilon + GEOM_TOL))
}

/// Average symbol-error probability of a reconstruction sequence.
pub fn p_avg(
    inst: &ProblemInstance,
    xs: &[usize],
    ys: &[usize],
    zs: &[Vec<f64>],
) -> Result<ErrorReport> {
    if xs.len() != ys.len() || xs.len() != zs.len() {
        return Err(Error::LengthMismatch {
            what: format!("xs ({}), ys ({}), zs ({})", xs.len(), ys.len(), zs.len()),
        });
    }
    if xs.is_empty() {
        return Err(Error::LengthMismatch { what: "empty sequences".into() });
    }
    let mut violations = 0usize;
    for ((&x, &y), z) in xs.iter().zip(ys).zip(zs) {
        violations += distortion_eps(inst, x, y, z)? as usize;
    }
    Ok(ErrorReport { n: xs.len(), violations, p_avg: violations as f64 / xs.len() as f64 })
}

/// Conditional mutual information I(W;X|Y) in bits for a quantizer channel.
///
/// I(W;X|Y) = sum_y p(y) sum_{x,w} p(x|y) p(w|x) log2( p(w|x) / p(w|y) )
/// with p(w|y) = sum_x p(x|y) p(w|x). Zero-probability terms contribute 0;
/// y symbols with p(y) = 0 are skipped.
pub fn conditional_mutual_information(
    inst: &ProblemInstance,
    ch: &QuantizerChannel,
) -> Result<f64> {
    let rows = ch.rows();
    if rows.len() != inst.nx {
        return Err(Error::LengthMismatch {
            what: format!("channel has {} rows, instance has {} symbols", rows.len(), inst.nx),
        });
    }
    let nw = ch.num_edges();
    for (x, row) in rows.iter().enumerate() {
        if inst.px(x) == 0.0 {
            continue;
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > GEOM_TOL {
            return Err(Error::ChannelNotNormalized { vertex: x, sum });
        }
    }
    let mut mi = 0.0;
    for y in 0..inst.ny {
        let py = inst.py(y);
        if py <= 0.0 {
            continue;
        }
        let mut pw_given_y = vec![0.0; nw];
        for x in 0..inst.nx {
            let pxy = inst.p_x_given_y(x, y);
            if pxy == 0.0 {
                continue;
            }
            for w in 0..nw {
                pw_given_y[w] += pxy * rows[x][w];
            }
        }
        for x in 0..inst.nx {
            let pxy = inst.p_x_given_y(x, y);
            if pxy == 0.0 {
                continue;
            }
            for w in 0..nw {
                let pwx = rows[x][w];
                if pwx > 0.0 {
                    mi += py * pxy * pwx * (pwx / pw_given_y[w]).log2();
                }
            }
        }
    }
    Ok(mi)
}
