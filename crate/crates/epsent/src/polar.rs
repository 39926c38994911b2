//! Randomized quantization plus polar coding for a binary quantizer.
//!
//! The entropy solver supplies a binary test channel (W, X). Blocks of
//! source symbols are encoded by a randomized successive-cancellation pass
//! over u = w G_N with G_N = F^{tensor n} in natural index order (no
//! bit-reversal; the transform is its own inverse). Transmitted positions
//! are sampled from P(u_i | u_1^{i-1}, x_1^N); frozen positions follow the
//! deterministic rule "most probable u_i given the past under the
//! prior-only law", which the decoder replays bit for bit, so encoder and
//! decoder always agree on the reconstructed w.
//!
//! Position reliabilities are estimated by Monte Carlo: sample (w, x)
//! blocks, run the exact SC probability recursion along the true path, and
//! average the conditional Bhattacharyya parameters, once given the
//! observed block (z_cond) and once given the past alone (z_prior).
//! Positions where the source resolves the most uncertainty (z_prior high,
//! z_cond low) carry the information and are transmitted; the rest are
//! frozen.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{solve_entropy, ReconstructionMap, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::hypergraph::build_hypergraph;
use crate::model::{p_avg, ProblemInstance};
use crate::rng::{derive_seed, sample_pmf};

/// Default Monte-Carlo sample count for reliability estimation.
pub const DEFAULT_DESIGN_SAMPLES: usize = 10_000;

/// Default margin of the code rate above I(W;X).
pub const DEFAULT_RATE_MARGIN: f64 = 0.1;

/// A frozen-set design for one blocklength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarDesign {
    /// Blocklength exponent; N = 2^n_log.
    pub n_log: u32,
    /// p(w) over {0, 1}.
    pub prior: Vec<f64>,
    /// Test channel p(x|w), one row per w.
    pub test_channel: Vec<Vec<f64>>,
    /// Monte-Carlo estimates of Z(U_i | U_1^{i-1}, X_1^N), clamped to [0,1].
    pub z_cond: Vec<f64>,
    /// Monte-Carlo estimates of Z(U_i | U_1^{i-1}), clamped to [0,1].
    pub z_prior: Vec<f64>,
    /// Transmitted positions, ascending.
    pub info_set: Vec<usize>,
}

impl PolarDesign {
    pub fn n(&self) -> usize {
        1usize << self.n_log
    }

    /// Code rate |I|/N.
    pub fn rate(&self) -> f64 {
        self.info_set.len() as f64 / self.n() as f64
    }

    /// Source marginal p(x) implied by prior and test channel.
    pub fn px(&self) -> Vec<f64> {
        let nx = self.test_channel[0].len();
        (0..nx)
            .map(|x| self.prior[0] * self.test_channel[0][x] + self.prior[1] * self.test_channel[1][x])
            .collect()
    }

    /// Posterior p(w|x) rows implied by prior and test channel.
    pub fn posterior(&self) -> Vec<[f64; 2]> {
        let px = self.px();
        (0..px.len())
            .map(|x| {
                if px[x] > 0.0 {
                    [
                        self.prior[0] * self.test_channel[0][x] / px[x],
                        self.prior[1] * self.test_channel[1][x] / px[x],
                    ]
                } else {
                    [0.5, 0.5]
                }
            })
            .collect()
    }

    /// I(W;X) in bits for the designed test channel.
    pub fn mutual_information(&self) -> f64 {
        let px = self.px();
        let mut mi = 0.0;
        for w in 0..2 {
            for (x, &pxw) in self.test_channel[w].iter().enumerate() {
                let joint = self.prior[w] * pxw;
                if joint > 0.0 {
                    mi += joint * (pxw / px[x]).log2();
                }
            }
        }
        mi
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("design serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let design: PolarDesign = serde_json::from_str(text)?;
        if design.z_cond.len() != design.n() || design.z_prior.len() != design.n() {
            return Err(Error::CorruptBlock("design z arrays do not match blocklength".into()));
        }
        Ok(design)
    }
}

/// Rate and distortion of a multi-block run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarRunReport {
    /// |I|/N.
    pub rate: f64,
    /// Fraction of symbols whose reconstruction missed by more than epsilon.
    pub distortion: f64,
    pub blocks: usize,
}

/// Source Bhattacharyya parameter Z(W|X) = 2 sum_x p(x) sqrt(p(0|x) p(1|x)).
pub fn bhattacharyya(prior: &[f64], test_channel: &[Vec<f64>]) -> Result<f64> {
    if prior.len() != 2 || test_channel.len() != 2 {
        return Err(Error::PreconditionViolated(format!(
            "Bhattacharyya parameter needs binary w, got {} symbols",
            prior.len().max(test_channel.len())
        )));
    }
    let nx = test_channel[0].len();
    let mut z = 0.0;
    for x in 0..nx {
        let j0 = prior[0] * test_channel[0][x];
        let j1 = prior[1] * test_channel[1][x];
        let px = j0 + j1;
        if px > 0.0 {
            z += 2.0 * px * ((j0 / px) * (j1 / px)).sqrt();
        }
    }
    Ok(z)
}

/// u = w F^{tensor n} over GF(2); self-inverse.
pub fn polar_transform(w: &[u8]) -> Vec<u8> {
    let n = w.len();
    debug_assert!(n.is_power_of_two());
    if n == 1 {
        return w.to_vec();
    }
    let m = n / 2;
    let a: Vec<u8> = (0..m).map(|j| w[j] ^ w[m + j]).collect();
    let b: Vec<u8> = w[m..].to_vec();
    let mut out = polar_transform(&a);
    out.extend(polar_transform(&b));
    out
}

/// A pair of per-letter posteriors carried through the SC recursion: the
/// law given the observed block and the prior-only law.
#[derive(Debug, Clone, Copy)]
struct NodeDist {
    cond: [f64; 2],
    prior: [f64; 2],
}

fn normalize(d: [f64; 2]) -> [f64; 2] {
    let s = d[0] + d[1];
    if s > 0.0 && s.is_finite() {
        [d[0] / s, d[1] / s]
    } else {
        // Conditioning on an impossible prefix (a frozen bit overrode a
        // near-deterministic position); any distribution is consistent.
        [0.5, 0.5]
    }
}

/// Law of s = w_a xor w_b.
fn check_node(a: NodeDist, b: NodeDist) -> NodeDist {
    NodeDist {
        cond: normalize([
            a.cond[0] * b.cond[0] + a.cond[1] * b.cond[1],
            a.cond[0] * b.cond[1] + a.cond[1] * b.cond[0],
        ]),
        prior: normalize([
            a.prior[0] * b.prior[0] + a.prior[1] * b.prior[1],
            a.prior[0] * b.prior[1] + a.prior[1] * b.prior[0],
        ]),
    }
}

/// Law of w_b given s = w_a xor w_b.
fn var_node(a: NodeDist, b: NodeDist, s: u8) -> NodeDist {
    let s = s as usize;
    NodeDist {
        cond: normalize([a.cond[s] * b.cond[0], a.cond[s ^ 1] * b.cond[1]]),
        prior: normalize([a.prior[s] * b.prior[0], a.prior[s ^ 1] * b.prior[1]]),
    }
}

/// Reusable scratch for the recursion; sized once per blocklength.
struct ScEngine {
    dist_bufs: Vec<Vec<NodeDist>>,
    s_bufs: Vec<Vec<u8>>,
}

impl ScEngine {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let mut dist_bufs = Vec::new();
        let mut s_bufs = Vec::new();
        let mut size = n / 2;
        while size >= 1 {
            dist_bufs.push(vec![NodeDist { cond: [0.5; 2], prior: [0.5; 2] }; size]);
            s_bufs.push(vec![0u8; size]);
            size /= 2;
        }
        ScEngine { dist_bufs, s_bufs }
    }

    /// One full pass: visits every index in order, handing `decide` the two
    /// sequential conditionals P(u_i | u_1^{i-1}, x_1^N) and
    /// P(u_i | u_1^{i-1}); the returned bit is fed back into the recursion.
    /// Writes the implied w block into `w_out`.
    fn run(
        &mut self,
        leaves: &[NodeDist],
        decide: &mut impl FnMut(usize, [f64; 2], [f64; 2]) -> u8,
        w_out: &mut [u8],
    ) {
        sc_rec(leaves, &mut self.dist_bufs, &mut self.s_bufs, 0, decide, w_out);
    }
}

fn sc_rec(
    leaves: &[NodeDist],
    scratch: &mut [Vec<NodeDist>],
    s_scratch: &mut [Vec<u8>],
    base: usize,
    decide: &mut impl FnMut(usize, [f64; 2], [f64; 2]) -> u8,
    w_out: &mut [u8],
) {
    let n = leaves.len();
    if n == 1 {
        let d = leaves[0];
        w_out[0] = decide(base, normalize(d.cond), normalize(d.prior));
        return;
    }
    let m = n / 2;
    let (child, deeper) = scratch.split_first_mut().expect("scratch sized for depth");
    let (s_buf, s_deeper) = s_scratch.split_first_mut().expect("scratch sized for depth");
    for j in 0..m {
        child[j] = check_node(leaves[j], leaves[m + j]);
    }
    sc_rec(&child[..m], deeper, s_deeper, base, decide, &mut s_buf[..m]);
    for j in 0..m {
        child[j] = var_node(leaves[j], leaves[m + j], s_buf[j]);
    }
    sc_rec(&child[..m], deeper, s_deeper, base + m, decide, &mut w_out[m..]);
    for j in 0..m {
        w_out[j] = s_buf[j] ^ w_out[m + j];
    }
}

/// Monte-Carlo estimates of the conditional Bhattacharyya sequences
/// Z(U_i | U_1^{i-1}, X_1^N) and Z(U_i | U_1^{i-1}).
///
/// Each sample draws (w, x) i.i.d. from p(x) p(w|x), computes u = w G_N,
/// and runs the exact SC recursion along the true u path, averaging
/// 2 sqrt(P(0|.) P(1|.)) per position for both laws.
pub fn estimate_polarization(
    px: &[f64],
    posterior: &[[f64; 2]],
    prior: &[f64; 2],
    n_log: u32,
    samples: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if samples < 100 {
        return Err(Error::PreconditionViolated(format!(
            "polarization estimate needs at least 100 samples, got {samples}"
        )));
    }
    let n = 1usize << n_log;
    const CHUNK: usize = 64;
    let chunks = samples.div_ceil(CHUNK);
    // Fixed chunking plus ordered summation keeps the estimate bit-identical
    // under any thread schedule.
    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(samples);
            let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, chunk as u64));
            let mut engine = ScEngine::new(n);
            let mut z_cond = vec![0.0; n];
            let mut z_prior = vec![0.0; n];
            let mut w = vec![0u8; n];
            let mut w_out = vec![0u8; n];
            let mut leaves = vec![NodeDist { cond: [0.5; 2], prior: [0.5; 2] }; n];
            for _ in lo..hi {
                for i in 0..n {
                    let x = sample_pmf(&mut rng, px);
                    let pw1 = posterior[x][1];
                    w[i] = u8::from(rng.gen::<f64>() < pw1);
                    leaves[i] = NodeDist { cond: posterior[x], prior: [prior[0], prior[1]] };
                }
                let u = polar_transform(&w);
                let mut decide = |i: usize, cond: [f64; 2], pr: [f64; 2]| -> u8 {
                    z_cond[i] += 2.0 * (cond[0] * cond[1]).sqrt();
                    z_prior[i] += 2.0 * (pr[0] * pr[1]).sqrt();
                    u[i]
                };
                engine.run(&leaves, &mut decide, &mut w_out);
                debug_assert_eq!(w_out, w);
            }
            (z_cond, z_prior)
        })
        .collect();
    let mut z_cond = vec![0.0; n];
    let mut z_prior = vec![0.0; n];
    for (zc, zp) in &partials {
        for i in 0..n {
            z_cond[i] += zc[i];
            z_prior[i] += zp[i];
        }
    }
    for i in 0..n {
        z_cond[i] = (z_cond[i] / samples as f64).clamp(0.0, 1.0);
        z_prior[i] = (z_prior[i] / samples as f64).clamp(0.0, 1.0);
    }
    Ok((z_cond, z_prior))
}

/// Picks the transmitted set at the target rate and assembles the design.
///
/// Positions are ranked by z_prior - z_cond, descending: a high score means
/// the past alone leaves the bit uncertain but the source block pins it
/// down, exactly the positions the decoder cannot infer. Frozen positions
/// are either already predictable from the past (z_prior small) or carry
/// pure quantization randomness (z_cond large), and the deterministic
/// frozen rule is harmless for both.
pub fn select_sets(
    prior: &[f64],
    test_channel: &[Vec<f64>],
    z_cond: Vec<f64>,
    z_prior: Vec<f64>,
    target_rate: f64,
) -> Result<PolarDesign> {
    let n = z_cond.len();
    if !n.is_power_of_two() || z_prior.len() != n {
        return Err(Error::PreconditionViolated(format!(
            "z sequences must share a power-of-two length, got {} and {}",
            n,
            z_prior.len()
        )));
    }
    let design = PolarDesign {
        n_log: n.trailing_zeros(),
        prior: prior.to_vec(),
        test_channel: test_channel.to_vec(),
        z_cond,
        z_prior,
        info_set: Vec::new(),
    };
    let mi = design.mutual_information();
    if !(target_rate > mi) {
        return Err(Error::InfeasibleRate { target: target_rate, mutual_information: mi });
    }
    let k = ((n as f64 * target_rate).ceil() as usize).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let sa = design.z_prior[a] - design.z_cond[a];
        let sb = design.z_prior[b] - design.z_cond[b];
        sb.partial_cmp(&sa).unwrap().then(a.cmp(&b))
    });
    let mut info_set: Vec<usize> = order[..k].to_vec();
    info_set.sort_unstable();
    Ok(PolarDesign { info_set, ..design })
}

/// Encoder output: the transmitted bits plus the quantized block the
/// encoder committed to (the decoder reproduces exactly the same w).
#[derive(Debug, Clone, PartialEq)]
pub struct PolarEncoding {
    /// u restricted to the info set, ascending index order.
    pub message: Vec<u8>,
    /// w = u G_N.
    pub w: Vec<u8>,
}

fn frozen_bit(prior_d: [f64; 2]) -> u8 {
    u8::from(prior_d[1] > prior_d[0])
}

/// Randomized SC encoding of one source block.
pub fn polar_encode(design: &PolarDesign, xs: &[usize], seed: u64) -> Result<PolarEncoding> {
    let n = design.n();
    if xs.len() != n {
        return Err(Error::LengthMismatch { what: format!("block of {} symbols, N = {}", xs.len(), n) });
    }
    let posterior = design.posterior();
    let nx = posterior.len();
    if let Some(&bad) = xs.iter().find(|&&x| x >= nx) {
        return Err(Error::IndexOutOfRange { what: format!("x = {bad} (nx = {nx})") });
    }
    let prior = [design.prior[0], design.prior[1]];
    let leaves: Vec<NodeDist> =
        xs.iter().map(|&x| NodeDist { cond: posterior[x], prior }).collect();
    let mut info = vec![false; n];
    for &i in &design.info_set {
        info[i] = true;
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut u = vec![0u8; n];
    let mut decide = |i: usize, cond: [f64; 2], prior_d: [f64; 2]| -> u8 {
        let bit = if info[i] {
            u8::from(rng.gen::<f64>() < cond[1])
        } else {
            frozen_bit(prior_d)
        };
        u[i] = bit;
        bit
    };
    let mut w = vec![0u8; n];
    ScEngine::new(n).run(&leaves, &mut decide, &mut w);
    let message = design.info_set.iter().map(|&i| u[i]).collect();
    Ok(PolarEncoding { message, w })
}

/// Deterministic SC decoding: rebuilds the frozen bits with the same
/// prior-only rule and inverts the transform. Returns the quantized block
/// and, when a reconstruction map is given, the output points g(w, y).
pub fn polar_decode(
    design: &PolarDesign,
    message: &[u8],
    recon: Option<&ReconstructionMap>,
    ys: Option<&[usize]>,
) -> Result<(Vec<u8>, Vec<Vec<f64>>)> {
    let n = design.n();
    if message.len() != design.info_set.len() {
        return Err(Error::LengthMismatch {
            what: format!("message of {} bits, info set of {}", message.len(), design.info_set.len()),
        });
    }
    if message.iter().any(|&b| b > 1) {
        return Err(Error::CorruptBlock("message contains a non-binary value".into()));
    }
    if let Some(ys) = ys {
        if ys.len() != n {
            return Err(Error::LengthMismatch { what: format!("ys of {}, N = {}", ys.len(), n) });
        }
    }
    let prior = [design.prior[0], design.prior[1]];
    let leaves = vec![NodeDist { cond: prior, prior }; n];
    let mut next_info = vec![u8::MAX; n];
    for (&i, &bit) in design.info_set.iter().zip(message) {
        next_info[i] = bit;
    }
    let mut decide = |i: usize, _cond: [f64; 2], prior_d: [f64; 2]| -> u8 {
        if next_info[i] != u8::MAX {
            next_info[i]
        } else {
            frozen_bit(prior_d)
        }
    };
    let mut w = vec![0u8; n];
    ScEngine::new(n).run(&leaves, &mut decide, &mut w);
    let mut points = Vec::new();
    if let Some(recon) = recon {
        points.reserve(n);
        for (i, &wi) in w.iter().enumerate() {
            let y = ys.map_or(0, |ys| ys[i]);
            let z = recon.get(wi as usize, y).ok_or_else(|| {
                Error::PreconditionViolated(format!("no reconstruction for edge {wi} at y = {y}"))
            })?;
            points.push(z.to_vec());
        }
    }
    Ok((w, points))
}

/// Builds a design from an instance: solve the entropy problem, require a
/// binary quantizer, estimate reliabilities, and pick the sets. The rate
/// defaults to I(W;X) + 0.1.
pub fn design_for_instance(
    inst: &ProblemInstance,
    n_log: u32,
    target_rate: Option<f64>,
    samples: usize,
    seed: u64,
) -> Result<(PolarDesign, ReconstructionMap)> {
    if inst.ny != 1 {
        return Err(Error::PreconditionViolated(
            "polar codec handles the no-side-information case (ny = 1)".into(),
        ));
    }
    let graph = build_hypergraph(inst)?;
    if graph.maximal_edges.len() != 2 {
        return Err(Error::NonBinaryQuantizer { edges: graph.maximal_edges.len() });
    }
    let sol = solve_entropy(inst, &graph, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let px: Vec<f64> = (0..inst.nx).map(|x| inst.px(x)).collect();
    let posterior: Vec<[f64; 2]> =
        sol.channel.rows().iter().map(|r| [r[0], r[1]]).collect();
    let mut prior = [0.0f64; 2];
    for (x, post) in posterior.iter().enumerate() {
        prior[0] += px[x] * post[0];
        prior[1] += px[x] * post[1];
    }
    let test_channel: Vec<Vec<f64>> = (0..2)
        .map(|w| {
            (0..inst.nx)
                .map(|x| if prior[w] > 0.0 { px[x] * posterior[x][w] / prior[w] } else { 0.0 })
                .collect()
        })
        .collect();
    let (z_cond, z_prior) = estimate_polarization(&px, &posterior, &prior, n_log, samples, seed)?;
    let rate = target_rate.unwrap_or(sol.value + DEFAULT_RATE_MARGIN);
    let design = select_sets(&prior, &test_channel, z_cond, z_prior, rate)?;
    Ok((design, sol.recon))
}

/// Runs `blocks` seeded end-to-end blocks and measures the empirical
/// distortion (which is exactly the average symbol-error probability of
/// the reconstruction).
pub fn run_polar(
    inst: &ProblemInstance,
    design: &PolarDesign,
    recon: &ReconstructionMap,
    blocks: usize,
    seed: u64,
) -> Result<PolarRunReport> {
    if blocks == 0 {
        return Err(Error::PreconditionViolated("need at least one block".into()));
    }
    let n = design.n();
    let px = design.px();
    let mut violations = 0usize;
    for b in 0..blocks {
        let block_seed = derive_seed(seed, b as u64);
        let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(block_seed, 0));
        let xs: Vec<usize> = (0..n).map(|_| sample_pmf(&mut rng, &px)).collect();
        let enc = polar_encode(design, &xs, derive_seed(block_seed, 1))?;
        let (w_hat, z_hat) = polar_decode(design, &enc.message, Some(recon), None)?;
        debug_assert_eq!(w_hat, enc.w);
        let ys = vec![0usize; n];
        let report = p_avg(inst, &xs, &ys, &z_hat)?;
        violations += report.violations;
    }
    Ok(PolarRunReport {
        rate: design.rate(),
        distortion: violations as f64 / (n * blocks) as f64,
        blocks,
    })
}
