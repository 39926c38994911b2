//! Quantize-then-compress pipeline for instances with a unique clustering:
//! each source symbol maps to its unique maximal hyperedge, the cluster
//! stream is LZW-compressed, and the decoder reconstructs through the
//! per-edge enclosing-ball centers. Reconstruction error never exceeds
//! epsilon, so the only figure of merit is the empirical rate.
//!
//! The quantizer depends on the function table alone, not on the source
//! pmf, which is what makes the entropy-coding stage universal. Dependent
//! side information would need a distributed coding stage this module does
//! not implement, so dependent instances are refused.

use crate::bits::EncodedBlock;
use crate::entropy::build_reconstruction;
use crate::error::{Error, Result};
use crate::hypergraph::{build_hypergraph, unique_clustering, Clustering};
use crate::lzw::{lzw_decode, lzw_encode};
use crate::model::{p_avg, ErrorReport, ProblemInstance, GEOM_TOL};

/// Element-wise application of the cluster quantizer.
pub fn quantize_stream(
    inst: &ProblemInstance,
    clustering: &Clustering,
    xs: &[usize],
) -> Result<Vec<u16>> {
    xs.iter()
        .map(|&x| {
            if x >= inst.nx {
                return Err(Error::IndexOutOfRange { what: format!("x = {} (nx = {})", x, inst.nx) });
            }
            clustering
                .edge_of(x)
                .map(|e| e as u16)
                .ok_or(Error::UnassignedSymbol { symbol: x })
        })
        .collect()
}

/// End-to-end run: quantize, LZW-encode, decode, reconstruct, and measure.
pub fn modular_pipeline(
    inst: &ProblemInstance,
    xs: &[usize],
    ys: &[usize],
) -> Result<(EncodedBlock, Vec<Vec<f64>>, ErrorReport)> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            what: format!("xs ({}) vs ys ({})", xs.len(), ys.len()),
        });
    }
    if let Err((x, y, delta)) = inst.is_independent(GEOM_TOL) {
        return Err(Error::DependentSources { x, y, delta });
    }
    let graph = build_hypergraph(inst)?;
    let clustering = unique_clustering(inst, &graph)?;
    let recon = build_reconstruction(inst, &graph)?;

    let quantized = quantize_stream(inst, &clustering, xs)?;
    let block = lzw_encode(&quantized, graph.maximal_edges.len() as u16)?;

    // Decoder side: recover the cluster stream and map through g(w, y).
    let decoded = lzw_decode(&block)?;
    debug_assert_eq!(decoded, quantized);
    let mut reconstructions = Vec::with_capacity(decoded.len());
    for (&w, &y) in decoded.iter().zip(ys) {
        let z = recon.get(w as usize, y).ok_or_else(|| {
            Error::PreconditionViolated(format!(
                "no reconstruction for edge {w} at y = {y} (zero-probability pair observed)"
            ))
        })?;
        reconstructions.push(z.to_vec());
    }
    let report = p_avg(inst, xs, ys, &reconstructions)?;
    Ok((block, reconstructions, report))
}
