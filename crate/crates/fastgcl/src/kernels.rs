//! Dense and sparse compute kernels.
//!
//! Every kernel ships a sequential implementation; with the `parallel`
//! feature, a rayon variant splits work across *disjoint output rows or
//! entries only*, so both builds produce bit-identical results (per-row
//! reduction order never changes). The `fastgcl` benches compare the two.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::graph::NormalizedAdjacency;

/// Below this many multiply-adds the rayon dispatch falls through to the
/// sequential kernel; the split overhead dominates for desk-scale shapes.
pub const PAR_THRESHOLD: usize = 1 << 16;

/// How an aggregation step reads the adjacency skeleton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggMode {
    /// Use stored coefficients 1/sqrt(d_u d_v); self-loops carry weight 1.
    Normalized,
    /// Skip self-loops and use coefficient 1 (GIN-style neighbor sum).
    NeighborSum,
}

#[inline]
fn entry_scale(mode: AggMode, coeff: f64) -> f64 {
    match mode {
        AggMode::Normalized => coeff,
        AggMode::NeighborSum => 1.0,
    }
}

fn matmul_row(out_row: &mut [f64], i: usize, a: &[f64], b: &[f64], k: usize, n: usize) {
    let a_row = &a[i * k..(i + 1) * k];
    for (p, &av) in a_row.iter().enumerate() {
        if av == 0.0 {
            continue;
        }
        let b_row = &b[p * n..(p + 1) * n];
        for j in 0..n {
            out_row[j] += av * b_row[j];
        }
    }
}

/// C = A(m x k) * B(k x n), sequential.
pub fn matmul_seq(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        matmul_row(&mut out[i * n..(i + 1) * n], i, a, b, k, n);
    }
    out
}

/// C = A(m x k) * B(k x n), rows in parallel.
#[cfg(feature = "parallel")]
pub fn matmul_par(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    out.par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, row)| matmul_row(row, i, a, b, k, n));
    out
}

pub fn matmul(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    #[cfg(feature = "parallel")]
    {
        if m * k * n >= PAR_THRESHOLD {
            return matmul_par(a, b, m, k, n);
        }
    }
    matmul_seq(a, b, m, k, n)
}

fn spmm_row(
    out_row: &mut [f64],
    v: usize,
    adj: &NormalizedAdjacency,
    mode: AggMode,
    weights: Option<&[f64]>,
    h: &[f64],
    d: usize,
) {
    let data = adj.data();
    for k in data.row_ptr[v]..data.row_ptr[v + 1] {
        let wi = data.weight_pos[k];
        let is_self = wi == usize::MAX;
        if mode == AggMode::NeighborSum && is_self {
            continue;
        }
        let mut scale = entry_scale(mode, data.coeffs[k]);
        if !is_self {
            if let Some(w) = weights {
                scale *= w[wi];
            }
        }
        let u = data.col_idx[k];
        let h_row = &h[u * d..(u + 1) * d];
        for j in 0..d {
            out_row[j] += scale * h_row[j];
        }
    }
}

/// out[v] = sum over stored entries (v,u) of scale(v,u) * w(v,u) * h[u].
pub fn spmm_seq(
    adj: &NormalizedAdjacency,
    mode: AggMode,
    weights: Option<&[f64]>,
    h: &[f64],
    d: usize,
) -> Vec<f64> {
    let n = adj.num_nodes();
    let mut out = vec![0.0; n * d];
    for v in 0..n {
        spmm_row(&mut out[v * d..(v + 1) * d], v, adj, mode, weights, h, d);
    }
    out
}

#[cfg(feature = "parallel")]
pub fn spmm_par(
    adj: &NormalizedAdjacency,
    mode: AggMode,
    weights: Option<&[f64]>,
    h: &[f64],
    d: usize,
) -> Vec<f64> {
    let n = adj.num_nodes();
    let mut out = vec![0.0; n * d];
    out.par_chunks_mut(d)
        .enumerate()
        .for_each(|(v, row)| spmm_row(row, v, adj, mode, weights, h, d));
    out
}

pub fn spmm(
    adj: &NormalizedAdjacency,
    mode: AggMode,
    weights: Option<&[f64]>,
    h: &[f64],
    d: usize,
) -> Vec<f64> {
    #[cfg(feature = "parallel")]
    {
        let work = (adj.data().col_idx.len()) * d;
        if work >= PAR_THRESHOLD {
            return spmm_par(adj, mode, weights, h, d);
        }
    }
    spmm_seq(adj, mode, weights, h, d)
}

/// dL/dh for the spmm above. Row u of the result gathers over u's stored
/// entries via the mirror index, so rows are written disjointly.
pub fn spmm_backward_h(
    adj: &NormalizedAdjacency,
    mode: AggMode,
    weights: Option<&[f64]>,
    grad_out: &[f64],
    d: usize,
) -> Vec<f64> {
    let n = adj.num_nodes();
    let data = adj.data();
    let per_row = |u: usize, row: &mut [f64]| {
        for k in data.row_ptr[u]..data.row_ptr[u + 1] {
            let mk = data.mirror[k];
            let wi = data.weight_pos[mk];
            let is_self = wi == usize::MAX;
            if mode == AggMode::NeighborSum && is_self {
                continue;
            }
            let mut scale = entry_scale(mode, data.coeffs[mk]);
            if !is_self {
                if let Some(w) = weights {
                    scale *= w[wi];
                }
            }
            let v = data.col_idx[k];
            let g_row = &grad_out[v * d..(v + 1) * d];
            for j in 0..d {
                row[j] += scale * g_row[j];
            }
        }
    };
    let mut out = vec![0.0; n * d];
    #[cfg(feature = "parallel")]
    {
        if data.col_idx.len() * d >= PAR_THRESHOLD {
            out.par_chunks_mut(d).enumerate().for_each(|(u, row)| per_row(u, row));
            return out;
        }
    }
    for u in 0..n {
        let row = &mut out[u * d..(u + 1) * d];
        per_row(u, row);
    }
    out
}

/// dL/dw per weighted entry: coeff(v,u) * <grad_out[v], h[u]>.
pub fn spmm_backward_w(
    adj: &NormalizedAdjacency,
    mode: AggMode,
    grad_out: &[f64],
    h: &[f64],
    d: usize,
) -> Vec<f64> {
    let data = adj.data();
    let per_entry = |wi: usize| -> f64 {
        let (v, u) = data.weighted_uv[wi];
        let scale = entry_scale(mode, coeff_of_weighted(adj, wi));
        let g_row = &grad_out[v * d..(v + 1) * d];
        let h_row = &h[u * d..(u + 1) * d];
        let mut acc = 0.0;
        for j in 0..d {
            acc += g_row[j] * h_row[j];
        }
        scale * acc
    };
    #[cfg(feature = "parallel")]
    {
        if data.num_weighted * d >= PAR_THRESHOLD {
            return (0..data.num_weighted).into_par_iter().map(per_entry).collect();
        }
    }
    (0..data.num_weighted).map(per_entry).collect()
}

fn coeff_of_weighted(adj: &NormalizedAdjacency, wi: usize) -> f64 {
    let data = adj.data();
    data.coeffs[data.weighted_entry[wi]]
}

/// out[wi] = <z[row(wi)], z[col(wi)]> for every weighted entry.
pub fn edge_dot(adj: &NormalizedAdjacency, z: &[f64], d: usize) -> Vec<f64> {
    let data = adj.data();
    let per_entry = |wi: usize| -> f64 {
        let (v, u) = data.weighted_uv[wi];
        let zv = &z[v * d..(v + 1) * d];
        let zu = &z[u * d..(u + 1) * d];
        let mut acc = 0.0;
        for j in 0..d {
            acc += zv[j] * zu[j];
        }
        acc
    };
    #[cfg(feature = "parallel")]
    {
        if data.num_weighted * d >= PAR_THRESHOLD {
            return (0..data.num_weighted).into_par_iter().map(per_entry).collect();
        }
    }
    (0..data.num_weighted).map(per_entry).collect()
}

/// dL/dz for edge_dot, gathered per z-row through the mirror map.
pub fn edge_dot_backward(
    adj: &NormalizedAdjacency,
    z: &[f64],
    grad_out: &[f64],
    d: usize,
) -> Vec<f64> {
    let data = adj.data();
    let n = data.num_nodes;
    let per_row = |x: usize, row: &mut [f64]| {
        for k in data.row_ptr[x]..data.row_ptr[x + 1] {
            let wi = data.weight_pos[k];
            if wi == usize::MAX {
                continue;
            }
            let wi_mirror = data.weight_pos[data.mirror[k]];
            let g = grad_out[wi] + grad_out[wi_mirror];
            let y = data.col_idx[k];
            let zy = &z[y * d..(y + 1) * d];
            for j in 0..d {
                row[j] += g * zy[j];
            }
        }
    };
    let mut out = vec![0.0; n * d];
    #[cfg(feature = "parallel")]
    {
        if data.col_idx.len() * d >= PAR_THRESHOLD {
            out.par_chunks_mut(d).enumerate().for_each(|(x, row)| per_row(x, row));
            return out;
        }
    }
    for x in 0..n {
        per_row(x, &mut out[x * d..(x + 1) * d]);
    }
    out
}
