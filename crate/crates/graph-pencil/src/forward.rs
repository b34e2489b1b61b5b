//! Exact forward evaluation of homomorphism densities for an SBM.
//!
//! The fast path evaluates bistar glyphs in closed form via entrywise
//! products of the degree, two-hop, and connectivity matrices. The brute
//! force evaluator sums over every assignment of subgraph vertices to blocks
//! and serves as the oracle for the closed form.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::glyph::{BistarGlyph, GlyphCombo, Rooting};
use crate::sbm::SbmParams;

/// A density value; the shape depends on the rooting.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Scalar(f64),
    Vector(DVector<f64>),
    Matrix(DMatrix<f64>),
}

impl Density {
    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Density::Scalar(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&DMatrix<f64>> {
        match self {
            Density::Matrix(m) => Some(m),
            _ => None,
        }
    }
}

/// Density of a birooted glyph: a K-by-K matrix indexed by the blocks of the
/// two roots.
#[derive(Debug, Clone, PartialEq)]
pub struct BirootedDensity {
    pub glyph: BistarGlyph,
    pub values: DMatrix<f64>,
}

/// Normalized degree of each block: `d[k] = sum_j pi[j] B[j][k]`.
pub fn block_degrees(params: &SbmParams) -> Result<DVector<f64>> {
    params.validate()?;
    let k = params.k();
    Ok(DVector::from_fn(k, |col, _| {
        (0..k).map(|j| params.pi[j] * params.b[j][col]).sum()
    }))
}

/// Two-hop matrix of connection probabilities: `Λ = B diag(pi) B`.
pub fn two_hop_matrix(params: &SbmParams) -> Result<DMatrix<f64>> {
    params.validate()?;
    let k = params.k();
    Ok(DMatrix::from_fn(k, k, |i, j| {
        (0..k)
            .map(|m| params.b[i][m] * params.pi[m] * params.b[m][j])
            .sum()
    }))
}

/// Closed-form density of a bistar glyph.
///
/// The birooted value is the entrywise product
/// `(d 1^T)^l ∘ (1 d^T)^r ∘ Λ^c ∘ B^e`; left-rooting contracts the right
/// index with pi, unrooting contracts both.
pub fn eval_density(params: &SbmParams, glyph: &BistarGlyph) -> Result<Density> {
    let birooted = eval_birooted(params, glyph)?;
    Ok(contract(params, &birooted.values, glyph.rooting))
}

pub fn eval_birooted(params: &SbmParams, glyph: &BistarGlyph) -> Result<BirootedDensity> {
    let d = block_degrees(params)?;
    let k = params.k();
    let lambda = if glyph.mid_paths > 0 {
        Some(two_hop_matrix(params)?)
    } else {
        None
    };
    let values = DMatrix::from_fn(k, k, |i, j| {
        let mut v = d[i].powi(glyph.left_edges as i32) * d[j].powi(glyph.right_edges as i32);
        if let Some(lambda) = &lambda {
            v *= lambda[(i, j)].powi(glyph.mid_paths as i32);
        }
        if glyph.bridge {
            v *= params.b[i][j];
        }
        v
    });
    Ok(BirootedDensity {
        glyph: *glyph,
        values,
    })
}

fn contract(params: &SbmParams, values: &DMatrix<f64>, rooting: Rooting) -> Density {
    let pi = DVector::from_column_slice(&params.pi);
    match rooting {
        Rooting::BiRooted => Density::Matrix(values.clone()),
        Rooting::LeftRooted => Density::Vector(values * &pi),
        Rooting::Unrooted => Density::Scalar((pi.transpose() * values * pi)[(0, 0)]),
    }
}

/// Unrooted density of a formal glyph combination; evaluation is linear.
pub fn eval_combo_unrooted(params: &SbmParams, combo: &GlyphCombo) -> Result<f64> {
    let mut total = 0.0;
    for (coeff, glyph) in &combo.terms {
        let v = eval_birooted(params, glyph)?;
        if let Density::Scalar(s) = contract(params, &v.values, Rooting::Unrooted) {
            total += coeff * s;
        }
    }
    Ok(total)
}

const MAX_BRUTE_VERTICES: usize = 10;
const MAX_BRUTE_BLOCKS: usize = 5;

/// Literal evaluation of the density of an arbitrary small subgraph, given
/// as vertex count plus edge list, by enumerating all block assignments.
///
/// `roots` lists distinguished vertices (0, 1, or 2 of them); their blocks
/// index the output and contribute no pi factor. Enumeration cost is
/// `K^(|V| - |roots|)` per output entry, so vertex and block counts are
/// capped.
pub fn brute_force_density(
    params: &SbmParams,
    vertex_count: usize,
    edges: &[(usize, usize)],
    roots: &[usize],
) -> Result<Density> {
    params.validate()?;
    let k = params.k();
    if vertex_count > MAX_BRUTE_VERTICES || k > MAX_BRUTE_BLOCKS {
        return Err(Error::Budget(format!(
            "brute-force density limited to |V| <= {MAX_BRUTE_VERTICES} and K <= {MAX_BRUTE_BLOCKS} \
             (got |V| = {vertex_count}, K = {k})"
        )));
    }
    if roots.len() > 2 {
        return Err(Error::Validation("at most two roots supported".into()));
    }
    for &(u, v) in edges {
        if u >= vertex_count || v >= vertex_count {
            return Err(Error::Validation(format!(
                "edge ({u}, {v}) out of range for |V| = {vertex_count}"
            )));
        }
    }

    let value_for = |fixed: &[(usize, usize)]| -> f64 {
        // Sum over all maps V(g) -> [K] with the root blocks pinned.
        let mut assignment = vec![0usize; vertex_count];
        let free: Vec<usize> = (0..vertex_count)
            .filter(|v| !roots.contains(v))
            .collect();
        for &(vertex, block) in fixed {
            assignment[vertex] = block;
        }
        let mut total = 0.0;
        let combos = k.pow(free.len() as u32);
        for mut code in 0..combos {
            for &v in &free {
                assignment[v] = code % k;
                code /= k;
            }
            let mut term = 1.0;
            for &v in &free {
                term *= params.pi[assignment[v]];
            }
            for &(u, v) in edges {
                term *= params.b[assignment[u]][assignment[v]];
            }
            total += term;
        }
        total
    };

    Ok(match roots {
        [] => Density::Scalar(value_for(&[])),
        [a] => Density::Vector(DVector::from_fn(k, |kb, _| value_for(&[(*a, kb)]))),
        [a, b] => Density::Matrix(DMatrix::from_fn(k, k, |ka, kb| {
            value_for(&[(*a, ka), (*b, kb)])
        })),
        _ => unreachable!(),
    })
}

/// Brute-force density of a bistar glyph, with roots matching its rooting.
pub fn brute_force_glyph_density(params: &SbmParams, glyph: &BistarGlyph) -> Result<Density> {
    let (nv, edges) = glyph.to_edge_list();
    let roots: &[usize] = match glyph.rooting {
        Rooting::Unrooted => &[],
        Rooting::LeftRooted => &[0],
        Rooting::BiRooted => &[0, 1],
    };
    brute_force_density(params, nv, &edges, roots)
}
