//! The inference core: moment pencils over star densities recover the block
//! degrees and proportions; the birooted pencil over bistar densities then
//! recovers the connectivity matrix, optionally widened with two-hop
//! columns and solved through the Moore-Penrose pseudoinverse.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::counting::CountTable;
use crate::error::{Error, Result};
use crate::forward;
use crate::glyph::{BistarGlyph, GlyphCombo};
use crate::graph::UndirectedGraph;
use crate::sbm::SbmParams;

/// Relative singular-value floor below which the moment matrix counts as
/// singular (degree degeneracy).
const SINGULARITY_RTOL: f64 = 1e-12;
/// Relative cutoff for discarded singular values in the pseudoinverse.
const PINV_RTOL: f64 = 1e-10;
/// Eigenvalues with |Im| above this fraction of |Re| are a hard error.
const DEFAULT_MAX_IMAG_RATIO: f64 = 0.5;
/// |Im|/|Re| above this is recorded as a noisy-input warning.
const WARN_IMAG_RATIO: f64 = 1e-6;
/// Minimum relative gap between recovered degrees.
const DEGREE_GAP_RTOL: f64 = 1e-6;

/// Where a moment sequence came from; exact sequences obey extra checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentProvenance {
    Exact,
    Estimated,
}

/// The star moments `<d^0> ... <d^(2K-1)>`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    pub values: Vec<f64>,
    pub source: MomentProvenance,
}

impl MomentSequence {
    pub fn new(values: Vec<f64>, source: MomentProvenance) -> Result<Self> {
        if values.is_empty() || (values[0] - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(
                "moment sequence must start with <d^0> = 1".into(),
            ));
        }
        Ok(MomentSequence { values, source })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Provider of unrooted bistar densities; the bridge between the pencil
/// algebra and either exact forward evaluation or counts on a graph.
pub trait BistarDensitySource {
    fn unrooted_density(&self, glyph: &BistarGlyph) -> Result<f64>;

    /// Linear extension to formal combinations.
    fn combo_density(&self, combo: &GlyphCombo) -> Result<f64> {
        let mut total = 0.0;
        for (coeff, glyph) in &combo.terms {
            total += coeff * self.unrooted_density(glyph)?;
        }
        Ok(total)
    }

    fn provenance(&self) -> MomentProvenance;
}

/// Exact densities computed from known SBM parameters.
pub struct ExactSource<'a> {
    pub params: &'a SbmParams,
}

impl BistarDensitySource for ExactSource<'_> {
    fn unrooted_density(&self, glyph: &BistarGlyph) -> Result<f64> {
        let mut unrooted = *glyph;
        unrooted.rooting = crate::glyph::Rooting::Unrooted;
        Ok(forward::eval_density(self.params, &unrooted)?
            .as_scalar()
            .expect("unrooted evaluation yields a scalar"))
    }

    fn provenance(&self) -> MomentProvenance {
        MomentProvenance::Exact
    }
}

/// Densities estimated from an observed graph via the counting engine.
pub struct EstimatedSource {
    table: CountTable,
}

impl EstimatedSource {
    /// Build a count table just large enough for a K-block inference:
    /// stars up to `2K - 1` edges and all basis-product bistars.
    pub fn for_inference(graph: &UndirectedGraph, k: usize, two_hop: bool) -> Result<Self> {
        let side = 2 * (k - 1).max(0);
        let table = CountTable::build(graph, side, usize::from(two_hop), side)?;
        Ok(EstimatedSource { table })
    }

    pub fn from_table(table: CountTable) -> Self {
        EstimatedSource { table }
    }

    pub fn table(&self) -> &CountTable {
        &self.table
    }
}

impl BistarDensitySource for EstimatedSource {
    fn unrooted_density(&self, glyph: &BistarGlyph) -> Result<f64> {
        if glyph.edge_count() == 0 {
            // <d^0>: fixed analytically, no need to count.
            return Ok(1.0);
        }
        self.table.inj_hom_density(&glyph.canonical())
    }

    fn provenance(&self) -> MomentProvenance {
        MomentProvenance::Estimated
    }
}

/// Star moments of the source: `<d^j>` is the density of the star with `j`
/// edges, for `j = 0 .. 2K-1`.
pub fn star_moments<S: BistarDensitySource>(source: &S, k: usize) -> Result<MomentSequence> {
    let mut values = vec![1.0];
    for j in 1..2 * k {
        values.push(source.unrooted_density(&BistarGlyph::star(j))?);
    }
    MomentSequence::new(values, source.provenance())
}

/// Numerical diagnostics carried alongside an inference result.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Largest |Im|/|Re| over the degree-pencil eigenvalues.
    pub degree_eig_imag_ratio: f64,
    /// Raw eigenvalues of the bistar pencil product (real parts).
    pub bistar_eigenvalues: Vec<f64>,
    /// Largest |Im|/|Re| over the bistar-pencil eigenvalues.
    pub bistar_eig_imag_ratio: f64,
    /// Condition number of the Vandermonde system that produced pi.
    pub vandermonde_condition: f64,
    /// Condition number of the plain bistar moment matrix.
    pub bistar_condition: f64,
    /// Numerical rank of the plain bistar matrix at the pinv cutoff.
    pub bistar_rank: usize,
    /// True when the exact-mode linear re-solve replaced the Rayleigh B.
    pub refined_b: bool,
    /// Absolute singular-value cutoff used in the pseudoinverse.
    pub pinv_cutoff: f64,
    /// True if any eigenvalue had a non-negligible imaginary part.
    pub noisy_eigenvalues: bool,
    /// Set when clamping changed pi or B.
    pub clamped_pi: bool,
    pub clamped_b: bool,
}

/// Inference output: block proportions, degrees (sorted descending), and
/// connectivity matrix, plus diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PencilSolution {
    pub pi: Vec<f64>,
    pub d: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    pub diagnostics: Diagnostics,
}

/// Options for the full pipeline.
#[derive(Debug, Clone, Copy)]
pub struct PencilOptions {
    /// Add two-hop columns to the bistar matrices (rectangular pencil).
    pub two_hop: bool,
    /// Project pi onto the simplex and clip B to [0, 1].
    pub clamp: bool,
    /// Hard-failure threshold on |Im|/|Re| of pencil eigenvalues.
    pub max_imag_ratio: f64,
}

impl Default for PencilOptions {
    fn default() -> Self {
        PencilOptions {
            two_hop: false,
            clamp: false,
            max_imag_ratio: DEFAULT_MAX_IMAG_RATIO,
        }
    }
}

fn hankel(moments: &[f64], k: usize, shift: usize) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |i, j| moments[i + j + shift])
}

/// Real eigenvalues of `numer * inv(denom)` with imaginary-part policing.
/// Returns the eigenvalues (unsorted) and the largest |Im|/|Re| ratio seen.
fn real_eigenvalues(
    product: &DMatrix<f64>,
    max_imag_ratio: f64,
) -> Result<(Vec<f64>, f64)> {
    let eigs = product.complex_eigenvalues();
    let mut out = Vec::with_capacity(eigs.len());
    let mut worst = 0.0f64;
    for e in eigs.iter() {
        let ratio = e.im.abs() / e.re.abs().max(1e-12);
        worst = worst.max(ratio);
        if ratio > max_imag_ratio {
            return Err(Error::NonRealEigenvalue(format!(
                "eigenvalue {} + {}i has |Im|/|Re| = {ratio:.3e} (limit {max_imag_ratio})",
                e.re, e.im
            )));
        }
        out.push(e.re);
    }
    Ok((out, worst))
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn check_invertible(m: &DMatrix<f64>, what: &str) -> Result<()> {
    let sv = m.clone().singular_values();
    let max = sv.max();
    if sv.min() <= SINGULARITY_RTOL * max {
        return Err(Error::Degeneracy(format!(
            "{what} is numerically singular (sigma_min/sigma_max = {:.3e}); \
             coincident latent values make the Vandermonde factor non-invertible",
            sv.min() / max
        )));
    }
    Ok(())
}

/// Shared pencil solve: recovers the K latent values and their mixture
/// weights from the moment sequence `<x^0> .. <x^(2K-1)>`.
///
/// The latent values are the eigenvalues of `C' C^{-1}` for the two Hankel
/// moment matrices; the weights come from the Vandermonde system.
fn solve_moment_pencil(
    moments: &MomentSequence,
    k: usize,
    max_imag_ratio: f64,
) -> Result<(Vec<f64>, Vec<f64>, Diagnostics)> {
    if moments.len() < 2 * k {
        return Err(Error::Validation(format!(
            "need {} moments for K = {k}, got {}",
            2 * k,
            moments.len()
        )));
    }
    let c = hankel(&moments.values, k, 0);
    let c_shift = hankel(&moments.values, k, 1);
    check_invertible(&c, "moment matrix C")?;
    let c_inv = c
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degeneracy("moment matrix C is not invertible".into()))?;
    let product = &c_shift * &c_inv;
    let (mut values, imag_ratio) = real_eigenvalues(&product, max_imag_ratio)?;
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min_gap = values
        .windows(2)
        .map(|w| (w[0] - w[1]).abs())
        .fold(f64::INFINITY, f64::min);
    if k > 1 && min_gap < DEGREE_GAP_RTOL * scale.max(1e-300) {
        return Err(Error::Degeneracy(format!(
            "latent values are not separated (min gap {min_gap:.3e}); \
             the Vandermonde factor is not invertible"
        )));
    }

    // V_{jk} = values[k]^j; solve V w = (<x^0> .. <x^(K-1)>) for the weights.
    let vandermonde = DMatrix::from_fn(k, k, |i, j| values[j].powi(i as i32));
    check_invertible(&vandermonde, "Vandermonde matrix")?;
    let rhs = DVector::from_iterator(k, moments.values[..k].iter().copied());
    let weights = vandermonde
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Degeneracy("Vandermonde system is singular".into()))?;

    let diagnostics = Diagnostics {
        degree_eig_imag_ratio: imag_ratio,
        vandermonde_condition: condition_number(&vandermonde),
        noisy_eigenvalues: imag_ratio > WARN_IMAG_RATIO,
        ..Default::default()
    };
    let mut weights: Vec<f64> = weights.iter().copied().collect();

    // With exact moments the Hankel product squares the Vandermonde
    // conditioning; a few Newton steps on the moment equations recover the
    // accuracy that the eigendecomposition loses.
    if moments.source == MomentProvenance::Exact {
        newton_polish_moments(&moments.values[..2 * k], &mut weights, &mut values);
        let order = sort_descending(&mut values);
        weights = order.iter().map(|&i| weights[i]).collect();
    }
    Ok((weights, values, diagnostics))
}

/// Sort `values` descending in place and return the applied permutation.
fn sort_descending(values: &mut Vec<f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());
    *values = order.iter().map(|&i| values[i]).collect();
    order
}

/// Newton iteration on `f_j(pi, d) = sum_k pi_k d_k^j - m_j`, `j < 2K`.
/// Starts from the pencil output and keeps the last residual-decreasing
/// iterate; a no-op when the start is already stationary.
fn newton_polish_moments(moments: &[f64], pi: &mut [f64], d: &mut [f64]) {
    let k = pi.len();
    let m = 2 * k;
    let residual = |pi: &[f64], d: &[f64]| -> DVector<f64> {
        DVector::from_fn(m, |j, _| {
            (0..k).map(|t| pi[t] * d[t].powi(j as i32)).sum::<f64>() - moments[j]
        })
    };
    let mut best_pi = pi.to_vec();
    let mut best_d = d.to_vec();
    let mut best_norm = residual(pi, d).norm();
    for _ in 0..20 {
        let r = residual(&best_pi, &best_d);
        if r.norm() < 1e-16 {
            break;
        }
        // Columns: d(f)/d(pi_t) = d_t^j, then d(f)/d(d_t) = j pi_t d_t^(j-1).
        let jac = DMatrix::from_fn(m, m, |j, col| {
            if col < k {
                best_d[col].powi(j as i32)
            } else {
                let t = col - k;
                if j == 0 {
                    0.0
                } else {
                    j as f64 * best_pi[t] * best_d[t].powi(j as i32 - 1)
                }
            }
        });
        let Some(step) = jac.lu().solve(&r) else { break };
        let mut next_pi = best_pi.clone();
        let mut next_d = best_d.clone();
        for t in 0..k {
            next_pi[t] -= step[t];
            next_d[t] -= step[k + t];
        }
        let norm = residual(&next_pi, &next_d).norm();
        if !norm.is_finite() || norm >= best_norm {
            break;
        }
        best_pi = next_pi;
        best_d = next_d;
        best_norm = norm;
    }
    pi.copy_from_slice(&best_pi);
    d.copy_from_slice(&best_d);
}

/// Classical coin-mixture pencil: recovers the K biases and their mixture
/// proportions from the moments `<b^r>`.
pub fn solve_coin_pencil(moments: &MomentSequence, k: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (pi, b, _) = solve_moment_pencil(moments, k, DEFAULT_MAX_IMAG_RATIO)?;
    Ok((pi, b))
}

/// Degree pencil: identical mathematics with biases replaced by normalized
/// block degrees.
pub fn solve_degree_pencil(moments: &MomentSequence, k: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (pi, d, _) = solve_moment_pencil(moments, k, DEFAULT_MAX_IMAG_RATIO)?;
    Ok((pi, d))
}

/// Basis of symmetrized birooted glyph combinations: the monomial symmetric
/// polynomials `L^a R^b + L^b R^a` (single term when `a == b`) with
/// `0 <= a <= b <= K-1`, giving `K + C(K,2)` entries.
#[derive(Debug, Clone)]
pub struct SymmetricBasis {
    pub k: usize,
    pub exponents: Vec<(usize, usize)>,
    pub entries: Vec<GlyphCombo>,
}

pub fn build_symmetric_basis(k: usize) -> Result<SymmetricBasis> {
    if k == 0 {
        return Err(Error::Validation("K must be >= 1".into()));
    }
    let mut exponents = Vec::new();
    let mut entries = Vec::new();
    for b in 0..k {
        for a in 0..=b {
            exponents.push((a, b));
            let lead = BistarGlyph::birooted(a, 0, b, false);
            let combo = if a == b {
                GlyphCombo::from_glyph(lead)
            } else {
                GlyphCombo {
                    terms: vec![(1.0, lead), (1.0, BistarGlyph::birooted(b, 0, a, false))],
                }
            };
            entries.push(combo);
        }
    }
    Ok(SymmetricBasis { k, exponents, entries })
}

impl SymmetricBasis {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Evaluate every basis polynomial at the degree pair `(x, y)`.
    pub fn evaluate(&self, x: f64, y: f64) -> DVector<f64> {
        DVector::from_iterator(
            self.exponents.len(),
            self.exponents.iter().map(|&(a, b)| {
                if a == b {
                    x.powi(a as i32) * y.powi(a as i32)
                } else {
                    x.powi(a as i32) * y.powi(b as i32) + x.powi(b as i32) * y.powi(a as i32)
                }
            }),
        )
    }
}

/// Build the plain and bridge-glued bistar moment matrices. With `two_hop`
/// the column set is doubled by also gluing one two-hop path, making both
/// matrices rectangular.
pub fn build_bistar_matrices<S: BistarDensitySource>(
    source: &S,
    basis: &SymmetricBasis,
    two_hop: bool,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let m = basis.len();
    let cols = if two_hop { 2 * m } else { m };
    let mut plain = DMatrix::zeros(m, cols);
    let mut bridged = DMatrix::zeros(m, cols);
    for i in 0..m {
        for j in 0..m {
            let product = basis.entries[i].glue(&basis.entries[j])?;
            plain[(i, j)] = source.combo_density(&product)?;
            bridged[(i, j)] =
                source.combo_density(&product.glue_glyph(BistarGlyph::bridge_edge())?)?;
            if two_hop {
                let hop = product.glue_glyph(BistarGlyph::two_hop())?;
                plain[(i, m + j)] = source.combo_density(&hop)?;
                bridged[(i, m + j)] = source.combo_density(
                    &product.glue_glyph(BistarGlyph::birooted(0, 1, 0, true))?,
                )?;
            }
        }
    }
    Ok((plain, bridged))
}

fn pseudo_inverse(m: &DMatrix<f64>, diagnostics: &mut Diagnostics) -> Result<DMatrix<f64>> {
    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let cutoff = PINV_RTOL * sigma_max;
    diagnostics.pinv_cutoff = cutoff;
    svd.pseudo_inverse(cutoff)
        .map_err(|e| Error::Conditioning(e.to_string()))
}

/// Recover the connectivity matrix from the bistar pencil.
///
/// The primary path evaluates the basis polynomials at each degree pair to
/// form the known eigenvector `v`, then reads the entry off the Rayleigh
/// quotient `v^T (C^B pinv(C)) v / v^T v`; this resolves the
/// eigenvalue-to-pair assignment that a raw eigendecomposition leaves open.
pub fn recover_b(
    plain: &DMatrix<f64>,
    bridged: &DMatrix<f64>,
    degrees: &[f64],
    pi: &[f64],
    basis: &SymmetricBasis,
    refine: bool,
    diagnostics: &mut Diagnostics,
) -> Result<Vec<Vec<f64>>> {
    let k = basis.k;
    let sv = plain.clone().singular_values();
    let sigma_max = sv.max();
    diagnostics.bistar_rank = sv.iter().filter(|&&s| s > PINV_RTOL * sigma_max).count();
    diagnostics.bistar_condition = condition_number(plain);
    let product = bridged * pseudo_inverse(plain, diagnostics)?;

    // Raw spectrum, exposed as a diagnostic only.
    let eigs = product.complex_eigenvalues();
    let mut raw: Vec<f64> = eigs.iter().map(|e| e.re).collect();
    raw.sort_by(|a, b| b.partial_cmp(a).unwrap());
    diagnostics.bistar_eigenvalues = raw;
    diagnostics.bistar_eig_imag_ratio = eigs
        .iter()
        .map(|e| e.im.abs() / e.re.abs().max(1e-12))
        .fold(0.0, f64::max);
    if diagnostics.bistar_eig_imag_ratio > WARN_IMAG_RATIO {
        diagnostics.noisy_eigenvalues = true;
    }

    let mut b = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let v = basis.evaluate(degrees[i], degrees[j]);
            let denom = v.dot(&v);
            let value = (v.transpose() * &product * &v)[(0, 0)] / denom;
            b[i][j] = value;
            b[j][i] = value;
        }
    }
    if refine {
        if let Some(refined) = refine_b(bridged, degrees, pi, basis) {
            diagnostics.refined_b = true;
            b = refined;
        }
    }
    Ok(b)
}

/// Re-solve B from the first bridged column given the recovered (pi, d).
///
/// `bridged[i][0]` is the density of basis entry i glued with a bridge,
/// a linear function of the B entries; solving that m-by-m system involves
/// one generalized-Vandermonde factor where the pseudoinverse product
/// involves its square, so with exact inputs this recovers the digits the
/// Rayleigh path loses to conditioning.
fn refine_b(
    bridged: &DMatrix<f64>,
    degrees: &[f64],
    pi: &[f64],
    basis: &SymmetricBasis,
) -> Option<Vec<Vec<f64>>> {
    let k = basis.k;
    let m = basis.len();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|a| (a..k).map(move |b| (a, b)))
        .collect();
    // Basis polynomials are symmetric, so summing over ordered block pairs
    // just doubles the off-diagonal weight.
    let design = DMatrix::from_fn(m, m, |i, p| {
        let (a, b) = pairs[p];
        let mult = if a == b { 1.0 } else { 2.0 };
        mult * pi[a] * pi[b] * basis.evaluate(degrees[a], degrees[b])[i]
    });
    let rhs = DVector::from_fn(m, |i, _| bridged[(i, 0)]);
    let x = design.lu().solve(&rhs)?;
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut b = vec![vec![0.0; k]; k];
    for (p, &(i, j)) in pairs.iter().enumerate() {
        b[i][j] = x[p];
        b[j][i] = x[p];
    }
    Some(b)
}

fn project_to_simplex(pi: &mut [f64]) -> bool {
    let mut changed = false;
    for p in pi.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
            changed = true;
        }
    }
    let total: f64 = pi.iter().sum();
    if (total - 1.0).abs() > 1e-12 && total > 0.0 {
        for p in pi.iter_mut() {
            *p /= total;
        }
        changed = true;
    }
    changed
}

/// Full pipeline: star moments -> degree pencil -> bistar pencil -> B.
pub fn infer_sbm<S: BistarDensitySource>(
    source: &S,
    k: usize,
    options: &PencilOptions,
) -> Result<PencilSolution> {
    if k == 0 {
        return Err(Error::Validation("K must be >= 1".into()));
    }
    let moments = star_moments(source, k).map_err(|e| e.in_stage("moments"))?;
    let (mut pi, d, mut diagnostics) =
        solve_moment_pencil(&moments, k, options.max_imag_ratio)
            .map_err(|e| e.in_stage("degree-pencil"))?;
    let basis = build_symmetric_basis(k).map_err(|e| e.in_stage("basis"))?;
    let (plain, bridged) = build_bistar_matrices(source, &basis, options.two_hop)
        .map_err(|e| e.in_stage("bistar-matrices"))?;
    let refine = source.provenance() == MomentProvenance::Exact;
    let mut b = recover_b(&plain, &bridged, &d, &pi, &basis, refine, &mut diagnostics)
        .map_err(|e| e.in_stage("recover-b"))?;

    if options.clamp {
        diagnostics.clamped_pi = project_to_simplex(&mut pi);
        for row in &mut b {
            for v in row.iter_mut() {
                let clipped = v.clamp(0.0, 1.0);
                if clipped != *v {
                    diagnostics.clamped_b = true;
                    *v = clipped;
                }
            }
        }
    }

    Ok(PencilSolution { pi, d, b, diagnostics })
}
