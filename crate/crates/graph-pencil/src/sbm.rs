//! Stochastic block model parameters and reproducible graph sampling.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;

/// Block proportions and symmetric connectivity matrix of an SBM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    /// Block proportions, length K, summing to 1.
    pub pi: Vec<f64>,
    /// K-by-K symmetric matrix of edge probabilities, row-major.
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
}

impl SbmParams {
    pub fn new(pi: Vec<f64>, b: Vec<Vec<f64>>) -> Result<Self> {
        let params = SbmParams { pi, b };
        params.validate()?;
        Ok(params)
    }

    /// Erdos-Renyi model: one block with edge probability p.
    pub fn erdos_renyi(p: f64) -> Result<Self> {
        Self::new(vec![1.0], vec![vec![p]])
    }

    pub fn k(&self) -> usize {
        self.pi.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.pi.len();
        if k == 0 {
            return Err(Error::Validation("pi must be non-empty".into()));
        }
        if self.pi.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::Validation("pi entries must be non-negative".into()));
        }
        let total: f64 = self.pi.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "pi must sum to 1 (got {total})"
            )));
        }
        if self.b.len() != k || self.b.iter().any(|row| row.len() != k) {
            return Err(Error::Validation(format!("B must be {k}x{k}")));
        }
        for i in 0..k {
            for j in 0..k {
                let v = self.b[i][j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Validation(format!(
                        "B[{i}][{j}] = {v} outside [0, 1]"
                    )));
                }
                if (v - self.b[j][i]).abs() > 1e-12 {
                    return Err(Error::Validation(format!(
                        "B not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let params: SbmParams = serde_json::from_str(&text)?;
        params.validate()?;
        Ok(params)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// Blocks permuted into descending block-degree order, the canonical
    /// order that inference reports. Needed before entrywise comparison.
    pub fn sorted_by_degree(&self) -> SbmParams {
        let d = block_degree_vec(self);
        let mut order: Vec<usize> = (0..self.k()).collect();
        order.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).unwrap());
        let pi = order.iter().map(|&i| self.pi[i]).collect();
        let b = order
            .iter()
            .map(|&i| order.iter().map(|&j| self.b[i][j]).collect())
            .collect();
        SbmParams { pi, b }
    }

    /// Scale every entry of B by `factor`, for sparse-regime schedules where
    /// the expected degree is held fixed as n grows.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let b = self
            .b
            .iter()
            .map(|row| row.iter().map(|&v| v * factor).collect())
            .collect();
        Self::new(self.pi.clone(), b)
    }
}

/// Normalized block degrees: `d_k = sum_j pi_j B_jk`.
pub fn block_degree_vec(params: &SbmParams) -> Vec<f64> {
    let k = params.k();
    (0..k)
        .map(|col| (0..k).map(|row| params.pi[row] * params.b[row][col]).sum())
        .collect()
}

/// Sample random degree-separated parameters: pi bounded away from 0, B
/// symmetric with entries in [0.05, 0.95], rejected until the block degrees
/// are pairwise separated by at least `min_gap`.
pub fn random_separated_params<R: Rng>(k: usize, min_gap: f64, rng: &mut R) -> Result<SbmParams> {
    if k == 0 {
        return Err(Error::Validation("K must be >= 1".into()));
    }
    for _ in 0..100_000 {
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(1.0..2.0)).collect();
        let total: f64 = raw.iter().sum();
        let pi: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let mut b = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in i..k {
                let v = rng.gen_range(0.05..0.95);
                b[i][j] = v;
                b[j][i] = v;
            }
        }
        let params = SbmParams::new(pi, b)?;
        let mut d = block_degree_vec(&params);
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let separated = k == 1
            || d.windows(2).all(|w| w[1] - w[0] >= min_gap);
        if separated {
            return Ok(params);
        }
    }
    Err(Error::Validation(format!(
        "could not find degree-separated parameters for K = {k}, gap {min_gap}"
    )))
}

/// Target size and seed for one sampled graph.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SampleConfig {
    pub n: usize,
    pub seed: u64,
}

/// A sampled graph together with the latent block of each node. The labels
/// never enter the inference pipeline; they exist for labeled baselines.
#[derive(Debug, Clone)]
pub struct SampledGraph {
    pub graph: UndirectedGraph,
    pub blocks: Vec<usize>,
}

// splitmix64; used to derive independent per-row RNG streams from one seed.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Combine values into one derived seed.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut acc = 0x243f6a8885a308d3u64;
    for &p in parts {
        acc = mix(acc ^ p);
    }
    acc
}

/// Sample a graph: each node's block i.i.d. from pi, then each unordered
/// pair linked independently with probability `B[k(i)][k(j)]`.
///
/// The RNG stream for the block draws and for each adjacency row is derived
/// from `(seed, row)`, so the output is bit-identical regardless of
/// evaluation order.
pub fn sample_graph(params: &SbmParams, config: &SampleConfig) -> Result<SampledGraph> {
    params.validate()?;
    if config.n == 0 {
        return Err(Error::Validation("sample size n must be >= 1".into()));
    }
    let n = config.n;
    let k = params.k();

    let mut cumulative = vec![0.0; k];
    let mut acc = 0.0;
    for (i, &p) in params.pi.iter().enumerate() {
        acc += p;
        cumulative[i] = acc;
    }
    cumulative[k - 1] = 1.0;

    let mut block_rng = ChaCha8Rng::seed_from_u64(derive_seed(&[config.seed, u64::MAX]));
    let blocks: Vec<usize> = (0..n)
        .map(|_| {
            let u: f64 = block_rng.gen();
            cumulative.iter().position(|&c| u < c).unwrap_or(k - 1)
        })
        .collect();

    let mut graph = UndirectedGraph::empty(n);
    for i in 0..n {
        let mut row_rng = ChaCha8Rng::seed_from_u64(derive_seed(&[config.seed, i as u64]));
        for j in (i + 1)..n {
            let p = params.b[blocks[i]][blocks[j]];
            if row_rng.gen::<f64>() < p {
                graph.add_edge(i, j)?;
            }
        }
    }
    Ok(SampledGraph { graph, blocks })
}
