//! Accuracy-versus-size benchmark: sample graphs from a known SBM, run the
//! inference pipeline, and report the squared error of the recovered
//! connectivity matrix against the labeled-data baseline.

use serde::{Deserialize, Serialize};

use crate::counting::CountTable;
use crate::error::{Error, Result};
use crate::pencil::{self, EstimatedSource, PencilOptions};
use crate::sbm::{derive_seed, sample_graph, SampleConfig, SbmParams};

/// Which inference variant an experiment run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Bistar,
    TwoHop,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Bistar => "bistar",
            Method::TwoHop => "two_hop",
        }
    }
}

/// Squared error of an inferred connectivity matrix:
/// `pi^T (B_infer - B_true)^2 pi`, the square taken entrywise.
pub fn squared_error(b_true: &[Vec<f64>], b_infer: &[Vec<f64>], pi: &[f64]) -> Result<f64> {
    let k = pi.len();
    if b_true.len() != k
        || b_infer.len() != k
        || b_true.iter().chain(b_infer).any(|row| row.len() != k)
    {
        return Err(Error::Validation("shape mismatch in squared_error".into()));
    }
    let mut total = 0.0;
    for i in 0..k {
        for j in 0..k {
            let delta = b_infer[i][j] - b_true[i][j];
            total += pi[i] * delta * delta * pi[j];
        }
    }
    Ok(total)
}

/// Expected squared error if the latent block assignments were known:
/// each B entry is then a Bernoulli mean over the observed pairs, with
/// variance `B(1-B) / ((n pi_i)(n pi_j))` off the diagonal and
/// `B(1-B) / ((n pi_i)^2 / 2)` on it; reported as `pi^T Var(B) pi`.
pub fn known_blocks_baseline(params: &SbmParams, n: usize) -> f64 {
    let k = params.k();
    let n = n as f64;
    let mut total = 0.0;
    for i in 0..k {
        for j in 0..k {
            let b = params.b[i][j];
            let pairs = if i == j {
                (n * params.pi[i]).powi(2) / 2.0
            } else {
                (n * params.pi[i]) * (n * params.pi[j])
            };
            total += params.pi[i] * (b * (1.0 - b) / pairs) * params.pi[j];
        }
    }
    total
}

/// Experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub sbm: SbmParams,
    /// Node counts, strictly ascending.
    pub sizes: Vec<usize>,
    /// Replicates per size; same length as `sizes`.
    pub replicates: Vec<usize>,
    pub methods: Vec<Method>,
    pub seed: u64,
    /// Scale B by `sizes[0] / n` so the expected degree stays fixed as n
    /// grows.
    #[serde(default)]
    pub sparse_mode: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.sbm.validate()?;
        if self.sizes.is_empty() || self.sizes[0] == 0 {
            return Err(Error::Validation("sizes must be positive".into()));
        }
        if !self.sizes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Validation("sizes must be strictly ascending".into()));
        }
        if self.replicates.len() != self.sizes.len() {
            return Err(Error::Validation(
                "replicates must have one entry per size".into(),
            ));
        }
        if self.replicates.iter().any(|&r| r == 0) {
            return Err(Error::Validation("replicates must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Validation("at least one method required".into()));
        }
        Ok(())
    }

    /// Effective parameters at size n (identity unless `sparse_mode`).
    pub fn params_at(&self, n: usize) -> Result<SbmParams> {
        if self.sparse_mode {
            self.sbm.scaled(self.sizes[0] as f64 / n as f64)
        } else {
            Ok(self.sbm.clone())
        }
    }
}

/// The default size/replicate schedule: small enough for minutes-scale runs,
/// large enough to show the convergence rate.
pub fn desk_schedule() -> (Vec<usize>, Vec<usize>) {
    (vec![256, 512, 1024, 2048], vec![64, 32, 16, 8])
}

/// Equal-block K=2 presets with moderate degree separation and varying
/// assortativity.
pub fn preset_sbm(name: &str) -> Result<SbmParams> {
    let b = match name {
        "assortative" => vec![vec![0.9, 0.2], vec![0.2, 0.3]],
        "middle" => vec![vec![0.6, 0.45], vec![0.45, 0.3]],
        "disassortative" => vec![vec![0.1, 0.8], vec![0.8, 0.7]],
        other => {
            return Err(Error::Validation(format!(
                "unknown preset '{other}' (expected assortative, middle, or disassortative)"
            )))
        }
    };
    SbmParams::new(vec![0.5, 0.5], b)
}

/// One inference run inside an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub size: usize,
    pub replicate: usize,
    pub method: Method,
    /// None when inference failed on this replicate.
    pub squared_error: Option<f64>,
}

/// Aggregates for one (size, method) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SizeSummary {
    pub size: usize,
    pub method: Method,
    pub mean_sq_error: f64,
    pub stdev: f64,
    pub baseline: f64,
    pub failure_rate: f64,
    /// Shading transform for symmetric display on a log plot:
    /// log(mean) +- stdev/mean.
    pub log_mean: f64,
    pub shade: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub records: Vec<ReplicateRecord>,
    pub summaries: Vec<SizeSummary>,
}

impl ExperimentResult {
    /// Summary table, one row per (size, method).
    pub fn summary_csv(&self) -> String {
        let mut out =
            String::from("size,method,mean_sq_error,stdev,baseline,failure_rate,log_mean,shade\n");
        for s in &self.summaries {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                s.size,
                s.method.name(),
                s.mean_sq_error,
                s.stdev,
                s.baseline,
                s.failure_rate,
                s.log_mean,
                s.shade
            ));
        }
        out
    }

    /// Raw per-replicate table.
    pub fn raw_csv(&self) -> String {
        let mut out = String::from("size,replicate,method,status,squared_error\n");
        for r in &self.records {
            match r.squared_error {
                Some(e) => out.push_str(&format!(
                    "{},{},{},ok,{}\n",
                    r.size,
                    r.replicate,
                    r.method.name(),
                    e
                )),
                None => out.push_str(&format!(
                    "{},{},{},failed,\n",
                    r.size,
                    r.replicate,
                    r.method.name()
                )),
            }
        }
        out
    }

    pub fn summary_for(&self, size: usize, method: Method) -> Option<&SizeSummary> {
        self.summaries
            .iter()
            .find(|s| s.size == size && s.method == method)
    }
}

/// Run the experiment: for each size and replicate, sample one graph, build
/// one count table, and run every requested method on it. Replicate seeds
/// derive from (seed, size, replicate), so results do not depend on
/// evaluation order. Inference failures are recorded, not fatal.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let k = spec.sbm.k();
    let any_two_hop = spec.methods.contains(&Method::TwoHop);
    let mut records = Vec::new();

    for (&n, &reps) in spec.sizes.iter().zip(&spec.replicates) {
        let params = spec.params_at(n)?;
        // Inference reports blocks in descending degree order; compare
        // against the truth in that same order.
        let truth = params.sorted_by_degree();
        for rep in 0..reps {
            let seed = derive_seed(&[spec.seed, n as u64, rep as u64]);
            let sampled = sample_graph(&params, &SampleConfig { n, seed })?;
            // One table serves both methods; the bistar path just never
            // queries the two-hop entries.
            let side = 2 * (k - 1);
            let table = CountTable::build(
                &sampled.graph,
                side,
                usize::from(any_two_hop),
                side,
            )?;
            let source = EstimatedSource::from_table(table);
            for &method in &spec.methods {
                let options = PencilOptions {
                    two_hop: method == Method::TwoHop,
                    ..Default::default()
                };
                let error = match pencil::infer_sbm(&source, k, &options) {
                    Ok(solution) => {
                        Some(squared_error(&truth.b, &solution.b, &truth.pi)?)
                    }
                    Err(e) => {
                        log::debug!("replicate (n={n}, rep={rep}, {}) failed: {e}", method.name());
                        None
                    }
                };
                records.push(ReplicateRecord {
                    size: n,
                    replicate: rep,
                    method,
                    squared_error: error,
                });
            }
        }
    }

    let mut summaries = Vec::new();
    for (&n, &reps) in spec.sizes.iter().zip(&spec.replicates) {
        let params = spec.params_at(n)?;
        let baseline = known_blocks_baseline(&params, n);
        for &method in &spec.methods {
            let errors: Vec<f64> = records
                .iter()
                .filter(|r| r.size == n && r.method == method)
                .filter_map(|r| r.squared_error)
                .collect();
            let failures = reps - errors.len();
            let mean = if errors.is_empty() {
                f64::NAN
            } else {
                errors.iter().sum::<f64>() / errors.len() as f64
            };
            let stdev = if errors.len() < 2 {
                0.0
            } else {
                let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>()
                    / (errors.len() - 1) as f64;
                var.sqrt()
            };
            summaries.push(SizeSummary {
                size: n,
                method,
                mean_sq_error: mean,
                stdev,
                baseline,
                failure_rate: failures as f64 / reps as f64,
                log_mean: mean.ln(),
                shade: stdev / mean,
            });
        }
    }

    Ok(ExperimentResult { records, summaries })
}
