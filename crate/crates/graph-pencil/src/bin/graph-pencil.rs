//! Command-line front end: sampling, counting, inference, round-trip
//! verification, and the convergence experiment harness.
//!
//! Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 I/O error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use graph_pencil::counting::{jackknife_variance, CountTable};
use graph_pencil::error::{Error, Result};
use graph_pencil::experiment::{
    desk_schedule, preset_sbm, run_experiment, ExperimentSpec, Method,
};
use graph_pencil::graph::save_labels;
use graph_pencil::pencil::{infer_sbm, EstimatedSource, ExactSource, PencilOptions};
use graph_pencil::sbm::{random_separated_params, sample_graph, SampleConfig};
use graph_pencil::{BistarGlyph, SbmParams, UndirectedGraph};

#[derive(Parser)]
#[command(name = "graph-pencil", version, about = "Block-model densities, counts, and inference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Comma-separated table.
    Csv,
    /// JSON document.
    #[default]
    Structured,
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug)]
struct Common {
    /// RNG seed for anything randomized.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write results here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Structured)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Exact model densities of glyphs.
    Forward {
        /// Parameter file: JSON {"pi": [...], "B": [[...]]}.
        #[arg(long)]
        params: PathBuf,
        /// Glyph in `L<l> C<c> R<r> [E]` notation; repeatable.
        #[arg(long, required = true)]
        glyph: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Sample a graph from an SBM and write its edge list.
    Sample {
        #[arg(long)]
        params: PathBuf,
        /// Number of nodes.
        #[arg(long)]
        n: usize,
        /// Optional file for the latent block labels.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Count glyphs in an observed graph.
    Count {
        /// Edge-list file (`# n=<N>` header, one `u v` pair per line).
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, required = true)]
        glyph: Vec<String>,
        /// Skip the leave-one-out variance estimate (it rebuilds the count
        /// table once per node).
        #[arg(long)]
        no_variance: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Infer SBM parameters from an observed graph.
    Infer {
        #[arg(long)]
        graph: PathBuf,
        /// Number of blocks.
        #[arg(long)]
        k: usize,
        /// Add two-hop columns to the bistar pencil.
        #[arg(long)]
        two_hop: bool,
        /// Project pi to the simplex and clip B to [0, 1].
        #[arg(long)]
        clamp: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Exact-mode self check: random parameters -> densities -> inference.
    Roundtrip {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Minimum block-degree separation of the generated parameters.
        #[arg(long, default_value_t = 0.05)]
        gap: f64,
        #[arg(long)]
        two_hop: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Accuracy-versus-size benchmark with plot-ready CSV output.
    Experiment {
        /// Parameter file; mutually exclusive with --preset.
        #[arg(long, conflicts_with = "preset")]
        params: Option<PathBuf>,
        /// Built-in K=2 regime: assortative, middle, or disassortative.
        #[arg(long)]
        preset: Option<String>,
        /// Comma-separated node counts (default desk schedule).
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        /// Comma-separated replicate counts, one per size.
        #[arg(long, value_delimiter = ',')]
        replicates: Vec<usize>,
        /// Methods to run.
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [CliMethod::Bistar, CliMethod::TwoHop])]
        methods: Vec<CliMethod>,
        /// Hold the expected degree fixed by scaling B with 1/n.
        #[arg(long)]
        sparse: bool,
        /// Where to write the raw per-replicate table (default: alongside
        /// --output with a .raw.csv suffix; stdout runs omit it).
        #[arg(long)]
        raw_output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare jackknife variance estimates against the spread over many
    /// sampled graphs.
    VarianceCheck {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        n: usize,
        /// Number of independently sampled graphs.
        #[arg(long, default_value_t = 50)]
        graphs: usize,
        #[arg(long, required = true)]
        glyph: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CliMethod {
    Bistar,
    TwoHop,
}

impl From<CliMethod> for Method {
    fn from(m: CliMethod) -> Method {
        match m {
            CliMethod::Bistar => Method::Bistar,
            CliMethod::TwoHop => Method::TwoHop,
        }
    }
}

impl std::fmt::Display for CliMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CliMethod::Bistar => "bistar",
            CliMethod::TwoHop => "two-hop",
        })
    }
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_glyphs(specs: &[String]) -> Result<Vec<BistarGlyph>> {
    specs.iter().map(|s| s.parse()).collect()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Forward { params, glyph, common } => {
            let params = SbmParams::load(&params)?;
            let glyphs = parse_glyphs(&glyph)?;
            let mut rows = Vec::new();
            for g in &glyphs {
                let density = graph_pencil::forward::eval_density(&params, g)?
                    .as_scalar()
                    .expect("parsed glyphs are unrooted");
                rows.push((g.to_string(), density));
            }
            let text = match common.format {
                Format::Csv => {
                    let mut out = String::from("glyph,density\n");
                    for (g, d) in &rows {
                        out.push_str(&format!("{g},{d}\n"));
                    }
                    out
                }
                Format::Structured => {
                    let items: Vec<_> = rows
                        .iter()
                        .map(|(g, d)| json!({"glyph": g, "density": d}))
                        .collect();
                    format!("{:#}\n", json!({ "densities": items }))
                }
            };
            emit(&common, &text)
        }
        Command::Sample { params, n, labels, common } => {
            let params = SbmParams::load(&params)?;
            let sampled = sample_graph(&params, &SampleConfig { n, seed: common.seed })?;
            if let Some(path) = &labels {
                save_labels(&sampled.blocks, path)?;
            }
            match &common.output {
                Some(path) => sampled.graph.save_edge_list(path)?,
                None => {
                    let mut out = format!("# n={}\n", sampled.graph.n());
                    for (u, v) in sampled.graph.edges() {
                        out.push_str(&format!("{u} {v}\n"));
                    }
                    print!("{out}");
                }
            }
            Ok(())
        }
        Command::Count { graph, glyph, no_variance, common } => {
            let g = UndirectedGraph::load_edge_list(&graph)?;
            let glyphs = parse_glyphs(&glyph)?;
            let (mut ml, mut mc, mut mr) = (0, 0, 0);
            for gl in glyphs.iter().map(|gl| gl.canonical()) {
                ml = ml.max(gl.left_edges);
                mc = mc.max(gl.mid_paths);
                mr = mr.max(gl.right_edges);
            }
            let table = CountTable::build(&g, ml, mc, mr)?;
            let mut rows = Vec::new();
            for gl in &glyphs {
                let canonical = gl.canonical();
                let count = table.inj_hom_count(&canonical)?;
                let density = table.inj_hom_density(&canonical)?;
                let variance = if no_variance {
                    None
                } else {
                    Some(jackknife_variance(&g, &canonical)?)
                };
                rows.push((gl.to_string(), count, density, variance));
            }
            let text = match common.format {
                Format::Csv => {
                    let mut out = String::from("glyph,count,density,jackknife_variance\n");
                    for (g, c, d, v) in &rows {
                        let v = v.map(|v| v.to_string()).unwrap_or_default();
                        out.push_str(&format!("{g},{c},{d},{v}\n"));
                    }
                    out
                }
                Format::Structured => {
                    let items: Vec<_> = rows
                        .iter()
                        .map(|(g, c, d, v)| {
                            json!({
                                "glyph": g,
                                "count": c.to_string(),
                                "density": d,
                                "jackknife_variance": v,
                            })
                        })
                        .collect();
                    format!("{:#}\n", json!({ "counts": items }))
                }
            };
            emit(&common, &text)
        }
        Command::Infer { graph, k, two_hop, clamp, common } => {
            let g = UndirectedGraph::load_edge_list(&graph)?;
            let source = EstimatedSource::for_inference(&g, k, two_hop)?;
            let options = PencilOptions { two_hop, clamp, ..Default::default() };
            let solution = infer_sbm(&source, k, &options)?;
            let text = match common.format {
                Format::Csv => {
                    let mut out = String::from("parameter,i,j,value\n");
                    for (i, p) in solution.pi.iter().enumerate() {
                        out.push_str(&format!("pi,{i},,{p}\n"));
                    }
                    for (i, d) in solution.d.iter().enumerate() {
                        out.push_str(&format!("d,{i},,{d}\n"));
                    }
                    for (i, row) in solution.b.iter().enumerate() {
                        for (j, b) in row.iter().enumerate() {
                            out.push_str(&format!("B,{i},{j},{b}\n"));
                        }
                    }
                    out
                }
                Format::Structured => {
                    format!("{:#}\n", serde_json::to_value(&solution)?)
                }
            };
            emit(&common, &text)
        }
        Command::Roundtrip { k, trials, gap, two_hop, common } => {
            let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
            let options = PencilOptions { two_hop, ..Default::default() };
            let mut max_error = 0.0f64;
            for _ in 0..trials {
                let params = random_separated_params(k, gap, &mut rng)?;
                let source = ExactSource { params: &params };
                let solution = infer_sbm(&source, k, &options)?;
                max_error = max_error.max(solution_error(&params, &solution.pi, &solution.b));
            }
            let text = match common.format {
                Format::Csv => format!("k,trials,max_abs_error\n{k},{trials},{max_error}\n"),
                Format::Structured => format!(
                    "{:#}\n",
                    json!({"k": k, "trials": trials, "max_abs_error": max_error})
                ),
            };
            emit(&common, &text)
        }
        Command::Experiment {
            params,
            preset,
            sizes,
            replicates,
            methods,
            sparse,
            raw_output,
            common,
        } => {
            let sbm = match (&params, &preset) {
                (Some(path), _) => SbmParams::load(path)?,
                (None, Some(name)) => preset_sbm(name)?,
                (None, None) => {
                    return Err(Error::Validation(
                        "experiment needs --params or --preset".into(),
                    ))
                }
            };
            let (mut sizes, mut replicates) = (sizes, replicates);
            if sizes.is_empty() {
                let (s, r) = desk_schedule();
                if replicates.is_empty() {
                    replicates = r;
                }
                sizes = s;
            }
            let spec = ExperimentSpec {
                sbm,
                sizes,
                replicates,
                methods: methods.into_iter().map(Method::from).collect(),
                seed: common.seed,
                sparse_mode: sparse,
            };
            let result = run_experiment(&spec)?;
            let raw_path = raw_output.or_else(|| {
                common
                    .output
                    .as_ref()
                    .map(|p| p.with_extension("raw.csv"))
            });
            if let Some(path) = &raw_path {
                std::fs::write(path, result.raw_csv())?;
            }
            let text = match common.format {
                Format::Csv => result.summary_csv(),
                Format::Structured => format!("{:#}\n", serde_json::to_value(&result)?),
            };
            emit(&common, &text)
        }
        Command::VarianceCheck { params, n, graphs, glyph, common } => {
            let params = SbmParams::load(&params)?;
            let glyphs = parse_glyphs(&glyph)?;
            let mut rows = Vec::new();
            for gl in glyphs.iter().map(|gl| gl.canonical()) {
                let mut densities = Vec::with_capacity(graphs);
                let mut estimates = Vec::with_capacity(graphs);
                for rep in 0..graphs {
                    let seed = graph_pencil::sbm::derive_seed(&[common.seed, rep as u64]);
                    let g = sample_graph(&params, &SampleConfig { n, seed })?.graph;
                    let table = CountTable::for_glyph(&g, &gl)?;
                    densities.push(table.inj_hom_density(&gl)?);
                    estimates.push(jackknife_variance(&g, &gl)?);
                }
                let mean = densities.iter().sum::<f64>() / graphs as f64;
                let empirical = densities
                    .iter()
                    .map(|d| (d - mean) * (d - mean))
                    .sum::<f64>()
                    / (graphs - 1) as f64;
                let med = median(&mut estimates);
                rows.push((gl.to_string(), empirical, med));
            }
            let text = match common.format {
                Format::Csv => {
                    let mut out =
                        String::from("glyph,empirical_variance,median_jackknife,ratio\n");
                    for (g, e, m) in &rows {
                        out.push_str(&format!("{g},{e},{m},{}\n", m / e));
                    }
                    out
                }
                Format::Structured => {
                    let items: Vec<_> = rows
                        .iter()
                        .map(|(g, e, m)| {
                            json!({
                                "glyph": g,
                                "empirical_variance": e,
                                "median_jackknife": m,
                                "ratio": m / e,
                            })
                        })
                        .collect();
                    format!("{:#}\n", json!({ "glyphs": items }))
                }
            };
            emit(&common, &text)
        }
    }
}

/// Max-abs error between true and inferred (pi, B) after aligning the block
/// order by degree.
fn solution_error(truth: &SbmParams, pi: &[f64], b: &[Vec<f64>]) -> f64 {
    let k = truth.k();
    let degrees = graph_pencil::sbm::block_degree_vec(truth);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &c| degrees[c].partial_cmp(&degrees[a]).unwrap());
    let mut err = 0.0f64;
    for (slot, &blk) in order.iter().enumerate() {
        err = err.max((truth.pi[blk] - pi[slot]).abs());
        for (slot2, &blk2) in order.iter().enumerate() {
            err = err.max((truth.b[blk][blk2] - b[slot][slot2]).abs());
        }
    }
    err
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
