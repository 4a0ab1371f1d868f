use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gmrf_regions::bounds::{gred_sufficient, theorem1_bound, theorem2_bound, BoundInputs, LogBase, RegionBound};
use gmrf_regions::gaussian::{sample, SampleMatrix};
use gmrf_regions::geometry::RegionLayout;
use gmrf_regions::graphgen::{build_precision, SpatialGraph};
use gmrf_regions::gred::{detect, DetectionState};
use gmrf_regions::harness::{apply_env_overrides, render_state, run_experiment, run_from_manifest, ExperimentConfig, OUT_DIR_ENV, THREADS_ENV};
use gmrf_regions::{Error, Result};

#[derive(Parser)]
#[command(version, about = "Region detection in spatial Gaussian Markov random fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the graph and ground truth described by a config.
    Generate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Draw samples from a generated graph into a binary file.
    Sample {
        #[arg(long)]
        config: PathBuf,
        /// Output file; defaults to `samples.bin` in the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a CSV copy.
        #[arg(long)]
        csv: bool,
    },
    /// Run detection on a sample file and write the result and final picture.
    Detect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Print necessary and sufficient sample counts over a sweep of p as CSV.
    Bounds {
        #[arg(long, default_value_t = 1e3)]
        p_min: f64,
        #[arg(long, default_value_t = 1e7)]
        p_max: f64,
        #[arg(long, default_value_t = 9)]
        points: usize,
        #[arg(long, default_value_t = 4)]
        d: usize,
        #[arg(long, default_value_t = 0.5)]
        xi: f64,
        #[arg(long, default_value_t = 0.02)]
        rho: f64,
        #[arg(long, default_value_t = 1250.0)]
        eta: f64,
        #[arg(long, default_value_t = 0.5)]
        phi: f64,
        /// Couplings of a square grid of regions, row by row.
        #[arg(long, value_delimiter = ',', default_value = "0.04,0.056,0.069,0.08")]
        thetas: Vec<f64>,
        /// Shape ratio used for every region.
        #[arg(long, default_value_t = 4.5)]
        beta: f64,
        /// Report entropies in bits instead of nats.
        #[arg(long)]
        bits: bool,
    },
    /// Run a full experiment from a config or a saved manifest.
    Experiment {
        #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
        config: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Render a saved detection state as SVG.
    Render {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Outcome {
    Done,
    Partial(usize),
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    apply_env_overrides(&mut cfg);
    Ok(cfg)
}

fn graph_for(cfg: &ExperimentConfig) -> Result<SpatialGraph> {
    let path = cfg.output.directory.join("graph.json");
    match fs::read_to_string(&path) {
        Ok(text) => SpatialGraph::from_json(&text),
        Err(_) => Err(Error::Config(format!("{} not found; run `generate` first", path.display()))),
    }
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Generate { config } => {
            let cfg = load_config(&config)?;
            let truth = cfg.truth_layout()?;
            let graph = SpatialGraph::generate(cfg.graph_params(), &truth)?;
            fs::create_dir_all(&cfg.output.directory)?;
            fs::write(cfg.output.directory.join("graph.json"), graph.to_json()?)?;
            fs::write(cfg.output.directory.join("truth.json"), truth.to_json()?)?;
            println!(
                "wrote {} vertices, {} edges to {}",
                graph.p(),
                graph.edges.len(),
                cfg.output.directory.display()
            );
        }
        Command::Sample { config, out, csv } => {
            let cfg = load_config(&config)?;
            let graph = graph_for(&cfg)?;
            let model = build_precision(&graph, cfg.graph.cross_coupling)?;
            let samples = sample(&model, cfg.sampling.n, cfg.sampling.seed);
            let path = out.unwrap_or_else(|| cfg.output.directory.join("samples.bin"));
            samples.write_binary(fs::File::create(&path)?)?;
            if csv {
                samples.write_csv(fs::File::create(path.with_extension("csv"))?)?;
            }
            println!("wrote {} x {} samples to {}", samples.n(), samples.p(), path.display());
        }
        Command::Detect { config, samples } => {
            let cfg = load_config(&config)?;
            let graph = graph_for(&cfg)?;
            let truth = cfg.truth_layout()?;
            let path = samples.unwrap_or_else(|| cfg.output.directory.join("samples.bin"));
            let data = SampleMatrix::read_binary(fs::File::open(&path)?)?;
            let params = cfg.gred_params(graph.density())?;
            let result = detect(
                &data,
                &graph.coords,
                &cfg.graph.domain,
                &params,
                cfg.detection.variant,
                cfg.detection.convexify_when,
            )?;
            let dir = &cfg.output.directory;
            fs::write(dir.join("result.json"), serde_json::to_string(&result)?)?;
            fs::write(dir.join("state.json"), serde_json::to_string(&result.state)?)?;
            fs::write(dir.join("final.svg"), render_state(&result.state, Some(&truth)))?;
            println!(
                "{} regions, {} gray cells, {} steps",
                result.layout.regions().len(),
                result.gray.len(),
                result.snapshots.len()
            );
            if let Some(d) = result.diagnostic {
                println!("{d}");
            }
        }
        Command::Bounds {
            p_min,
            p_max,
            points,
            d,
            xi,
            rho,
            eta,
            phi,
            thetas,
            beta,
            bits,
        } => {
            let side = (thetas.len() as f64).sqrt().round() as usize;
            if side * side != thetas.len() || points < 2 || !(p_max > p_min) {
                return Err(Error::Config("need a square number of thetas, points >= 2 and p_max > p_min".into()));
            }
            let nu = 1.0 / thetas.len() as f64;
            let regions = thetas.iter().map(|&theta| RegionBound { theta, beta, nu }).collect();
            let mut adjacency = Vec::new();
            for r in 0..side {
                for c in 0..side {
                    let k = r * side + c;
                    if c + 1 < side {
                        adjacency.push((k, k + 1));
                    }
                    if r + 1 < side {
                        adjacency.push((k, k + side));
                    }
                }
            }
            let base = if bits { LogBase::Two } else { LogBase::Natural };
            let inputs = BoundInputs {
                p: p_min,
                d,
                xi,
                rho,
                eta,
                phi,
                regions,
                adjacency,
                log_base: base,
            };
            inputs.validate().map_err(|e| Error::Config(e.to_string()))?;
            println!("p,theorem1,theorem2,sufficient");
            for k in 0..points {
                let p = p_min * (p_max / p_min).powf(k as f64 / (points - 1) as f64);
                let at = inputs.with_p(p);
                let t1 = theorem1_bound(p, d, at.theta_bar(), xi)?;
                let t2 = theorem2_bound(&at)?;
                let suff = gred_sufficient(&at)?;
                println!("{p:.6e},{t1:.6e},{t2:.6e},{:.6e}", suff.value);
            }
        }
        Command::Experiment { config, manifest } => {
            let report = match (config, manifest) {
                (Some(c), _) => run_experiment(&load_config(&c)?)?,
                (None, Some(m)) => run_from_manifest(&m, std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))?,
                (None, None) => unreachable!("clap requires one of the two"),
            };
            for t in &report.trials {
                println!("trial {}: {} regions, final error {:.4}", t.trial, t.regions, t.final_error);
            }
            for f in &report.failures {
                eprintln!("trial {} failed: {}", f.trial, f.error);
            }
            println!("outputs in {}", report.directory.display());
            if !report.all_succeeded() {
                return Ok(Outcome::Partial(report.failures.len()));
            }
        }
        Command::Render { state, truth, out } => {
            let s: DetectionState = serde_json::from_str(&fs::read_to_string(&state)?)?;
            let t = match truth {
                Some(p) => Some(RegionLayout::from_json(&fs::read_to_string(p)?)?),
                None => None,
            };
            fs::write(&out, render_state(&s, t.as_ref()))?;
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    // clap's own usage-error code is 2, which is reserved for partial failure
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("could not set thread count: {e}");
        }
    }
    match run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Partial(n)) => {
            eprintln!("{n} trial(s) failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
