//! Command-line front end.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use crate::cache::{self, CACHE_DIR_ENV};
use crate::design::{JStrategy, Objective, SignalSet};
use crate::error::{Error, Result};
use crate::evaluate::{averaging_residuals, evaluate_design};
use crate::graph::WeightedGraph;
use crate::ingest::{aggregate_functions, snap_events, Aggregation, PeriodFilter};
use crate::io::{self, DesignFile};
use crate::lp::{DEFAULT_RESIDUAL_TOL, DEFAULT_SUPPORT_TOL};
use crate::pipeline::{design_for_k, sweep, DesignSpec};
use crate::spectral::{eigendecompose, SpectralBasis, DEFAULT_LAMBDA_REL_TOL};

#[derive(Debug, Parser)]
#[command(name = "graphdesign", version, about = "Sparse graphical designs on weighted graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigendecompose the graph Laplacian and write eigenvalues.csv and spectrum.bin.
    Spectrum {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
    },
    /// Solve one design and write design.json.
    Design {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        signals: SignalArgs,
        #[command(flatten)]
        design: DesignArgs,
        /// Sparsity target; |J| = min(k, n).
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
    },
    /// Solve a design for every k in a range and score it on every signal.
    Sweep {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        signals: SignalArgs,
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long)]
        k_min: usize,
        #[arg(long)]
        k_max: usize,
        #[arg(long, default_value_t = 1)]
        k_step: usize,
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
    },
    /// Snap events to nodes and count them per period.
    Snap {
        /// Edge list CSV `u,v,w`
        #[arg(long)]
        graph: PathBuf,
        /// Node coordinates CSV `node,lat,lon`
        #[arg(long)]
        coords: PathBuf,
        /// Event CSV `lat,lon,timestamp`
        #[arg(long)]
        events: PathBuf,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
    },
    /// Evaluate a saved design against signals and write evaluation.json.
    Evaluate {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        signals: SignalArgs,
        /// Design JSON written by `design`.
        #[arg(long)]
        design: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SUPPORT_TOL)]
        supp_tol: f64,
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Edge list CSV `u,v,w`.
    #[arg(long)]
    pub graph: PathBuf,
    /// Node coordinates CSV `node,lat,lon`.
    #[arg(long)]
    pub coords: Option<PathBuf>,
    /// Relative eigenvalue tolerance for multiplicity detection.
    #[arg(long, default_value_t = DEFAULT_LAMBDA_REL_TOL)]
    pub lambda_tol: f64,
    /// Directory for cached spectra.
    #[arg(long, env = CACHE_DIR_ENV)]
    pub cache_dir: Option<PathBuf>,
    /// Always recompute the spectrum
    #[arg(long)]
    pub no_cache: bool,
}

#[derive(Debug, Args)]
pub struct SignalArgs {
    /// Signal CSV `node,f1,...,fT`.
    #[arg(long, conflicts_with = "events")]
    pub signals: Option<PathBuf>,
    /// Event CSV `lat,lon,timestamp`; needs --coords.
    #[arg(long)]
    pub events: Option<PathBuf>,
    #[command(flatten)]
    pub filter: FilterArgs,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Weekday mask, e.g. `mon-fri`, `sat,sun`, `all`.
    #[arg(long, default_value = "all")]
    pub weekdays: String,
    /// Local time window `HH:MM-HH:MM`, end exclusive.
    #[arg(long)]
    pub window: Option<String>,
    /// IANA timezone for interpreting timestamps.
    #[arg(long, default_value = "UTC")]
    pub timezone: String,
    /// First date kept, inclusive (`YYYY-MM-DD`)
    #[arg(long, requires = "end_date")]
    pub start_date: Option<NaiveDate>,
    /// Last date kept, inclusive
    #[arg(long, requires = "start_date")]
    pub end_date: Option<NaiveDate>,
    /// Comma-separated dates to skip, e.g. holidays.
    #[arg(long, value_delimiter = ',')]
    pub exclude_dates: Vec<NaiveDate>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// `freq` or `proj`.
    #[arg(long, default_value = "freq")]
    pub j_strategy: JStrategy,
    /// `nonparam`, `param`, `ones` or `file:<path>`.
    #[arg(long, default_value = "nonparam")]
    pub objective: Objective,
    /// Weights above this count as support.
    #[arg(long, default_value_t = DEFAULT_SUPPORT_TOL)]
    pub supp_tol: f64,
    /// Tolerance reported against the averaging residuals.
    #[arg(long, default_value_t = DEFAULT_RESIDUAL_TOL)]
    pub residual_tol: f64,
}

impl FilterArgs {
    pub fn to_filter(&self) -> Result<PeriodFilter> {
        let timezone = self
            .timezone
            .parse()
            .map_err(|_| Error::Config(format!("unknown timezone {:?}", self.timezone)))?;
        let window = self.window.as_deref().map(PeriodFilter::parse_window).transpose()?;
        let dates = match (self.start_date, self.end_date) {
            (Some(a), Some(b)) if a > b => {
                return Err(Error::Config(format!("start date {a} is after end date {b}")));
            }
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        };
        Ok(PeriodFilter {
            weekdays: PeriodFilter::parse_weekdays(&self.weekdays)?,
            window,
            timezone,
            dates,
            exclude: self.exclude_dates.iter().copied().collect::<BTreeSet<_>>(),
        })
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Spectrum { graph, output_dir } => cmd_spectrum(&graph, &output_dir),
        Command::Design {
            graph,
            signals,
            design,
            k,
            output_dir,
        } => cmd_design(&graph, &signals, &design, k, &output_dir),
        Command::Sweep {
            graph,
            signals,
            design,
            k_min,
            k_max,
            k_step,
            output_dir,
        } => cmd_sweep(&graph, &signals, &design, (k_min, k_max, k_step), &output_dir),
        Command::Snap {
            graph,
            coords,
            events,
            filter,
            output_dir,
        } => cmd_snap(&graph, &coords, &events, &filter, &output_dir),
        Command::Evaluate {
            graph,
            signals,
            design,
            supp_tol,
            output_dir,
        } => cmd_evaluate(&graph, &signals, &design, supp_tol, &output_dir),
    }
}

fn load_graph(args: &GraphArgs) -> Result<WeightedGraph> {
    let g = io::load_graph(&args.graph, args.coords.as_deref())?;
    println!("n = {}, m = {}", g.node_count(), g.edge_count());
    Ok(g)
}

/// Reads the spectrum from the cache when possible, otherwise computes and caches it.
fn load_spectrum(graph: &WeightedGraph, args: &GraphArgs) -> Result<SpectralBasis> {
    let cached = match (&args.cache_dir, args.no_cache) {
        (Some(dir), false) => Some(cache::cache_path(dir, graph)),
        _ => None,
    };
    if let Some(path) = cached.as_deref().filter(|p| p.exists()) {
        match cache::read_spectrum(path, args.lambda_tol) {
            Ok(basis) if basis.dim() == graph.node_count() => {
                info!("spectrum read from {}", path.display());
                return Ok(basis);
            }
            Ok(_) => warn!("ignoring cache {}: wrong dimension", path.display()),
            Err(e) => warn!("ignoring cache {}: {e}", path.display()),
        }
    }
    let basis = eigendecompose(&graph.laplacian(), args.lambda_tol)?;
    if let Some(path) = cached {
        cache::write_spectrum(&path, &basis)?;
        info!("spectrum cached at {}", path.display());
    }
    report_spectrum(&basis);
    Ok(basis)
}

fn report_spectrum(basis: &SpectralBasis) {
    if basis.dim() > 1 {
        println!("lambda_2 = {}", basis.eigenvalue(1));
    }
    for group in basis.multiplicity_groups() {
        let one_based: Vec<usize> = group.iter().map(|j| j + 1).collect();
        warn!(
            "repeated eigenvalue {} at indices {:?}",
            basis.eigenvalue(group[0]),
            one_based
        );
    }
}

/// Loads signals from a signal CSV or by aggregating events; `None` if neither was given.
fn load_signals(args: &SignalArgs, graph: &WeightedGraph) -> Result<Option<SignalSet>> {
    if let Some(path) = &args.signals {
        return Ok(Some(io::read_signals(path, graph)?));
    }
    if let Some(path) = &args.events {
        return Ok(Some(aggregate(graph, path, &args.filter)?.signals));
    }
    Ok(None)
}

fn aggregate(graph: &WeightedGraph, events: &Path, filter: &FilterArgs) -> Result<Aggregation> {
    let filter = filter.to_filter()?;
    let log = io::read_events(events)?;
    let snapped = snap_events(graph, &log)?;
    if snapped.dropped > 0 {
        warn!(
            "{} of {} events fall outside the graph's bounding box",
            snapped.dropped,
            log.len()
        );
    }
    let agg = aggregate_functions(graph.node_count(), &snapped, &log, &filter)?;
    if !agg.empty_periods.is_empty() {
        warn!("{} periods contain no events", agg.empty_periods.len());
    }
    Ok(agg)
}

/// Sample mean and custom costs, when the chosen strategy and objective need them.
type SpecInputs = (Option<Vec<f64>>, Option<Vec<f64>>);

fn spec_inputs(args: &DesignArgs, graph: &WeightedGraph, signals: Option<&SignalSet>) -> Result<SpecInputs> {
    let needs_mean = args.j_strategy == JStrategy::Projection || args.objective.needs_signal();
    let mean = match signals {
        Some(s) => Some(s.sample_mean().to_vec()),
        None if needs_mean => {
            return Err(Error::Config(format!(
                "--j-strategy {} with --objective {} needs --signals or --events",
                args.j_strategy, args.objective
            )));
        }
        None => None,
    };
    let cost = match &args.objective {
        Objective::File(path) => Some(io::read_costs(Path::new(path), graph)?),
        _ => None,
    };
    Ok((mean, cost))
}

fn build_spec<'a>(args: &DesignArgs, mean: Option<&'a [f64]>, cost: Option<&'a [f64]>) -> DesignSpec<'a> {
    let mut spec = DesignSpec::new(args.j_strategy, args.objective.clone());
    spec.sample_mean = mean;
    spec.custom_cost = cost;
    spec.support_tol = args.supp_tol;
    spec
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn cmd_spectrum(args: &GraphArgs, out: &Path) -> Result<()> {
    let graph = load_graph(args)?;
    let basis = load_spectrum(&graph, args)?;
    ensure_dir(out)?;
    io::write_eigenvalues(&out.join("eigenvalues.csv"), basis.eigenvalues())?;
    cache::write_spectrum(&out.join("spectrum.bin"), &basis)?;
    Ok(())
}

fn cmd_design(graph_args: &GraphArgs, sig: &SignalArgs, args: &DesignArgs, k: usize, out: &Path) -> Result<()> {
    let graph = load_graph(graph_args)?;
    let signals = load_signals(sig, &graph)?;
    let (mean, cost) = spec_inputs(args, &graph, signals.as_ref())?;
    let basis = load_spectrum(&graph, graph_args)?;
    let spec = build_spec(args, mean.as_deref(), cost.as_deref());
    let run = design_for_k(&basis, k, &spec)?;
    for w in &run.warnings {
        warn!("{w}");
    }
    let max_residual = averaging_residuals(&run.design, &basis, run.problem.j())?
        .into_iter()
        .fold(0.0_f64, |m, (_, r)| m.max(r));
    println!("|J| = {}, |S| = {}", run.problem.j().len(), run.design.support().len());
    println!("objective = {}", run.design.objective_value());
    println!("max averaging residual = {max_residual:e}");
    if max_residual > args.residual_tol {
        warn!(
            "averaging residual {max_residual:e} exceeds tolerance {:e}",
            args.residual_tol
        );
    }
    ensure_dir(out)?;
    DesignFile::new(&graph, &run.problem, &run.design).write(&out.join("design.json"))
}

fn cmd_sweep(
    graph_args: &GraphArgs,
    sig: &SignalArgs,
    args: &DesignArgs,
    (k_min, k_max, k_step): (usize, usize, usize),
    out: &Path,
) -> Result<()> {
    if k_min == 0 || k_min > k_max || k_step == 0 {
        return Err(Error::Config(format!(
            "invalid k range {k_min}..={k_max} step {k_step} (need 1 <= k_min <= k_max, step >= 1)"
        )));
    }
    let graph = load_graph(graph_args)?;
    let signals =
        load_signals(sig, &graph)?.ok_or_else(|| Error::Config("sweep needs --signals or --events".into()))?;
    let (mean, cost) = spec_inputs(args, &graph, Some(&signals))?;
    let basis = load_spectrum(&graph, graph_args)?;
    let spec = build_spec(args, mean.as_deref(), cost.as_deref());
    let ks: Vec<usize> = (k_min..=k_max).step_by(k_step).collect();
    let result = sweep(&basis, &signals, &ks, &spec)?;
    for w in &result.warnings {
        warn!("{w}");
    }
    ensure_dir(out)?;
    io::write_sweep(&out.join("sweep.csv"), &result.rows)?;
    io::write_summary(&out.join("summary.csv"), &result.summary)?;
    println!("{} values of k, {} functions", ks.len(), signals.len());
    Ok(())
}

fn cmd_snap(graph: &Path, coords: &Path, events: &Path, filter: &FilterArgs, out: &Path) -> Result<()> {
    let g = io::load_graph(graph, Some(coords))?;
    let agg = aggregate(&g, events, filter)?;
    ensure_dir(out)?;
    io::write_signals(&out.join("signals.csv"), &g, &agg.signals)?;
    io::write_mean(&out.join("signals_mean.csv"), &g, &agg.signals)?;
    let mut w = csv::Writer::from_path(out.join("periods.csv"))?;
    w.write_record(["function_id", "date", "events"])?;
    for (t, (d, c)) in agg.periods.iter().zip(&agg.events_per_period).enumerate() {
        w.write_record([(t + 1).to_string(), d.to_string(), c.to_string()])?;
    }
    w.flush()?;
    println!("{} periods, {} nodes", agg.periods.len(), g.node_count());
    Ok(())
}

fn cmd_evaluate(graph_args: &GraphArgs, sig: &SignalArgs, design: &Path, supp_tol: f64, out: &Path) -> Result<()> {
    let graph = load_graph(graph_args)?;
    let signals =
        load_signals(sig, &graph)?.ok_or_else(|| Error::Config("evaluate needs --signals or --events".into()))?;
    let file = DesignFile::read(design)?;
    let (design, j) = file.to_design(&graph, supp_tol)?;
    let basis = load_spectrum(&graph, graph_args)?;
    let report = evaluate_design(&design, &basis, &j, &signals)?;
    if let Some(q) = report.quartiles {
        println!("median percent error = {} (IQR {} .. {})", q.median, q.q25, q.q75);
    }
    println!("max averaging residual = {:e}", report.max_averaging_residual);
    ensure_dir(out)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    fs::write(out.join("evaluation.json"), text)?;
    Ok(())
}
