use std::path::{Path, PathBuf};

use clap::Args;
use fermicorr_core::dpp::{histogram_from_samples, sample_many};
use fermicorr_core::inequalities::MAX_SWEEP_POINTS;
use fermicorr_core::{
    antibunching_curve, build_sampling_kernel, check_partition_bound, coherence_time_from_bandwidth, estimate_g2,
    fischer_cross_check, sweep_partitions, CoincidenceHistogram, GridSpec, InequalityReport, PartitionSpec,
    SpectralModel,
};
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::inputs::{self, load_json};
use crate::output::{self, Provenance};

/// What a successful run found. Violated inequalities still produce output
/// but exit 1.
pub enum Outcome {
    Ok,
    Violated,
}

#[derive(Args, Debug)]
pub struct KernelArgs {
    /// Spectral model JSON.
    #[arg(long)]
    model: Option<PathBuf>,
    /// JSON array of detection events, each {"r":[x,y,z],"t":..}.
    #[arg(long)]
    points: Option<PathBuf>,
    /// Cross-correlation matrix {"dim":k,"re":[[..]],"im":[[..]]}, used
    /// instead of --model and --points.
    #[arg(long)]
    matrix: Option<PathBuf>,
}

impl KernelArgs {
    fn load(&self) -> CliResult<inputs::LoadedKernel> {
        inputs::load_kernel(self.model.as_deref(), self.points.as_deref(), self.matrix.as_deref())
    }
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    #[arg(long)]
    model: PathBuf,
    /// Smallest delay in seconds [default: -3 T_c].
    #[arg(long, allow_hyphen_values = true)]
    tau_min: Option<f64>,
    /// Largest delay in seconds [default: 3 T_c].
    #[arg(long, allow_hyphen_values = true)]
    tau_max: Option<f64>,
    #[arg(long, default_value_t = 601)]
    n_points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

pub fn curve(args: &CurveArgs) -> CliResult<Outcome> {
    let (model, model_value) = load_json::<SpectralModel>(&args.model)?;
    let tc = model.coherence_time;
    let tau_min = args.tau_min.unwrap_or(-3.0 * tc);
    let tau_max = args.tau_max.unwrap_or(3.0 * tc);
    let curve = antibunching_curve(&model, tau_min, tau_max, args.n_points)?;

    let provenance = Provenance::new(
        "curve",
        json!({ "tau_min": tau_min, "tau_max": tau_max, "n_points": args.n_points }),
        json!({ "model": model_value }),
        args.seed,
    );
    let rows = curve
        .iter()
        .map(|&(tau, g2)| format!("{},{}", output::float(tau), output::float(g2)));
    output::write_csv(&args.out, &provenance, "tau_s,g2_normalized", rows)?;
    println!("wrote {} ({} points)", args.out.display(), curve.len());
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct ReportsPayload<'a> {
    reports: &'a [InequalityReport],
}

fn outcome_of(reports: &[InequalityReport]) -> Outcome {
    if reports.iter().all(|r| r.holds) {
        Outcome::Ok
    } else {
        Outcome::Violated
    }
}

fn summarize(out: &Path, reports: &[InequalityReport]) {
    let violated = reports.iter().filter(|r| !r.holds).count();
    println!(
        "wrote {} ({} reports, {} violated)",
        out.display(),
        reports.len(),
        violated
    );
    for r in reports.iter().filter(|r| !r.holds) {
        eprintln!("violated: slack {:e} below tolerance {:e}", r.slack, r.tolerance);
    }
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    /// Blocks separated by '|', 1-based indices by ','. Defaults to all
    /// singletons (the product bound).
    #[arg(long)]
    partition: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

pub fn check(args: &CheckArgs) -> CliResult<Outcome> {
    let loaded = args.kernel.load()?;
    let k = loaded.bundle.dim();
    let partition = match &args.partition {
        Some(text) => PartitionSpec::parse_one_based(text, k)?,
        None => PartitionSpec::singletons(k),
    };
    let reports = vec![check_partition_bound(&loaded.bundle, &partition)?];

    let provenance = Provenance::new(
        "check",
        json!({ "partition": partition.to_string() }),
        loaded.inputs,
        args.seed,
    );
    output::write_json(&args.out, &provenance, &ReportsPayload { reports: &reports })?;
    summarize(&args.out, &reports);
    Ok(outcome_of(&reports))
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

pub fn sweep(args: &SweepArgs) -> CliResult<Outcome> {
    let loaded = args.kernel.load()?;
    let reports = sweep_partitions(&loaded.bundle, MAX_SWEEP_POINTS)?;
    let provenance = Provenance::new("sweep", json!({}), loaded.inputs, args.seed);
    output::write_json(&args.out, &provenance, &ReportsPayload { reports: &reports })?;
    summarize(&args.out, &reports);
    Ok(outcome_of(&reports))
}

#[derive(Args, Debug)]
pub struct CrosscheckArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    /// Size of the leading block.
    #[arg(long)]
    l: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct CrosscheckPayload {
    l: usize,
    det_d: f64,
    det_dprime: f64,
    block_residual: f64,
    report: InequalityReport,
}

pub fn crosscheck(args: &CrosscheckArgs) -> CliResult<Outcome> {
    let loaded = args.kernel.load()?;
    let k = loaded.bundle.dim();
    let cross = fischer_cross_check(&loaded.bundle.big_gamma, args.l)?;
    let report = check_partition_bound(&loaded.bundle, &PartitionSpec::two_block(k, args.l)?)?;
    let outcome = outcome_of(std::slice::from_ref(&report));

    let provenance = Provenance::new("crosscheck", json!({ "l": args.l }), loaded.inputs, args.seed);
    let payload = CrosscheckPayload {
        l: args.l,
        det_d: cross.det_d,
        det_dprime: cross.det_dprime,
        block_residual: cross.block_residual,
        report,
    };
    output::write_json(&args.out, &provenance, &payload)?;
    println!(
        "wrote {} (det D = {:e}, det D' = {:e})",
        args.out.display(),
        cross.det_d,
        cross.det_dprime
    );
    Ok(outcome)
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    detector: PathBuf,
    /// "n=64,dt=1e-15,t0=0"; dt defaults to the detector bin width.
    #[arg(long)]
    grid: String,
    #[arg(long)]
    n_samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write every sample as "sample_index,bin_indices" CSV.
    #[arg(long)]
    sample_log: Option<PathBuf>,
}

#[derive(Serialize)]
struct HistogramPayload<'a> {
    lags: &'a [usize],
    g2: &'a [f64],
    stderr: &'a [f64],
    n_samples: u64,
    singles_rate: f64,
    pair_counts: &'a [u64],
    singles_count: u64,
    grid: &'a GridSpec,
}

pub fn sample(args: &SampleArgs) -> CliResult<Outcome> {
    if args.n_samples == 0 {
        return Err(CliError::Config("--n-samples must be at least 1".into()));
    }
    let (model, model_value) = load_json::<SpectralModel>(&args.model)?;
    let (detector, detector_value) = inputs::load_detector(&args.detector)?;
    let grid = inputs::parse_grid(&args.grid, detector.bin_width)?;
    let kernel = build_sampling_kernel(&model, &detector, &grid)?;

    let provenance = Provenance::new(
        "sample",
        json!({ "grid": grid, "n_samples": args.n_samples }),
        json!({ "model": model_value, "detector": detector_value }),
        args.seed,
    );

    let hist: CoincidenceHistogram = match &args.sample_log {
        Some(log) => {
            let samples = sample_many(&kernel, args.n_samples, args.seed)?;
            let rows = samples.iter().enumerate().map(|(i, s)| {
                let bins: Vec<String> = s.occupied_bins.iter().map(usize::to_string).collect();
                format!("{i},{}", bins.join(";"))
            });
            output::write_csv(log, &provenance, "sample_index,bin_indices", rows)?;
            histogram_from_samples(kernel.n_bins(), &samples)
        }
        None => estimate_g2(&kernel, args.n_samples, args.seed)?,
    };

    let payload = HistogramPayload {
        lags: &hist.lag_bins,
        g2: &hist.g2,
        stderr: &hist.stderr,
        n_samples: hist.n_samples,
        singles_rate: hist.singles_rate(),
        pair_counts: &hist.pair_counts,
        singles_count: hist.singles_count,
        grid: &grid,
    };
    output::write_json(&args.out, &provenance, &payload)?;
    println!(
        "wrote {} ({} samples, singles rate {:.4})",
        args.out.display(),
        hist.n_samples,
        hist.singles_rate()
    );
    Ok(Outcome::Ok)
}

#[derive(Args, Debug)]
pub struct CoherenceTimeArgs {
    /// Energy bandwidth, e.g. "0.2eV".
    bandwidth: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the JSON result; printed to stdout either way.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct CoherenceTimePayload {
    delta_e_ev: f64,
    coherence_time_s: f64,
}

pub fn coherence_time(args: &CoherenceTimeArgs) -> CliResult<Outcome> {
    let delta_e_ev = inputs::parse_bandwidth(&args.bandwidth)?;
    let coherence_time_s = coherence_time_from_bandwidth(delta_e_ev)?;
    let provenance = Provenance::new(
        "coherence-time",
        json!({ "delta_e_ev": delta_e_ev }),
        json!({}),
        args.seed,
    );
    let payload = CoherenceTimePayload {
        delta_e_ev,
        coherence_time_s,
    };
    let text = output::render_json(&provenance, &payload)?;
    if let Some(out) = &args.out {
        std::fs::write(out, &text).map_err(|e| CliError::io(out, e))?;
    }
    print!("{text}");
    Ok(Outcome::Ok)
}
