//! The four subcommands. Each one resolves its options (flags over config
//! entries over defaults), builds what it needs through the library, and
//! writes CSV files into the output directory. Every output is a pure
//! function of the resolved options, so reruns are byte-identical.

use crate::settings::{
    load_ranges, parse_count, parse_kinds, parse_seed, parse_size_list, parse_window, ConfigFile,
};
use crate::table::{fmt_f64, Table};
use anyhow::{anyhow, bail, Result};
use clap::Args;
use stabens::ensembles::{construct, EnsembleKind};
use stabens::equilibria::Branch;
use stabens::models::Model;
use stabens::sampler::{
    sample_fcs, stability_probability, Ensemble, EquilibriumMode, ParameterRanges, SamplerConfig,
};
use stabens::stats::{self, KdeConfig};
use stabens::toyplane::{
    classify_plane, gaussian2x2_stability, locus_curve, Gaussian2x2Spec, PlaneGridSpec,
};
use std::path::PathBuf;

/// Options shared by the sampling subcommands (`run`, `scan`, `spectra`).
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat `key = value` configuration file; flags override its entries.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Comma-separated ensemble kinds: fcs, independent, iid, ind-normal,
    /// ind-pearson, iid-normal, mvn.
    #[arg(long, value_name = "KINDS")]
    pub ensemble: Option<String>,
    /// Ensemble size N (default 100000 analytic, 1000 numeric).
    #[arg(long, value_name = "N")]
    pub samples: Option<usize>,
    /// Master seed; every random decision derives from it.
    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,
    /// Equilibrium location: `analytic` (closed forms) or `numeric` (Newton).
    #[arg(long, value_name = "MODE")]
    pub mode: Option<String>,
    /// Parameter range overrides, one `name = lo, hi` line per parameter.
    #[arg(long, value_name = "FILE")]
    pub ranges: Option<PathBuf>,
    /// Directory the CSV files are written into (created if missing).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Sampling worker threads; results never depend on this.
    #[arg(long, value_name = "COUNT")]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Model: lorenz, tyson, nowak, seir, sneir:<n>, senir:<n>, toy1,
    /// toy2, toy3.
    #[arg(long, value_name = "NAME")]
    pub model: Option<String>,
    /// Equilibrium branch (defaults to the model's studied branch).
    #[arg(long, value_name = "NAME")]
    pub branch: Option<String>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Epidemiological family to sweep: `sneir` or `senir`.
    #[arg(long, value_name = "FAMILY")]
    pub family: Option<String>,
    /// Family sizes, comma-separated with inclusive `lo..hi` ranges
    /// (e.g. `1..4,6`).
    #[arg(long, value_name = "LIST")]
    pub n: Option<String>,
    /// Equilibrium branch (defaults to `endemic`).
    #[arg(long, value_name = "NAME")]
    pub branch: Option<String>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SpectraArgs {
    /// Model: lorenz, tyson, nowak, seir, sneir:<n>, senir:<n>, toy1,
    /// toy2, toy3.
    #[arg(long, value_name = "NAME")]
    pub model: Option<String>,
    /// Equilibrium branch (defaults to the model's studied branch).
    #[arg(long, value_name = "NAME")]
    pub branch: Option<String>,
    /// Cells per axis of the pooled-eigenvalue density grid.
    #[arg(long, value_name = "COUNT")]
    pub bins: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    /// Flat `key = value` configuration file; flags override its entries.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Symmetric plane window `lo,hi`, applied to both axes.
    #[arg(long, value_name = "LO,HI")]
    pub window: Option<String>,
    /// Grid cells per axis of the classified plane.
    #[arg(long, value_name = "COUNT")]
    pub resolution: Option<usize>,
    /// Draws per bivariate-normal stability estimate.
    #[arg(long, value_name = "N")]
    pub samples: Option<usize>,
    /// Master seed for the bivariate-normal draws.
    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,
    /// Directory the CSV files are written into (created if missing).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// The shared options after layering flags over the config file.
struct Shared {
    kinds: Vec<EnsembleKind>,
    samples: usize,
    seed: u64,
    mode: EquilibriumMode,
    workers: Option<usize>,
    overrides: Vec<(String, (f64, f64))>,
    out: PathBuf,
}

fn resolve_shared(common: &CommonArgs, cfg: &ConfigFile) -> Result<Shared> {
    let mode = match cfg.resolve_str(common.mode.clone(), "mode") {
        Some(name) => EquilibriumMode::parse(&name)?,
        None => EquilibriumMode::Analytic,
    };
    let default_samples = match mode {
        EquilibriumMode::Analytic => 100_000,
        EquilibriumMode::Numeric => 1_000,
    };
    let kinds_text = cfg
        .resolve_str(common.ensemble.clone(), "ensemble")
        .unwrap_or_else(|| "fcs".to_string());
    let ranges_path = common
        .ranges
        .clone()
        .or_else(|| cfg.get("ranges").map(PathBuf::from));
    let overrides = match ranges_path {
        Some(path) => load_ranges(&path)?,
        None => Vec::new(),
    };
    Ok(Shared {
        kinds: parse_kinds(&kinds_text)?,
        samples: cfg
            .resolve(common.samples, "samples", parse_count)?
            .unwrap_or(default_samples),
        seed: cfg.resolve(common.seed, "seed", parse_seed)?.unwrap_or(0),
        mode,
        workers: cfg.resolve(common.workers, "workers", parse_count)?,
        overrides,
        out: common
            .out
            .clone()
            .or_else(|| cfg.get("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(".")),
    })
}

fn resolve_model(
    model_flag: &Option<String>,
    branch_flag: &Option<String>,
    cfg: &ConfigFile,
) -> Result<(Model, Branch)> {
    let name = cfg
        .resolve_str(model_flag.clone(), "model")
        .ok_or_else(|| anyhow!("no model selected (pass --model or a `model` config entry)"))?;
    let model = Model::parse(&name)?;
    let branch = match cfg.resolve_str(branch_flag.clone(), "branch") {
        Some(branch) => Branch::parse(&model, &branch)?,
        None => Branch::default_for(&model),
    };
    Ok((model, branch))
}

fn sampler_config(shared: &Shared) -> SamplerConfig {
    let mut cfg = SamplerConfig::new(shared.samples, shared.seed);
    cfg.mode = shared.mode;
    cfg.workers = shared.workers;
    cfg
}

/// Sample the source ensemble, then derive the other requested kinds from
/// it. Every construction receives the same master seed and consumes its
/// own labelled substreams, so adding or removing a kind from the list
/// never changes any other kind's result.
fn build_ensembles(
    model: &Model,
    branch: Branch,
    ranges: &ParameterRanges,
    shared: &Shared,
) -> Result<Vec<Ensemble>> {
    let fcs = sample_fcs(model, ranges, &sampler_config(shared), branch)?;
    shared
        .kinds
        .iter()
        .map(|&kind| match kind {
            EnsembleKind::Fcs => Ok(fcs.clone()),
            _ => Ok(construct(kind, &fcs, shared.seed)?),
        })
        .collect()
}

/// `run`: one stability estimate per requested ensemble kind.
pub fn run(args: &RunArgs) -> Result<()> {
    let cfg = ConfigFile::load(args.common.config.as_deref())?;
    let shared = resolve_shared(&args.common, &cfg)?;
    let (model, branch) = resolve_model(&args.model, &args.branch, &cfg)?;
    let ranges = ParameterRanges::from_overrides(&model, &shared.overrides)?;
    let ensembles = build_ensembles(&model, branch, &ranges, &shared)?;

    let mut table = Table::new(&["model", "ensemble", "n", "N", "p_hat", "se"]);
    for ensemble in &ensembles {
        let est = stability_probability(ensemble)?;
        table.push(vec![
            model.name(),
            ensemble.recipe.kind.name().to_string(),
            ensemble.order().to_string(),
            ensemble.len().to_string(),
            fmt_f64(est.p_hat),
            fmt_f64(est.se),
        ]);
    }
    let path = table.write(&shared.out, "run.csv")?;
    println!("wrote {}", path.display());
    Ok(())
}

/// `scan`: sweep a family over its size, summarising every kind at every
/// size with the stability estimate and leading-eigenvalue quartiles.
pub fn scan(args: &ScanArgs) -> Result<()> {
    let cfg = ConfigFile::load(args.common.config.as_deref())?;
    let shared = resolve_shared(&args.common, &cfg)?;
    let family = cfg
        .resolve_str(args.family.clone(), "family")
        .ok_or_else(|| anyhow!("no family selected (pass --family sneir|senir)"))?;
    if family != "sneir" && family != "senir" {
        bail!("unknown family `{family}` (expected `sneir` or `senir`)");
    }
    let sizes_text = cfg
        .resolve_str(args.n.clone(), "n")
        .ok_or_else(|| anyhow!("no family sizes given (pass --n, e.g. `--n 1..6`)"))?;
    let sizes = parse_size_list(&sizes_text)?;

    let kde = KdeConfig::default();
    let mut table = Table::new(&["n", "kind", "p_hat", "se", "median", "q1", "q3"]);
    for &n in &sizes {
        let model = if family == "sneir" {
            Model::SnEir { n }
        } else {
            Model::SeNir { n }
        };
        let branch = match cfg.resolve_str(args.branch.clone(), "branch") {
            Some(branch) => Branch::parse(&model, &branch)?,
            None => Branch::Endemic,
        };
        let ranges = ParameterRanges::from_overrides(&model, &shared.overrides)?;
        let ensembles = build_ensembles(&model, branch, &ranges, &shared)?;
        for ensemble in &ensembles {
            let summary = stats::leading_summary(ensemble, &kde)?;
            table.push(vec![
                n.to_string(),
                ensemble.recipe.kind.name().to_string(),
                fmt_f64(summary.stability.p_hat),
                fmt_f64(summary.stability.se),
                fmt_f64(summary.median),
                fmt_f64(summary.q1),
                fmt_f64(summary.q3),
            ]);
        }
    }
    let path = table.write(&shared.out, "scan.csv")?;
    println!("wrote {}", path.display());
    Ok(())
}

/// The bivariate-normal study exported by `toy`: a correlation sweep, a
/// marginal-variance sweep, and a mean shift across the `ab = 1` boundary.
const GAUSSIAN_SUITE: [(&str, [f64; 2], [f64; 2], f64); 7] = [
    ("corr-neg", [0.0, 0.0], [1.0, 1.0], -0.9),
    ("corr-zero", [0.0, 0.0], [1.0, 1.0], 0.0),
    ("corr-pos", [0.0, 0.0], [1.0, 1.0], 0.9),
    ("var-small", [0.0, 0.0], [0.5, 0.5], 0.0),
    ("var-large", [0.0, 0.0], [2.0, 2.0], 0.0),
    ("mean-stable", [-2.0, 2.0], [1.0, 1.0], 0.0),
    ("mean-unstable", [2.0, 2.0], [1.0, 1.0], 0.0),
];

/// `toy`: classify the (a, b) stability plane, trace the product-2 and
/// product-3 loci, and estimate stability under bivariate-normal (a, b).
pub fn toy(args: &ToyArgs) -> Result<()> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let window = match cfg.resolve_str(args.window.clone(), "window") {
        Some(text) => parse_window(&text)?,
        None => (-3.0, 3.0),
    };
    let resolution = cfg
        .resolve(args.resolution, "resolution", parse_count)?
        .unwrap_or(400);
    let samples = cfg
        .resolve(args.samples, "samples", parse_count)?
        .unwrap_or(100_000);
    let seed = cfg.resolve(args.seed, "seed", parse_seed)?.unwrap_or(0);
    let out = args
        .out
        .clone()
        .or_else(|| cfg.get("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    let grid = classify_plane(&PlaneGridSpec {
        a_range: window,
        b_range: window,
        resolution,
    })?;
    let mut plane = Table::new(&["a", "b", "stable"]);
    for (i, &a) in grid.a_centers.iter().enumerate() {
        for (j, &b) in grid.b_centers.iter().enumerate() {
            plane.push(vec![
                fmt_f64(a),
                fmt_f64(b),
                (grid.stable[i][j] as u8).to_string(),
            ]);
        }
    }
    let mut written = vec![plane.write(&out, "plane.csv")?];

    for (product, name) in [(2.0, "locus_ab2.csv"), (3.0, "locus_ab3.csv")] {
        let mut locus = Table::new(&["a", "b"]);
        for (a, b) in locus_curve(product, window, resolution) {
            locus.push(vec![fmt_f64(a), fmt_f64(b)]);
        }
        written.push(locus.write(&out, name)?);
    }

    let mut gaussian = Table::new(&[
        "label",
        "mean_a",
        "mean_b",
        "sd_a",
        "sd_b",
        "correlation",
        "N",
        "p_hat",
        "se",
    ]);
    for (label, mean, sd, correlation) in GAUSSIAN_SUITE {
        let spec = Gaussian2x2Spec::from_correlation(mean, sd, correlation)?;
        let est = gaussian2x2_stability(&spec, samples, seed)?;
        gaussian.push(vec![
            label.to_string(),
            fmt_f64(mean[0]),
            fmt_f64(mean[1]),
            fmt_f64(sd[0]),
            fmt_f64(sd[1]),
            fmt_f64(correlation),
            samples.to_string(),
            fmt_f64(est.p_hat),
            fmt_f64(est.se),
        ]);
    }
    written.push(gaussian.write(&out, "gaussian.csv")?);
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// `spectra`: per-kind eigenvalue lists, leading-part density estimates,
/// and pooled (Re, Im) count grids, plus a one-row-per-kind summary.
pub fn spectra(args: &SpectraArgs) -> Result<()> {
    let cfg = ConfigFile::load(args.common.config.as_deref())?;
    let shared = resolve_shared(&args.common, &cfg)?;
    let (model, branch) = resolve_model(&args.model, &args.branch, &cfg)?;
    let bins = cfg.resolve(args.bins, "bins", parse_count)?.unwrap_or(101);
    let ranges = ParameterRanges::from_overrides(&model, &shared.overrides)?;
    let ensembles = build_ensembles(&model, branch, &ranges, &shared)?;

    let kde = KdeConfig::default();
    let mut written = Vec::new();
    let mut summary_table = Table::new(&[
        "model", "ensemble", "n", "N", "p_hat", "se", "median", "q1", "q3",
    ]);
    for ensemble in &ensembles {
        let kind = ensemble.recipe.kind.name();
        let spectra = stats::spectra(ensemble)?;

        let mut eigen_table = Table::new(&["draw", "k", "re", "im"]);
        for (draw, spectrum) in spectra.iter().enumerate() {
            for (k, ev) in spectrum.eigenvalues().iter().enumerate() {
                eigen_table.push(vec![
                    draw.to_string(),
                    k.to_string(),
                    fmt_f64(ev.re),
                    fmt_f64(ev.im),
                ]);
            }
        }
        written.push(eigen_table.write(&shared.out, &format!("spectra_{kind}.csv"))?);

        let summary = stats::leading_summary(ensemble, &kde)?;
        let mut kde_table = Table::new(&["x", "density"]);
        for &(x, density) in &summary.kde {
            kde_table.push(vec![fmt_f64(x), fmt_f64(density)]);
        }
        written.push(kde_table.write(&shared.out, &format!("kde_{kind}.csv"))?);

        let grid = stats::density_grid(&spectra, bins)?;
        let mut density_table = Table::new(&["re", "im", "count"]);
        for (i, &re) in grid.re_centers.iter().enumerate() {
            for (j, &im) in grid.im_centers.iter().enumerate() {
                density_table.push(vec![
                    fmt_f64(re),
                    fmt_f64(im),
                    grid.counts[i][j].to_string(),
                ]);
            }
        }
        written.push(density_table.write(&shared.out, &format!("density_{kind}.csv"))?);

        summary_table.push(vec![
            model.name(),
            kind.to_string(),
            ensemble.order().to_string(),
            ensemble.len().to_string(),
            fmt_f64(summary.stability.p_hat),
            fmt_f64(summary.stability.se),
            fmt_f64(summary.median),
            fmt_f64(summary.q1),
            fmt_f64(summary.q3),
        ]);
    }
    written.push(summary_table.write(&shared.out, "summary.csv")?);
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
