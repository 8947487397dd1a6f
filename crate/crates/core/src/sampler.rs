//! Rejection sampling of Jacobians at feasible equilibria.
//!
//! Parameter sets are drawn from per-parameter uniform ranges; draws whose
//! selected equilibrium branch is absent, infeasible, or insufficiently
//! converged are rejected and replaced. Each attempt consumes its own
//! random substream keyed by the attempt index, so the accepted ensemble
//! is a pure function of the configuration: sharding attempts across any
//! number of worker threads reproduces the serial result bit for bit.

use crate::ensembles::EnsembleKind;
use crate::equilibria::{
    self, closed_form_branch, equilibrium_numeric, Branch, EquilibriumPoint, NewtonConfig,
};
use crate::models::Model;
use crate::rng::substream;
use crate::{Error, RealMatrix, Result};
use rand::Rng;

/// How equilibria are located during sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumMode {
    /// Closed-form branch solutions (all fixed models; families up to
    /// [`equilibria::CLOSED_FORM_LIMIT`]).
    Analytic,
    /// Damped Newton search (epidemiological families at any size).
    Numeric,
}

impl EquilibriumMode {
    /// Parse the command-line mode name.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "analytic" => Ok(EquilibriumMode::Analytic),
            "numeric" => Ok(EquilibriumMode::Numeric),
            _ => Err(Error::InvalidInput(format!(
                "unknown mode `{name}` (expected `analytic` or `numeric`)"
            ))),
        }
    }

    /// Stable identifier, matching what [`EquilibriumMode::parse`] accepts.
    pub fn name(&self) -> &'static str {
        match self {
            EquilibriumMode::Analytic => "analytic",
            EquilibriumMode::Numeric => "numeric",
        }
    }
}

/// Closed sampling interval for each model parameter, in parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterRanges {
    intervals: Vec<(f64, f64)>,
}

impl ParameterRanges {
    /// Validate explicit intervals against a model's parameter list.
    pub fn new(model: &Model, intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.len() != model.param_count() {
            return Err(Error::DimensionMismatch {
                what: "parameter ranges",
                expected: model.param_count(),
                got: intervals.len(),
            });
        }
        for (name, &(lo, hi)) in model.param_names().iter().zip(&intervals) {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidRange {
                    name: name.clone(),
                    lo,
                    hi,
                });
            }
        }
        Ok(ParameterRanges { intervals })
    }

    /// The model's default ranges.
    pub fn defaults(model: &Model) -> Self {
        ParameterRanges {
            intervals: model.default_ranges(),
        }
    }

    /// Defaults with named overrides applied; unknown names are errors.
    pub fn from_overrides(model: &Model, overrides: &[(String, (f64, f64))]) -> Result<Self> {
        let names = model.param_names();
        let mut intervals = model.default_ranges();
        for (name, interval) in overrides {
            let Some(idx) = names.iter().position(|n| n == name) else {
                return Err(Error::InvalidInput(format!(
                    "unknown parameter `{name}` for model `{}`",
                    model.name()
                )));
            };
            intervals[idx] = *interval;
        }
        ParameterRanges::new(model, intervals)
    }

    /// The intervals, in parameter order.
    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.intervals
            .iter()
            .map(|&(lo, hi)| if lo == hi { lo } else { rng.random_range(lo..=hi) })
            .collect()
    }
}

/// Settings for one sampling run.
#[derive(Debug, Clone)]
pub struct SamplerConfig {
    /// Number of accepted samples to collect.
    pub sample_count: usize,
    /// Master seed; every random decision derives from it.
    pub seed: u64,
    /// Rejection budget before the run is abandoned.
    pub max_rejections: usize,
    /// Equilibrium location method.
    pub mode: EquilibriumMode,
    /// Worker threads; `None` uses the machine's available parallelism.
    /// The result never depends on this value.
    pub workers: Option<usize>,
}

impl SamplerConfig {
    /// Standard configuration: rejection budget of `1000 * sample_count`,
    /// analytic equilibria, automatic worker count.
    pub fn new(sample_count: usize, seed: u64) -> Self {
        SamplerConfig {
            sample_count,
            seed,
            max_rejections: sample_count.saturating_mul(1000),
            mode: EquilibriumMode::Analytic,
            workers: None,
        }
    }

    /// Same configuration with the numeric equilibrium search.
    pub fn numeric(mut self) -> Self {
        self.mode = EquilibriumMode::Numeric;
        self
    }
}

/// How an ensemble was constructed: enough to reproduce it exactly.
#[derive(Debug, Clone)]
pub struct Recipe {
    /// Source model.
    pub model: Model,
    /// Equilibrium branch sampled.
    pub branch: Branch,
    /// Parameter ranges used.
    pub ranges: Vec<(f64, f64)>,
    /// Master seed.
    pub seed: u64,
    /// Which ensemble construction produced the matrices.
    pub kind: EnsembleKind,
    /// Equilibrium location method.
    pub mode: EquilibriumMode,
}

/// One matrix of an ensemble.
#[derive(Debug, Clone)]
pub struct MatrixSample {
    /// The matrix itself.
    pub matrix: RealMatrix,
    /// Position within the ensemble (0-based).
    pub draw_index: usize,
    /// Which construction produced it.
    pub origin: EnsembleKind,
}

/// An ordered collection of equally sized matrices plus its recipe.
#[derive(Debug, Clone)]
pub struct Ensemble {
    /// The samples, in draw order.
    pub samples: Vec<MatrixSample>,
    /// Construction descriptor.
    pub recipe: Recipe,
    /// Accepted fraction of parameter draws (1.0 for derived ensembles).
    pub acceptance_rate: f64,
}

impl Ensemble {
    /// Assemble an ensemble from matrices in draw order.
    pub fn from_matrices(recipe: Recipe, matrices: Vec<RealMatrix>, acceptance_rate: f64) -> Self {
        let kind = recipe.kind;
        let samples: Vec<MatrixSample> = matrices
            .into_iter()
            .enumerate()
            .map(|(draw_index, matrix)| MatrixSample {
                matrix,
                draw_index,
                origin: kind,
            })
            .collect();
        debug_assert!(samples.windows(2).all(|w| {
            w[0].matrix.nrows() == w[1].matrix.nrows()
        }));
        Ensemble {
            samples,
            recipe,
            acceptance_rate,
        }
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// True when the ensemble holds no samples.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Matrix order `p` (all samples share it).
    pub fn order(&self) -> usize {
        self.samples.first().map_or(0, |s| s.matrix.nrows())
    }

    /// The matrices in draw order.
    pub fn matrices(&self) -> impl Iterator<Item = &RealMatrix> {
        self.samples.iter().map(|s| &s.matrix)
    }
}

/// Parameter set and equilibrium behind one accepted sample.
#[derive(Debug, Clone)]
pub struct FcsDraw {
    /// The accepted parameter vector.
    pub theta: Vec<f64>,
    /// The feasible equilibrium the Jacobian was evaluated at.
    pub point: EquilibriumPoint,
    /// Index of the sampling attempt that produced it.
    pub attempt: u64,
}

/// Estimated probability that a matrix drawn from the ensemble is stable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityEstimate {
    /// Fraction of stable matrices.
    pub p_hat: f64,
    /// Binomial standard error `sqrt(p_hat (1 - p_hat) / N)`.
    pub se: f64,
    /// Number of stable matrices.
    pub stable_count: usize,
    /// Ensemble size `N`.
    pub sample_count: usize,
}

impl StabilityEstimate {
    /// Binomial point estimate and standard error from raw counts.
    pub fn from_counts(stable_count: usize, sample_count: usize) -> StabilityEstimate {
        let n = sample_count as f64;
        let p_hat = stable_count as f64 / n;
        let se = (p_hat * (1.0 - p_hat) / n).sqrt();
        StabilityEstimate {
            p_hat,
            se,
            stable_count,
            sample_count,
        }
    }
}

/// Sample the feasible conditioned system ensemble: Jacobians evaluated at
/// feasible equilibria of the named branch.
pub fn sample_fcs(
    model: &Model,
    ranges: &ParameterRanges,
    cfg: &SamplerConfig,
    branch: Branch,
) -> Result<Ensemble> {
    Ok(sample_fcs_with_provenance(model, ranges, cfg, branch)?.0)
}

/// As [`sample_fcs`], also returning the parameter set and equilibrium
/// behind each accepted sample, in draw order.
pub fn sample_fcs_with_provenance(
    model: &Model,
    ranges: &ParameterRanges,
    cfg: &SamplerConfig,
    branch: Branch,
) -> Result<(Ensemble, Vec<FcsDraw>)> {
    if cfg.sample_count == 0 {
        return Err(Error::InvalidInput(
            "sample count must be at least 1".into(),
        ));
    }
    ParameterRanges::new(model, ranges.intervals.clone())?; // re-validate against model
    if !equilibria::branches(model).contains(&branch) {
        return Err(Error::UnknownBranch {
            model: model.name(),
            branch: branch.name().to_string(),
        });
    }
    match cfg.mode {
        EquilibriumMode::Analytic => {
            if let Some(n) = model.size_param() {
                if n > equilibria::CLOSED_FORM_LIMIT {
                    return Err(Error::ClosedFormUnavailable {
                        model: model.name(),
                        limit: equilibria::CLOSED_FORM_LIMIT,
                    });
                }
            }
        }
        EquilibriumMode::Numeric => {
            if !matches!(
                model,
                Model::Seir | Model::SnEir { .. } | Model::SeNir { .. }
            ) {
                return Err(Error::NumericUnavailable {
                    model: model.name(),
                });
            }
            if branch != Branch::Endemic {
                return Err(Error::InvalidInput(format!(
                    "numeric equilibrium search only locates the `endemic` branch, not `{}`",
                    branch.name()
                )));
            }
        }
    }

    let workers = cfg
        .workers
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        })
        .max(1);
    let block = cfg.sample_count.clamp(64, 4096);

    let mut accepted: Vec<(Vec<f64>, EquilibriumPoint, RealMatrix, u64)> =
        Vec::with_capacity(cfg.sample_count);
    let mut rejections = 0usize;
    let mut next_attempt = 0u64;
    let mut last_accepted_attempt = 0u64;

    while accepted.len() < cfg.sample_count {
        let outcomes = evaluate_block(model, ranges, cfg, branch, next_attempt, block, workers)?;
        for (offset, outcome) in outcomes.into_iter().enumerate() {
            let attempt = next_attempt + offset as u64;
            match outcome {
                Some((theta, point, matrix)) => {
                    last_accepted_attempt = attempt;
                    accepted.push((theta, point, matrix, attempt));
                    if accepted.len() == cfg.sample_count {
                        break;
                    }
                }
                None => {
                    rejections += 1;
                    if rejections > cfg.max_rejections {
                        return Err(Error::TooManyRejections {
                            model: model.name(),
                            branch: branch.name().to_string(),
                            wanted: cfg.sample_count,
                            max_rejections: cfg.max_rejections as u64,
                        });
                    }
                }
            }
        }
        next_attempt += block as u64;
    }

    let acceptance_rate = cfg.sample_count as f64 / (last_accepted_attempt + 1) as f64;
    let recipe = Recipe {
        model: model.clone(),
        branch,
        ranges: ranges.intervals.clone(),
        seed: cfg.seed,
        kind: EnsembleKind::Fcs,
        mode: cfg.mode,
    };
    let mut matrices = Vec::with_capacity(cfg.sample_count);
    let mut draws = Vec::with_capacity(cfg.sample_count);
    for (theta, point, matrix, attempt) in accepted {
        matrices.push(matrix);
        draws.push(FcsDraw {
            theta,
            point,
            attempt,
        });
    }
    Ok((
        Ensemble::from_matrices(recipe, matrices, acceptance_rate),
        draws,
    ))
}

type AttemptOutcome = Option<(Vec<f64>, EquilibriumPoint, RealMatrix)>;

/// Evaluate attempts `[start, start + len)` in draw order, splitting the
/// range into contiguous chunks across worker threads.
fn evaluate_block(
    model: &Model,
    ranges: &ParameterRanges,
    cfg: &SamplerConfig,
    branch: Branch,
    start: u64,
    len: usize,
    workers: usize,
) -> Result<Vec<AttemptOutcome>> {
    if workers <= 1 || len < 2 * workers {
        return (0..len as u64)
            .map(|k| evaluate_attempt(model, ranges, cfg, branch, start + k))
            .collect();
    }
    let chunk = len.div_ceil(workers);
    let results: Vec<Result<Vec<AttemptOutcome>>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..workers {
            let lo = w * chunk;
            let hi = ((w + 1) * chunk).min(len);
            if lo >= hi {
                break;
            }
            handles.push(scope.spawn(move || {
                (lo as u64..hi as u64)
                    .map(|k| evaluate_attempt(model, ranges, cfg, branch, start + k))
                    .collect::<Result<Vec<AttemptOutcome>>>()
            }));
        }
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut merged = Vec::with_capacity(len);
    for chunk_result in results {
        merged.extend(chunk_result?);
    }
    Ok(merged)
}

/// One attempt: draw parameters from the attempt's own substream, locate
/// the branch equilibrium, and keep it only if feasible and converged.
fn evaluate_attempt(
    model: &Model,
    ranges: &ParameterRanges,
    cfg: &SamplerConfig,
    branch: Branch,
    attempt: u64,
) -> Result<AttemptOutcome> {
    let mut rng = substream(cfg.seed, "fcs", attempt);
    let theta = ranges.draw(&mut rng);
    let point = match cfg.mode {
        EquilibriumMode::Analytic => match closed_form_branch(model, branch, &theta) {
            Ok(p) => p,
            Err(Error::BranchAbsent { .. }) => return Ok(None),
            Err(e) => return Err(e),
        },
        EquilibriumMode::Numeric => {
            match equilibrium_numeric(model, &theta, &NewtonConfig::default(), &mut rng) {
                Ok(p) => p,
                Err(Error::NoEndemicRoot { .. }) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
    };
    if !point.acceptable() {
        return Ok(None);
    }
    let matrix = model.jacobian(&point.state, &theta)?;
    Ok(Some((theta, point, matrix)))
}

/// Fraction of stable matrices in the ensemble, with its binomial
/// standard error.
pub fn stability_probability(ensemble: &Ensemble) -> Result<StabilityEstimate> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut stable_count = 0usize;
    for sample in &ensemble.samples {
        if crate::linalg::is_stable(&sample.matrix)? {
            stable_count += 1;
        }
    }
    Ok(StabilityEstimate::from_counts(stable_count, ensemble.len()))
}
