//! The six ensembles derived from a sampled source ensemble: entrywise
//! permutations that break dependence (K*), pooled permutations that also
//! break marginal identity (L*), per-entry normal and Pearson fits, a
//! pooled normal fit, and a full multivariate-normal fit.
//!
//! Every construction is a deterministic function of the source ensemble
//! and a seed. Draw `ℓ` of each construction consumes its own substream
//! labelled by the ensemble kind, so constructions never perturb one
//! another and draws can be generated in any order or in parallel. Within
//! a draw, cells are visited in row-major order.

use crate::pearson::PearsonMember;
use crate::rng::substream;
use crate::sampler::{Ensemble, Recipe};
use crate::{Error, RealMatrix, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

/// Cells whose standard deviation is at most `CONSTANT_SD_TOL * max(1, |μ|)`
/// are treated as constants: fitted ensembles emit the mean exactly.
pub const CONSTANT_SD_TOL: f64 = 1e-9;

/// Eigenvalues of the fitted covariance below `1e-12 * trace` are clipped
/// to zero when sampling, preserving exact linear degeneracies.
pub const COVARIANCE_CLIP: f64 = 1e-12;

/// The seven ensemble constructions, by their command-line names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnsembleKind {
    /// Jacobians at feasible equilibria (the sampled source ensemble).
    Fcs,
    /// K*: per-cell resampling across the source ensemble.
    Independent,
    /// L*: per-cell resampling from the pooled entry distribution.
    Iid,
    /// Per-cell normal fit.
    IndNormal,
    /// Per-cell Pearson-system fit (matches four moments).
    IndPearson,
    /// Per-cell normal fit to the L* ensemble's entries.
    IidNormal,
    /// Multivariate normal fit over vectorized matrices.
    Mvn,
}

impl EnsembleKind {
    /// All kinds, in reporting order.
    pub const ALL: [EnsembleKind; 7] = [
        EnsembleKind::Fcs,
        EnsembleKind::Independent,
        EnsembleKind::Iid,
        EnsembleKind::IndNormal,
        EnsembleKind::IndPearson,
        EnsembleKind::IidNormal,
        EnsembleKind::Mvn,
    ];

    /// Stable identifier used on the command line and in reports.
    pub fn name(&self) -> &'static str {
        match self {
            EnsembleKind::Fcs => "fcs",
            EnsembleKind::Independent => "independent",
            EnsembleKind::Iid => "iid",
            EnsembleKind::IndNormal => "ind-normal",
            EnsembleKind::IndPearson => "ind-pearson",
            EnsembleKind::IidNormal => "iid-normal",
            EnsembleKind::Mvn => "mvn",
        }
    }

    /// Parse a kind name.
    pub fn parse(name: &str) -> Result<EnsembleKind> {
        EnsembleKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::UnknownEnsembleKind(name.to_string()))
    }
}

/// Per-cell first-to-fourth moment summary of an ensemble.
///
/// Population (1/N) normalizers throughout; kurtosis is raw (Gaussian = 3).
/// Constant cells carry `sd = 0` and NaN skewness/kurtosis, and are flagged
/// in `constant`.
#[derive(Debug, Clone)]
pub struct MomentSummary {
    /// Per-cell means.
    pub mean: RealMatrix,
    /// Per-cell standard deviations (0 for constant cells).
    pub sd: RealMatrix,
    /// Per-cell skewness (NaN for constant cells).
    pub skewness: RealMatrix,
    /// Per-cell raw kurtosis (NaN for constant cells).
    pub kurtosis: RealMatrix,
    /// Which cells are constant.
    pub constant: DMatrix<bool>,
    /// Recipe of the ensemble the summary was fitted to.
    pub source: Recipe,
}

impl MomentSummary {
    /// Matrix order `p`.
    pub fn order(&self) -> usize {
        self.mean.nrows()
    }

    /// Whether cell `(i, j)` was flagged constant.
    pub fn is_constant(&self, i: usize, j: usize) -> bool {
        self.constant[(i, j)]
    }
}

/// Mean vector and maximum-likelihood covariance of vectorized matrices.
///
/// Vectorization concatenates the columns of each matrix; `covariance` uses
/// the population (1/N) normalizer and is exactly symmetric.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    /// Mean of the vectorized matrices (length p²).
    pub mean: DVector<f64>,
    /// Covariance of the vectorized matrices (p² × p²).
    pub covariance: DMatrix<f64>,
    /// Matrix order `p`.
    pub order: usize,
    /// Recipe of the ensemble the model was fitted to.
    pub source: Recipe,
}

impl CovarianceModel {
    /// Standard deviation of coordinate `k` implied by the diagonal.
    pub fn diagonal_sd(&self, k: usize) -> f64 {
        self.covariance[(k, k)].max(0.0).sqrt()
    }

    /// Whether coordinate `k` is degenerate under the constant-cell rule.
    pub fn is_degenerate(&self, k: usize) -> bool {
        self.diagonal_sd(k) <= CONSTANT_SD_TOL * self.mean[k].abs().max(1.0)
    }
}

fn require_nonempty(source: &Ensemble) -> Result<()> {
    if source.is_empty() {
        Err(Error::EmptyEnsemble)
    } else {
        Ok(())
    }
}

fn finish(source: &Recipe, kind: EnsembleKind, seed: u64, matrices: Vec<RealMatrix>) -> Ensemble {
    let mut recipe = source.clone();
    recipe.kind = kind;
    recipe.seed = seed;
    Ensemble::from_matrices(recipe, matrices, 1.0)
}

/// Build the K* ensemble: each cell of each output matrix copies that same
/// cell from a uniformly chosen source matrix, independently per cell.
/// Structural zeros are preserved, per-cell marginals are resampled, and
/// dependence between cells is destroyed.
pub fn permute_independent(fcs: &Ensemble, seed: u64) -> Result<Ensemble> {
    require_nonempty(fcs)?;
    let n = fcs.len();
    let p = fcs.order();
    let matrices = (0..n)
        .map(|draw| {
            let mut rng = substream(seed, EnsembleKind::Independent.name(), draw as u64);
            let mut m = RealMatrix::zeros(p, p);
            for i in 0..p {
                for j in 0..p {
                    let q = rng.random_range(0..n);
                    m[(i, j)] = fcs.samples[q].matrix[(i, j)];
                }
            }
            m
        })
        .collect();
    Ok(finish(&fcs.recipe, EnsembleKind::Independent, seed, matrices))
}

/// Build the L* ensemble: each cell of each output matrix copies a
/// uniformly chosen cell of a uniformly chosen source matrix, so all cells
/// share the pooled entry distribution.
pub fn permute_iid(fcs: &Ensemble, seed: u64) -> Result<Ensemble> {
    require_nonempty(fcs)?;
    let n = fcs.len();
    let p = fcs.order();
    let matrices = (0..n)
        .map(|draw| {
            let mut rng = substream(seed, EnsembleKind::Iid.name(), draw as u64);
            let mut m = RealMatrix::zeros(p, p);
            for i in 0..p {
                for j in 0..p {
                    let q = rng.random_range(0..n);
                    let r = rng.random_range(0..p);
                    let s = rng.random_range(0..p);
                    m[(i, j)] = fcs.samples[q].matrix[(r, s)];
                }
            }
            m
        })
        .collect();
    Ok(finish(&fcs.recipe, EnsembleKind::Iid, seed, matrices))
}

/// Fit per-cell mean, standard deviation, skewness, and kurtosis.
pub fn fit_moments(source: &Ensemble) -> Result<MomentSummary> {
    let n = source.len();
    if n < 2 {
        return Err(Error::NotEnoughSamples {
            what: "ensemble for moment fitting",
            need: 2,
            got: n,
        });
    }
    let p = source.order();
    let nf = n as f64;
    let mut mean = RealMatrix::zeros(p, p);
    let mut sd = RealMatrix::zeros(p, p);
    let mut skewness = RealMatrix::zeros(p, p);
    let mut kurtosis = RealMatrix::zeros(p, p);
    let mut constant = DMatrix::from_element(p, p, false);
    for i in 0..p {
        for j in 0..p {
            let mut sum = 0.0;
            for m in source.matrices() {
                sum += m[(i, j)];
            }
            let mu = sum / nf;
            let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
            for m in source.matrices() {
                let d = m[(i, j)] - mu;
                let d2 = d * d;
                m2 += d2;
                m3 += d2 * d;
                m4 += d2 * d2;
            }
            m2 /= nf;
            m3 /= nf;
            m4 /= nf;
            let sigma = m2.sqrt();
            mean[(i, j)] = mu;
            if sigma <= CONSTANT_SD_TOL * mu.abs().max(1.0) {
                constant[(i, j)] = true;
                sd[(i, j)] = 0.0;
                skewness[(i, j)] = f64::NAN;
                kurtosis[(i, j)] = f64::NAN;
            } else {
                sd[(i, j)] = sigma;
                skewness[(i, j)] = m3 / (m2 * sigma);
                kurtosis[(i, j)] = m4 / (m2 * m2);
            }
        }
    }
    Ok(MomentSummary {
        mean,
        sd,
        skewness,
        kurtosis,
        constant,
        source: source.recipe.clone(),
    })
}

/// Per-cell law used by the normal-fit samplers.
enum CellLaw {
    Constant(f64),
    Gaussian(Normal<f64>),
}

fn normal_cells(ms: &MomentSummary) -> Result<Vec<CellLaw>> {
    let p = ms.order();
    let mut cells = Vec::with_capacity(p * p);
    for i in 0..p {
        for j in 0..p {
            cells.push(if ms.is_constant(i, j) {
                CellLaw::Constant(ms.mean[(i, j)])
            } else {
                let law = Normal::new(ms.mean[(i, j)], ms.sd[(i, j)])
                    .map_err(|e| Error::InvalidInput(format!("normal fit: {e}")).at_cell(i, j))?;
                CellLaw::Gaussian(law)
            });
        }
    }
    Ok(cells)
}

fn sample_cellwise_normal(
    ms: &MomentSummary,
    n: usize,
    seed: u64,
    kind: EnsembleKind,
) -> Result<Ensemble> {
    let p = ms.order();
    let cells = normal_cells(ms)?;
    let matrices = (0..n)
        .map(|draw| {
            let mut rng = substream(seed, kind.name(), draw as u64);
            let mut m = RealMatrix::zeros(p, p);
            for i in 0..p {
                for j in 0..p {
                    m[(i, j)] = match &cells[i * p + j] {
                        CellLaw::Constant(c) => *c,
                        CellLaw::Gaussian(law) => law.sample(&mut rng),
                    };
                }
            }
            m
        })
        .collect();
    Ok(finish(&ms.source, kind, seed, matrices))
}

/// Sample the per-cell normal fit: each cell draws from
/// `Normal(μ_ij, σ_ij)` independently; constant cells emit their mean.
pub fn sample_independent_normal(ms: &MomentSummary, n: usize, seed: u64) -> Result<Ensemble> {
    sample_cellwise_normal(ms, n, seed, EnsembleKind::IndNormal)
}

/// Sample the per-cell Pearson-system fit: each cell draws from the family
/// member matching its four moments; constant cells emit their mean.
///
/// Cells whose (skewness, kurtosis) pair is infeasible — at or below the
/// two-point boundary `κ = γ² + 1` — fail with an error naming the cell.
pub fn sample_independent_pearson(ms: &MomentSummary, n: usize, seed: u64) -> Result<Ensemble> {
    let p = ms.order();
    enum PearsonCell {
        Constant(f64),
        Member { mean: f64, sd: f64, member: PearsonMember },
    }
    let mut cells = Vec::with_capacity(p * p);
    for i in 0..p {
        for j in 0..p {
            cells.push(if ms.is_constant(i, j) {
                PearsonCell::Constant(ms.mean[(i, j)])
            } else {
                let member = PearsonMember::classify(ms.skewness[(i, j)], ms.kurtosis[(i, j)])
                    .map_err(|e| e.at_cell(i, j))?;
                PearsonCell::Member {
                    mean: ms.mean[(i, j)],
                    sd: ms.sd[(i, j)],
                    member,
                }
            });
        }
    }
    let matrices = (0..n)
        .map(|draw| {
            let mut rng = substream(seed, EnsembleKind::IndPearson.name(), draw as u64);
            let mut m = RealMatrix::zeros(p, p);
            for i in 0..p {
                for j in 0..p {
                    m[(i, j)] = match &cells[i * p + j] {
                        PearsonCell::Constant(c) => *c,
                        PearsonCell::Member { mean, sd, member } => {
                            mean + sd * member.sample(&mut rng)
                        }
                    };
                }
            }
            m
        })
        .collect();
    Ok(finish(&ms.source, EnsembleKind::IndPearson, seed, matrices))
}

/// Sample per-cell normal fits taken over an L* ensemble's entries: since
/// L* cells share the pooled distribution, all fitted cells agree in
/// expectation.
pub fn sample_iid_normal(iid: &Ensemble, n: usize, seed: u64) -> Result<Ensemble> {
    let ms = fit_moments(iid)?;
    sample_cellwise_normal(&ms, n, seed, EnsembleKind::IidNormal)
}

/// Fit a multivariate normal to the vectorized matrices by maximum
/// likelihood (mean and 1/N covariance).
pub fn fit_mvn(source: &Ensemble) -> Result<CovarianceModel> {
    let n = source.len();
    if n < 2 {
        return Err(Error::NotEnoughSamples {
            what: "ensemble for covariance fitting",
            need: 2,
            got: n,
        });
    }
    let p = source.order();
    let d = p * p;
    let nf = n as f64;
    let mut mean = DVector::zeros(d);
    for m in source.matrices() {
        for (k, v) in m.as_slice().iter().enumerate() {
            mean[k] += v;
        }
    }
    mean /= nf;
    let mut cov = DMatrix::zeros(d, d);
    let mut dev = vec![0.0; d];
    for m in source.matrices() {
        for (k, v) in m.as_slice().iter().enumerate() {
            dev[k] = v - mean[k];
        }
        // Accumulate the upper triangle only; mirrored once at the end so
        // the result is symmetric exactly, not just up to roundoff.
        for a in 0..d {
            let da = dev[a];
            for b in a..d {
                cov[(a, b)] += da * dev[b];
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            cov[(a, b)] /= nf;
            cov[(b, a)] = cov[(a, b)];
        }
    }
    Ok(CovarianceModel {
        mean,
        covariance: cov,
        order: p,
        source: source.recipe.clone(),
    })
}

/// Sample the multivariate-normal fit and reshape each vector back into a
/// matrix (inverting the column concatenation).
///
/// Degenerate coordinates (constant cells) are excluded from the Gaussian
/// factor and emitted as exact constants; the remaining covariance block is
/// factored by symmetric eigendecomposition with small eigenvalues clipped
/// to zero, so exact linear degeneracies stay exact up to roundoff instead
/// of being jittered.
pub fn sample_mvn(cm: &CovarianceModel, n: usize, seed: u64) -> Result<Ensemble> {
    let d = cm.mean.len();
    let p = cm.order;
    let active: Vec<usize> = (0..d).filter(|&k| !cm.is_degenerate(k)).collect();
    let a = active.len();
    let factor = if a > 0 {
        let reduced = DMatrix::from_fn(a, a, |r, c| cm.covariance[(active[r], active[c])]);
        let trace: f64 = (0..a).map(|k| reduced[(k, k)]).sum();
        let eig = reduced
            .try_symmetric_eigen(f64::EPSILON, 100_000)
            .ok_or(Error::EigenNonConvergence { order: a })?;
        let clip = COVARIANCE_CLIP * trace;
        let scales = DVector::from_fn(a, |k, _| {
            let lambda = eig.eigenvalues[k];
            if lambda < clip {
                0.0
            } else {
                lambda.sqrt()
            }
        });
        let mut f = eig.eigenvectors;
        for (k, col) in scales.iter().enumerate() {
            f.column_mut(k).scale_mut(*col);
        }
        f
    } else {
        DMatrix::zeros(0, 0)
    };
    let matrices = (0..n)
        .map(|draw| {
            let mut rng = substream(seed, EnsembleKind::Mvn.name(), draw as u64);
            let z = DVector::from_fn(a, |_, _| rng.sample(StandardNormal));
            let x = &factor * z;
            let mut v = cm.mean.clone();
            for (idx, &k) in active.iter().enumerate() {
                v[k] += x[idx];
            }
            DMatrix::from_column_slice(p, p, v.as_slice())
        })
        .collect();
    Ok(finish(&cm.source, EnsembleKind::Mvn, seed, matrices))
}

/// Build one derived ensemble of the same size as the source.
///
/// The same seed can be passed for every kind: each construction consumes
/// substreams under its own label. In particular, the L* ensemble fitted
/// inside `iid-normal` is identical to the standalone `iid` construction
/// at the same seed.
pub fn construct(kind: EnsembleKind, fcs: &Ensemble, seed: u64) -> Result<Ensemble> {
    match kind {
        EnsembleKind::Fcs => Err(Error::InvalidInput(
            "the source ensemble is sampled directly, not derived".into(),
        )),
        EnsembleKind::Independent => permute_independent(fcs, seed),
        EnsembleKind::Iid => permute_iid(fcs, seed),
        EnsembleKind::IndNormal => {
            sample_independent_normal(&fit_moments(fcs)?, fcs.len(), seed)
        }
        EnsembleKind::IndPearson => {
            sample_independent_pearson(&fit_moments(fcs)?, fcs.len(), seed)
        }
        EnsembleKind::IidNormal => sample_iid_normal(&permute_iid(fcs, seed)?, fcs.len(), seed),
        EnsembleKind::Mvn => sample_mvn(&fit_mvn(fcs)?, fcs.len(), seed),
    }
}
