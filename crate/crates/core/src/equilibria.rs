//! Equilibrium location: closed forms for the small models, damped Newton
//! iteration for the structured epidemiological families at any size, plus
//! the nonnegativity filter applied to every candidate point.
//!
//! Each model exposes a fixed set of named branches (e.g. `endemic`,
//! `disease-free`, the Lorenz `plus`/`minus` pair). For a given parameter
//! draw a branch may be absent — a square root turning complex, a
//! denominator vanishing — and callers treat absence as a rejection, not a
//! hard failure.

use crate::models::Model;
use crate::{linalg, Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Largest family size `n` with a closed-form equilibrium implementation.
pub const CLOSED_FORM_LIMIT: usize = 6;

/// Accepted equilibria must satisfy `‖f(x*; θ)‖∞ ≤ RESIDUAL_TOL`.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// A state is feasible when every component is at least `-FEASIBILITY_TOL`;
/// components in `[-FEASIBILITY_TOL, 0)` are treated as exact zeros.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Newton iterates whose infective components all sit below this threshold
/// are classified as the infection-extinct branch and rejected.
pub const TRIVIAL_INFECTION_TOL: f64 = 1e-8;

/// Named equilibrium branch of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// The all-zero state (toy models, Lorenz).
    Origin,
    /// Positive square-root branch (Lorenz, cubic toy model).
    Plus,
    /// Negative square-root branch (Lorenz, cubic toy model).
    Minus,
    /// The nontrivial point of the quadratic toy model.
    Ep2,
    /// Infection-persistent point of the epidemiological/viral models.
    Endemic,
    /// Infection-extinct point of the epidemiological/viral models.
    DiseaseFree,
    /// The single studied fixed point of the cell-cycle model.
    Main,
}

impl Branch {
    /// Stable identifier used on the command line and in reports.
    pub fn name(&self) -> &'static str {
        match self {
            Branch::Origin => "origin",
            Branch::Plus => "plus",
            Branch::Minus => "minus",
            Branch::Ep2 => "ep2",
            Branch::Endemic => "endemic",
            Branch::DiseaseFree => "disease-free",
            Branch::Main => "main",
        }
    }

    /// Parse a branch name and check it is defined for `model`.
    pub fn parse(model: &Model, name: &str) -> Result<Branch> {
        let unknown = || Error::UnknownBranch {
            model: model.name(),
            branch: name.to_string(),
        };
        let branch = match name {
            "origin" => Branch::Origin,
            "plus" => Branch::Plus,
            "minus" => Branch::Minus,
            "ep2" => Branch::Ep2,
            "endemic" => Branch::Endemic,
            "disease-free" => Branch::DiseaseFree,
            "main" => Branch::Main,
            _ => return Err(unknown()),
        };
        if branches(model).contains(&branch) {
            Ok(branch)
        } else {
            Err(unknown())
        }
    }

    /// The branch studied by default for each model.
    pub fn default_for(model: &Model) -> Branch {
        match model {
            Model::Lorenz => Branch::Plus,
            Model::Tyson => Branch::Main,
            Model::Nowak | Model::Seir | Model::SnEir { .. } | Model::SeNir { .. } => {
                Branch::Endemic
            }
            Model::Toy1 => Branch::Origin,
            Model::Toy2 => Branch::Ep2,
            Model::Toy3 => Branch::Plus,
        }
    }
}

/// All branches defined for a model (independent of parameter values).
pub fn branches(model: &Model) -> &'static [Branch] {
    match model {
        Model::Lorenz => &[Branch::Origin, Branch::Plus, Branch::Minus],
        Model::Tyson => &[Branch::Main],
        Model::Nowak | Model::Seir | Model::SnEir { .. } | Model::SeNir { .. } => {
            &[Branch::Endemic, Branch::DiseaseFree]
        }
        Model::Toy1 => &[Branch::Origin],
        Model::Toy2 => &[Branch::Origin, Branch::Ep2],
        Model::Toy3 => &[Branch::Origin, Branch::Plus, Branch::Minus],
    }
}

/// True when every component is at least `-FEASIBILITY_TOL`.
pub fn feasible_state(state: &[f64]) -> bool {
    state.iter().all(|&v| v >= -FEASIBILITY_TOL)
}

/// An equilibrium candidate with its branch label, nonnegativity verdict,
/// and right-hand-side residual.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumPoint {
    /// The state, with negative roundoff in `[-FEASIBILITY_TOL, 0)`
    /// snapped to exact zero.
    pub state: Vec<f64>,
    /// Which branch this point belongs to.
    pub branch: Branch,
    /// Whether every component is nonnegative (after snapping).
    pub feasible: bool,
    /// `‖f(x*; θ)‖∞` evaluated at the stored state.
    pub residual: f64,
}

impl EquilibriumPoint {
    /// Build a point from a raw state: snap tiny negatives to zero, judge
    /// feasibility, and record the right-hand-side residual.
    pub fn new(model: &Model, branch: Branch, theta: &[f64], mut state: Vec<f64>) -> Result<Self> {
        let feasible = feasible_state(&state);
        for v in &mut state {
            if *v >= -FEASIBILITY_TOL && *v < 0.0 {
                *v = 0.0;
            }
        }
        let f = model.rhs(&state, theta)?;
        let residual = f
            .iter()
            .map(|v| if v.is_finite() { v.abs() } else { f64::INFINITY })
            .fold(0.0, f64::max);
        Ok(EquilibriumPoint {
            state,
            branch,
            feasible,
            residual,
        })
    }

    /// True when the point can be accepted as a sample: nonnegative and
    /// numerically an equilibrium.
    pub fn acceptable(&self) -> bool {
        self.feasible && self.residual <= RESIDUAL_TOL
    }
}

/// All closed-form equilibria of `model` at `theta`, with branch labels.
///
/// Branches that do not exist for this parameter draw (complex square
/// roots, vanishing denominators, no admissible polynomial root) are
/// omitted. Family models are supported up to `n = CLOSED_FORM_LIMIT`.
pub fn equilibria_closed_form(model: &Model, theta: &[f64]) -> Result<Vec<EquilibriumPoint>> {
    if let Some(n) = model.size_param() {
        if n > CLOSED_FORM_LIMIT {
            return Err(Error::ClosedFormUnavailable {
                model: model.name(),
                limit: CLOSED_FORM_LIMIT,
            });
        }
    }
    // Validate lengths once up front via a cheap rhs call on the zero state.
    model.rhs(&vec![0.0; model.dim()], theta)?;

    let mut points = Vec::new();
    let mut push = |branch: Branch, state: Vec<f64>| -> Result<()> {
        if state.iter().all(|v| v.is_finite()) {
            points.push(EquilibriumPoint::new(model, branch, theta, state)?);
        }
        Ok(())
    };

    match model {
        Model::Lorenz => {
            let (r, b) = (theta[1], theta[2]);
            push(Branch::Origin, vec![0.0, 0.0, 0.0])?;
            let disc = b * (r - 1.0);
            if disc >= 0.0 {
                let s = disc.sqrt();
                push(Branch::Plus, vec![s, s, r - 1.0])?;
                push(Branch::Minus, vec![-s, -s, r - 1.0])?;
            }
        }
        Model::Tyson => {
            if let Some(state) = tyson_main_state(theta) {
                push(Branch::Main, state)?;
            }
        }
        Model::Nowak => {
            let [lambda, d, beta, a, k, u] = theta else {
                unreachable!()
            };
            push(Branch::DiseaseFree, vec![lambda / d, 0.0, 0.0])?;
            let excess = lambda * beta * k - d * a * u;
            push(
                Branch::Endemic,
                vec![
                    a * u / (beta * k),
                    excess / (a * beta * k),
                    excess / (a * beta * u),
                ],
            )?;
        }
        Model::Seir | Model::SnEir { .. } | Model::SeNir { .. } => {
            let p = model.dim();
            let mut disease_free = vec![0.0; p];
            disease_free[0] = 1.0;
            push(Branch::DiseaseFree, disease_free)?;
            push(Branch::Endemic, family_endemic_state(model, theta))?;
        }
        Model::Toy1 => {
            push(Branch::Origin, vec![0.0, 0.0])?;
        }
        Model::Toy2 => {
            let (t1, t2) = (theta[0], theta[1]);
            push(Branch::Origin, vec![0.0, 0.0])?;
            push(Branch::Ep2, vec![1.0 / (t1 * t2 * t2), 1.0 / (t1 * t2)])?;
        }
        Model::Toy3 => {
            let (t1, t2) = (theta[0], theta[1]);
            push(Branch::Origin, vec![0.0, 0.0])?;
            let prod = t1 * t2;
            if prod > 0.0 {
                let y = 1.0 / prod.sqrt();
                let x = 1.0 / (t2 * prod.sqrt());
                push(Branch::Plus, vec![x, y])?;
                push(Branch::Minus, vec![-x, -y])?;
            }
        }
    }
    Ok(points)
}

/// The single closed-form equilibrium of `model` on `branch`, or an error
/// explaining why it is absent at this parameter draw.
pub fn closed_form_branch(model: &Model, branch: Branch, theta: &[f64]) -> Result<EquilibriumPoint> {
    if !branches(model).contains(&branch) {
        return Err(Error::UnknownBranch {
            model: model.name(),
            branch: branch.name().to_string(),
        });
    }
    let points = equilibria_closed_form(model, theta)?;
    points
        .into_iter()
        .find(|p| p.branch == branch)
        .ok_or_else(|| Error::BranchAbsent {
            model: model.name(),
            branch: branch.name().to_string(),
            reason: absence_reason(model, branch),
        })
}

fn absence_reason(model: &Model, branch: Branch) -> String {
    match (model, branch) {
        (Model::Lorenz, Branch::Plus | Branch::Minus) => {
            "b(r-1) < 0 makes the square-root branch complex".into()
        }
        (Model::Toy3, Branch::Plus | Branch::Minus) => {
            "theta1*theta2 <= 0 makes the square-root branch complex".into()
        }
        (Model::Tyson, Branch::Main) => {
            "no admissible polynomial root in (0, k1r/k6)".into()
        }
        _ => "degenerate parameters (vanishing denominator)".into(),
    }
}

/// Endemic state of the SEIR-type families from their closed forms.
fn family_endemic_state(model: &Model, theta: &[f64]) -> Vec<f64> {
    match model {
        Model::Seir => {
            let [mu, beta, alpha, gamma] = theta else {
                unreachable!()
            };
            let s = (mu + alpha) * (mu + gamma) / (alpha * beta);
            let i = mu * (1.0 - s) / (beta * s);
            let e = (mu + gamma) * i / alpha;
            vec![s, e, i]
        }
        Model::SnEir { n } => {
            let n = *n;
            let mu = theta[0];
            let betas = &theta[1..1 + n];
            let alphas = &theta[1 + n..1 + 2 * n];
            let gamma = theta[1 + 2 * n];
            let beta_total: f64 = betas.iter().sum();
            let gain: f64 = (0..n).map(|j| alphas[j] * betas[j] / (mu + alphas[j])).sum();
            let s = (mu + gamma) / gain;
            let i = mu * (1.0 - s) / (beta_total * s);
            let mut state = Vec::with_capacity(n + 2);
            state.push(s);
            for j in 0..n {
                state.push(betas[j] * s * i / (mu + alphas[j]));
            }
            state.push(i);
            state
        }
        Model::SeNir { n } => {
            let n = *n;
            let mu = theta[0];
            let beta = theta[1];
            let alphas = &theta[2..2 + n];
            let gammas = &theta[2 + n..2 + 2 * n];
            let alpha_total: f64 = alphas.iter().sum();
            let relay: f64 = (0..n).map(|j| alphas[j] / (mu + gammas[j])).sum();
            let s = (mu + alpha_total) / (beta * relay);
            let i_total = mu * (1.0 - s) / (beta * s);
            let e = i_total / relay;
            let mut state = Vec::with_capacity(n + 2);
            state.push(s);
            state.push(e);
            for j in 0..n {
                state.push(alphas[j] * e / (mu + gammas[j]));
            }
            state
        }
        _ => unreachable!("family_endemic_state called on a non-family model"),
    }
}

/// Studied fixed point of the cell-cycle model, if an admissible root of
/// its reduced quartic exists.
///
/// Eliminating `w`, `v`, `y` from the stationarity conditions leaves a
/// quartic in `u`; roots in the open interval `(0, k1r/k6)` make every
/// reconstructed component strictly positive. When several roots fall in
/// the interval (rare: parameter sets with three admissible roots occur a
/// few times per ten thousand uniform draws) the smallest is taken, fixing
/// a single reproducible branch.
fn tyson_main_state(theta: &[f64]) -> Option<Vec<f64>> {
    let [k4, k4p, k6, k1r, k2, k3r, k7] = theta else {
        return None;
    };
    let (k4, k4p, k6, k1r, k2, k3r, k7) = (*k4, *k4p, *k6, *k1r, *k2, *k3r, *k7);
    // Q(u) coefficients, ascending order.
    let coeffs = [
        k3r * k1r * k4p,
        -k3r * (k1r * (k4p + k6) + k4p * k6) - k2 * k4p * k6,
        k3r * (k1r * k4 + k6 * (k4p + k6)),
        -k3r * k4 * (k1r + k6) - k2 * k4 * k6,
        k3r * k4 * k6,
    ];
    let scale = coeffs.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
    if coeffs[4].abs() <= 1e-14 * scale {
        return None; // degenerate draw: the quartic collapses
    }
    let upper = k1r / k6;
    let root = real_polynomial_roots(&coeffs)
        .into_iter()
        .filter(|&u| u > 0.0 && u < upper)
        .fold(f64::INFINITY, f64::min);
    if !root.is_finite() {
        return None;
    }
    let u = root;
    let gate = k4p + k4 * u * u;
    let w = u + k6 * u / gate;
    let v = w + (k1r - k6 * u) / k2;
    let y = v + k6 * u / k7;
    Some(vec![u, v, w, y])
}

/// Real roots of a polynomial with ascending coefficients, found via the
/// companion matrix and polished by Newton steps. Duplicates from repeated
/// roots are merged; the result is sorted ascending.
fn real_polynomial_roots(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    debug_assert!(n >= 1 && coeffs[n] != 0.0);
    let mut companion = DMatrix::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -coeffs[i] / coeffs[n];
    }
    let eval = |u: f64| {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in coeffs.iter().rev() {
            dp = dp * u + p;
            p = p * u + c;
        }
        (p, dp)
    };
    let mut roots: Vec<f64> = Vec::new();
    let spectrum = match linalg::eigenvalues(&companion) {
        Ok(s) => s,
        Err(_) => return roots,
    };
    let coeff_scale: f64 = coeffs.iter().map(|c| c.abs()).sum();
    for z in spectrum.eigenvalues() {
        if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
            continue;
        }
        let mut u = z.re;
        for _ in 0..12 {
            let (p, dp) = eval(u);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            u -= step;
            if step.abs() <= 1e-15 * (1.0 + u.abs()) {
                break;
            }
        }
        let (p, _) = eval(u);
        let residual_scale = coeff_scale * (1.0 + u.abs()).powi(n as i32);
        if !u.is_finite() || p.abs() > 1e-8 * residual_scale {
            continue;
        }
        if !roots.iter().any(|r| (r - u).abs() <= 1e-8 * (1.0 + u.abs())) {
            roots.push(u);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

/// Configuration for the damped Newton search used by
/// [`equilibrium_numeric`].
#[derive(Debug, Clone)]
pub struct NewtonConfig {
    /// Newton iterations per start point.
    pub max_iterations: usize,
    /// Fresh uniform start points tried before giving up.
    pub max_restarts: usize,
    /// Convergence threshold on `‖f(x)‖∞`.
    pub tolerance: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            max_iterations: 200,
            max_restarts: 20,
            tolerance: RESIDUAL_TOL,
        }
    }
}

/// Index range of the infective components, for the models where the
/// infection-extinct branch must be screened out.
fn infective_range(model: &Model) -> Option<std::ops::Range<usize>> {
    match model {
        Model::Seir => Some(2..3),
        Model::SnEir { n } => Some(n + 1..n + 2),
        Model::SeNir { n } => Some(2..2 + n),
        _ => None,
    }
}

fn infection_extinct(model: &Model, state: &[f64]) -> bool {
    infective_range(model)
        .map(|r| state[r].iter().all(|&v| v.abs() <= TRIVIAL_INFECTION_TOL))
        .unwrap_or(false)
}

/// Locate the endemic equilibrium of an SEIR-type model by damped Newton
/// iteration with random restarts, at any family size.
///
/// Start points are drawn uniformly from `[0,1]^p` using the caller's
/// stream, so results are reproducible. Converged iterates on the
/// infection-extinct branch are discarded and the search restarts; if no
/// endemic root is found within the restart budget the caller should treat
/// the parameter draw as rejected.
pub fn equilibrium_numeric<R: Rng + ?Sized>(
    model: &Model,
    theta: &[f64],
    cfg: &NewtonConfig,
    rng: &mut R,
) -> Result<EquilibriumPoint> {
    match model {
        Model::Seir | Model::SnEir { .. } | Model::SeNir { .. } => {}
        _ => {
            return Err(Error::NumericUnavailable {
                model: model.name(),
            })
        }
    }
    let p = model.dim();
    for _ in 0..cfg.max_restarts {
        let start: Vec<f64> = (0..p).map(|_| rng.random_range(0.0..1.0)).collect();
        if let Some(state) = newton_from(model, theta, start, cfg)? {
            if infection_extinct(model, &state) {
                continue; // trivial branch: restart from a new point
            }
            return EquilibriumPoint::new(model, Branch::Endemic, theta, state);
        }
    }
    Err(Error::NoEndemicRoot {
        model: model.name(),
        restarts: cfg.max_restarts,
    })
}

/// One damped Newton run; `Ok(None)` means no convergence from this start.
fn newton_from(
    model: &Model,
    theta: &[f64],
    start: Vec<f64>,
    cfg: &NewtonConfig,
) -> Result<Option<Vec<f64>>> {
    let mut x = DVector::from_vec(start);
    let mut f = DVector::from_vec(model.rhs(x.as_slice(), theta)?);
    for _ in 0..cfg.max_iterations {
        if f.amax() <= cfg.tolerance && f.iter().all(|v| v.is_finite()) {
            return Ok(Some(polish(model, theta, x)?));
        }
        let jac = model.jacobian(x.as_slice(), theta)?;
        let Some(delta) = jac.lu().solve(&(-&f)) else {
            return Ok(None); // singular Jacobian: abandon this start
        };
        // Halving line search on the Euclidean merit ‖f‖².
        let merit = f.norm_squared();
        let mut lambda = 1.0;
        let mut advanced = false;
        for _ in 0..30 {
            let candidate = &x + lambda * &delta;
            let fc = DVector::from_vec(model.rhs(candidate.as_slice(), theta)?);
            let mc = fc.norm_squared();
            if mc.is_finite() && mc < merit {
                x = candidate;
                f = fc;
                advanced = true;
                break;
            }
            lambda *= 0.5;
        }
        if !advanced {
            return Ok(None); // stuck: no descent along the Newton direction
        }
    }
    Ok(None)
}

/// Drive a converged iterate toward machine precision with undamped Newton
/// steps. The convergence tolerance alone cannot separate nearby roots —
/// with slow dynamics a point between two equilibria can satisfy it while
/// belonging to neither — so the trivial-branch test runs on a polished
/// state, where quadratic convergence has already picked the actual root.
fn polish(model: &Model, theta: &[f64], mut x: DVector<f64>) -> Result<Vec<f64>> {
    let mut f = DVector::from_vec(model.rhs(x.as_slice(), theta)?);
    for _ in 0..10 {
        let jac = model.jacobian(x.as_slice(), theta)?;
        let Some(delta) = jac.lu().solve(&(-&f)) else {
            break; // singular Jacobian: keep the current iterate
        };
        let candidate = &x + delta;
        let fc = DVector::from_vec(model.rhs(candidate.as_slice(), theta)?);
        if !(fc.amax() < f.amax()) {
            break; // no further progress at this precision
        }
        x = candidate;
        f = fc;
    }
    Ok(x.as_slice().to_vec())
}
