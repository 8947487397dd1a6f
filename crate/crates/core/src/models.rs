//! Registry of the parametric ODE systems under study.
//!
//! The registry is closed: models enter via code, so every Jacobian here is
//! a hand-derived analytic form (cross-checked against finite differences of
//! the right-hand side in the test suite). State orderings are fixed and
//! documented per model so that matrix entries are reproducible bit-for-bit.

use crate::{Error, RealMatrix, Result};

/// A parametric ODE system `dx/dt = f(x; theta)`.
///
/// `SnEir { n }` and `SeNir { n }` are families indexed by a structural size
/// `n >= 1`; both have state dimension `n + 2` and reduce to [`Model::Seir`]
/// at `n = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Model {
    /// Lorenz system; states `(x, y, z)`, parameters `(sigma, r, b)`.
    Lorenz,
    /// Cell-division-cycle model; states `(u, v, w, y)`, parameters
    /// `(k4, k4p, k6, k1r, k2, k3r, k7)`.
    ///
    /// `k4p` is the rate written `k4'`; `k1r` and `k3r` are the lumped rates
    /// `k1*[aa]/[CT]` and `k3*[CT]`, treated as single sampled parameters so
    /// the whole parameter list stays scalar. The printed form of this
    /// system's `dy/dt` equation repeats the `k2(v - w)` term of `dw/dt`'s
    /// sibling equation; we implement the equations exactly as printed
    /// rather than guess at an intended variant.
    Tyson,
    /// Virus dynamics model; states `(x, y, v)` = (uninfected cells,
    /// infected cells, free virus), parameters `(lambda, d, beta, a, k, u)`.
    Nowak,
    /// SEIR epidemiological model; states `(S, E, I)`, parameters
    /// `(mu, beta, alpha, gamma)`. The recovered proportion is implicit.
    Seir,
    /// SEIR with `n` exposed subpopulations; states `(S, E1..En, I)`,
    /// parameters `(mu, beta1..betan, alpha1..alphan, gamma)`.
    SnEir { n: usize },
    /// SEIR with `n` infective subpopulations; states `(S, E, I1..In)`,
    /// parameters `(mu, beta, alpha1..alphan, gamma1..gamman)`.
    SeNir { n: usize },
    /// Linear two-variable toy model: `dx/dt = -x + theta1*y`,
    /// `dy/dt = -y + theta2*x`.
    Toy1,
    /// Quadratic toy model: `dx/dt = -x + theta1*y^2`, `dy/dt = -y + theta2*x`.
    Toy2,
    /// Cubic toy model: `dx/dt = -x + theta1*y^3`, `dy/dt = -y + theta2*x`.
    Toy3,
}

impl Model {
    /// Parse a CLI model name: `lorenz`, `tyson`, `nowak`, `seir`,
    /// `sneir:<n>`, `senir:<n>`, `toy1`, `toy2`, `toy3`.
    pub fn parse(name: &str) -> Result<Model> {
        let unknown = || Error::UnknownModel(name.to_string());
        match name {
            "lorenz" => Ok(Model::Lorenz),
            "tyson" => Ok(Model::Tyson),
            "nowak" => Ok(Model::Nowak),
            "seir" => Ok(Model::Seir),
            "toy1" => Ok(Model::Toy1),
            "toy2" => Ok(Model::Toy2),
            "toy3" => Ok(Model::Toy3),
            _ => {
                let (family, n) = name.split_once(':').ok_or_else(unknown)?;
                let n: usize = n.parse().map_err(|_| unknown())?;
                if n == 0 {
                    return Err(unknown());
                }
                match family {
                    "sneir" => Ok(Model::SnEir { n }),
                    "senir" => Ok(Model::SeNir { n }),
                    _ => Err(unknown()),
                }
            }
        }
    }

    /// Canonical name, matching what [`Model::parse`] accepts.
    pub fn name(&self) -> String {
        match self {
            Model::Lorenz => "lorenz".into(),
            Model::Tyson => "tyson".into(),
            Model::Nowak => "nowak".into(),
            Model::Seir => "seir".into(),
            Model::SnEir { n } => format!("sneir:{n}"),
            Model::SeNir { n } => format!("senir:{n}"),
            Model::Toy1 => "toy1".into(),
            Model::Toy2 => "toy2".into(),
            Model::Toy3 => "toy3".into(),
        }
    }

    /// Number of state variables `p`.
    pub fn dim(&self) -> usize {
        match self {
            Model::Lorenz | Model::Nowak | Model::Seir => 3,
            Model::Tyson => 4,
            Model::SnEir { n } | Model::SeNir { n } => n + 2,
            Model::Toy1 | Model::Toy2 | Model::Toy3 => 2,
        }
    }

    /// Family size `n` for S(nE)IR / SE(nI)R; `None` for fixed models.
    pub fn size_param(&self) -> Option<usize> {
        match self {
            Model::SnEir { n } | Model::SeNir { n } => Some(*n),
            _ => None,
        }
    }

    /// Ordered parameter names; parameter vectors align with this order.
    pub fn param_names(&self) -> Vec<String> {
        fn indexed(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
            (1..=n).map(move |i| format!("{prefix}{i}"))
        }
        match self {
            Model::Lorenz => vec!["sigma".into(), "r".into(), "b".into()],
            Model::Tyson => ["k4", "k4p", "k6", "k1r", "k2", "k3r", "k7"]
                .map(String::from)
                .to_vec(),
            Model::Nowak => ["lambda", "d", "beta", "a", "k", "u"]
                .map(String::from)
                .to_vec(),
            Model::Seir => ["mu", "beta", "alpha", "gamma"].map(String::from).to_vec(),
            Model::SnEir { n } => std::iter::once("mu".into())
                .chain(indexed("beta", *n))
                .chain(indexed("alpha", *n))
                .chain(std::iter::once("gamma".into()))
                .collect(),
            Model::SeNir { n } => std::iter::once("mu".into())
                .chain(std::iter::once("beta".into()))
                .chain(indexed("alpha", *n))
                .chain(indexed("gamma", *n))
                .collect(),
            Model::Toy1 | Model::Toy2 | Model::Toy3 => vec!["theta1".into(), "theta2".into()],
        }
    }

    /// Number of parameters.
    pub fn param_count(&self) -> usize {
        match self {
            Model::Lorenz => 3,
            Model::Tyson => 7,
            Model::Nowak => 6,
            Model::Seir => 4,
            Model::SnEir { n } => 2 * n + 2,
            Model::SeNir { n } => 2 * n + 2,
            Model::Toy1 | Model::Toy2 | Model::Toy3 => 2,
        }
    }

    /// Default per-parameter sampling ranges.
    ///
    /// Lorenz uses `sigma in [0,10], r in [1,11], b in [0,10]` (keeping `r >= 1`
    /// so the off-origin branch exists); every other model samples all
    /// parameters uniformly on `[0, 1]`.
    pub fn default_ranges(&self) -> Vec<(f64, f64)> {
        match self {
            Model::Lorenz => vec![(0.0, 10.0), (1.0, 11.0), (0.0, 10.0)],
            _ => vec![(0.0, 1.0); self.param_count()],
        }
    }

    fn check_lengths(&self, x: &[f64], theta: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "state vector",
                expected: self.dim(),
                got: x.len(),
            });
        }
        if theta.len() != self.param_count() {
            return Err(Error::DimensionMismatch {
                what: "parameter vector",
                expected: self.param_count(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// Right-hand side `f(x; theta)`.
    pub fn rhs(&self, x: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        self.check_lengths(x, theta)?;
        Ok(match self {
            Model::Lorenz => {
                let (sigma, r, b) = (theta[0], theta[1], theta[2]);
                let (xx, yy, zz) = (x[0], x[1], x[2]);
                vec![
                    sigma * (yy - xx),
                    xx * (r - zz) - yy,
                    xx * yy - b * zz,
                ]
            }
            Model::Tyson => {
                let [k4, k4p, k6, k1r, k2, k3r, k7] = theta else {
                    unreachable!()
                };
                let (u, v, w, y) = (x[0], x[1], x[2], x[3]);
                vec![
                    (w - u) * (k4p + k4 * u * u) - k6 * u,
                    k1r - k2 * (v - w) - k6 * u,
                    k3r * (1.0 - w) * (v - w) - k6 * u,
                    k1r - k2 * (v - w) - k7 * (y - v),
                ]
            }
            Model::Nowak => {
                let [lambda, d, beta, a, k, u] = theta else {
                    unreachable!()
                };
                let (xx, yy, vv) = (x[0], x[1], x[2]);
                vec![
                    lambda - d * xx - beta * xx * vv,
                    beta * xx * vv - a * yy,
                    k * yy - u * vv,
                ]
            }
            Model::Seir => {
                let [mu, beta, alpha, gamma] = theta else {
                    unreachable!()
                };
                let (s, e, i) = (x[0], x[1], x[2]);
                vec![
                    mu - beta * s * i - mu * s,
                    beta * s * i - (mu + alpha) * e,
                    alpha * e - (mu + gamma) * i,
                ]
            }
            Model::SnEir { n } => {
                let n = *n;
                let mu = theta[0];
                let betas = &theta[1..1 + n];
                let alphas = &theta[1 + n..1 + 2 * n];
                let gamma = theta[1 + 2 * n];
                let s = x[0];
                let es = &x[1..1 + n];
                let i = x[1 + n];
                let beta_total: f64 = betas.iter().sum();
                let mut f = Vec::with_capacity(n + 2);
                f.push(mu - beta_total * s * i - mu * s);
                for j in 0..n {
                    f.push(betas[j] * s * i - (mu + alphas[j]) * es[j]);
                }
                f.push(
                    alphas.iter().zip(es).map(|(a, e)| a * e).sum::<f64>() - (mu + gamma) * i,
                );
                f
            }
            Model::SeNir { n } => {
                let n = *n;
                let mu = theta[0];
                let beta = theta[1];
                let alphas = &theta[2..2 + n];
                let gammas = &theta[2 + n..2 + 2 * n];
                let s = x[0];
                let e = x[1];
                let is = &x[2..2 + n];
                let i_total: f64 = is.iter().sum();
                let alpha_total: f64 = alphas.iter().sum();
                let mut f = Vec::with_capacity(n + 2);
                f.push(mu - beta * s * i_total - mu * s);
                f.push(beta * s * i_total - (mu + alpha_total) * e);
                for j in 0..n {
                    f.push(alphas[j] * e - (mu + gammas[j]) * is[j]);
                }
                f
            }
            Model::Toy1 => vec![-x[0] + theta[0] * x[1], -x[1] + theta[1] * x[0]],
            Model::Toy2 => vec![-x[0] + theta[0] * x[1] * x[1], -x[1] + theta[1] * x[0]],
            Model::Toy3 => vec![
                -x[0] + theta[0] * x[1] * x[1] * x[1],
                -x[1] + theta[1] * x[0],
            ],
        })
    }

    /// Analytic Jacobian `d f_i / d x_j` evaluated at `(x, theta)`.
    pub fn jacobian(&self, x: &[f64], theta: &[f64]) -> Result<RealMatrix> {
        self.check_lengths(x, theta)?;
        let p = self.dim();
        let mut j = RealMatrix::zeros(p, p);
        match self {
            Model::Lorenz => {
                let (sigma, r, b) = (theta[0], theta[1], theta[2]);
                let (xx, yy, zz) = (x[0], x[1], x[2]);
                j[(0, 0)] = -sigma;
                j[(0, 1)] = sigma;
                j[(1, 0)] = r - zz;
                j[(1, 1)] = -1.0;
                j[(1, 2)] = -xx;
                j[(2, 0)] = yy;
                j[(2, 1)] = xx;
                j[(2, 2)] = -b;
            }
            Model::Tyson => {
                let [k4, k4p, k6, _k1r, k2, k3r, k7] = theta else {
                    unreachable!()
                };
                let (u, v, w, _y) = (x[0], x[1], x[2], x[3]);
                let gate = k4p + k4 * u * u;
                j[(0, 0)] = -gate + 2.0 * k4 * u * (w - u) - k6;
                j[(0, 2)] = gate;
                j[(1, 0)] = -k6;
                j[(1, 1)] = -k2;
                j[(1, 2)] = *k2;
                j[(2, 0)] = -k6;
                j[(2, 1)] = k3r * (1.0 - w);
                j[(2, 2)] = -k3r * ((v - w) + (1.0 - w));
                j[(3, 1)] = k7 - k2;
                j[(3, 2)] = *k2;
                j[(3, 3)] = -k7;
            }
            Model::Nowak => {
                let [_lambda, d, beta, a, k, u] = theta else {
                    unreachable!()
                };
                let (xx, _yy, vv) = (x[0], x[1], x[2]);
                j[(0, 0)] = -d - beta * vv;
                j[(0, 2)] = -beta * xx;
                j[(1, 0)] = beta * vv;
                j[(1, 1)] = -a;
                j[(1, 2)] = beta * xx;
                j[(2, 1)] = *k;
                j[(2, 2)] = -u;
            }
            Model::Seir => {
                let [mu, beta, alpha, gamma] = theta else {
                    unreachable!()
                };
                let (s, _e, i) = (x[0], x[1], x[2]);
                j[(0, 0)] = -beta * i - mu;
                j[(0, 2)] = -beta * s;
                j[(1, 0)] = beta * i;
                j[(1, 1)] = -(mu + alpha);
                j[(1, 2)] = beta * s;
                j[(2, 1)] = *alpha;
                j[(2, 2)] = -(mu + gamma);
            }
            Model::SnEir { n } => {
                let n = *n;
                let mu = theta[0];
                let betas = &theta[1..1 + n];
                let alphas = &theta[1 + n..1 + 2 * n];
                let gamma = theta[1 + 2 * n];
                let s = x[0];
                let i = x[1 + n];
                let beta_total: f64 = betas.iter().sum();
                j[(0, 0)] = -beta_total * i - mu;
                j[(0, 1 + n)] = -beta_total * s;
                for row in 0..n {
                    j[(1 + row, 0)] = betas[row] * i;
                    j[(1 + row, 1 + row)] = -(mu + alphas[row]);
                    j[(1 + row, 1 + n)] = betas[row] * s;
                }
                for col in 0..n {
                    j[(1 + n, 1 + col)] = alphas[col];
                }
                j[(1 + n, 1 + n)] = -(mu + gamma);
            }
            Model::SeNir { n } => {
                let n = *n;
                let mu = theta[0];
                let beta = theta[1];
                let alphas = &theta[2..2 + n];
                let gammas = &theta[2 + n..2 + 2 * n];
                let s = x[0];
                let is = &x[2..2 + n];
                let i_total: f64 = is.iter().sum();
                let alpha_total: f64 = alphas.iter().sum();
                j[(0, 0)] = -beta * i_total - mu;
                j[(1, 0)] = beta * i_total;
                j[(1, 1)] = -(mu + alpha_total);
                for col in 0..n {
                    j[(0, 2 + col)] = -beta * s;
                    j[(1, 2 + col)] = beta * s;
                }
                for row in 0..n {
                    j[(2 + row, 1)] = alphas[row];
                    j[(2 + row, 2 + row)] = -(mu + gammas[row]);
                }
            }
            Model::Toy1 => {
                j[(0, 0)] = -1.0;
                j[(0, 1)] = theta[0];
                j[(1, 0)] = theta[1];
                j[(1, 1)] = -1.0;
            }
            Model::Toy2 => {
                j[(0, 0)] = -1.0;
                j[(0, 1)] = 2.0 * theta[0] * x[1];
                j[(1, 0)] = theta[1];
                j[(1, 1)] = -1.0;
            }
            Model::Toy3 => {
                j[(0, 0)] = -1.0;
                j[(0, 1)] = 3.0 * theta[0] * x[1] * x[1];
                j[(1, 0)] = theta[1];
                j[(1, 1)] = -1.0;
            }
        }
        Ok(j)
    }
}

/// The two-variable canonical matrix `[[-1, a], [b, -1]]`.
pub fn toy_jacobian(a: f64, b: f64) -> RealMatrix {
    nalgebra::dmatrix![-1.0, a; b, -1.0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trips() {
        for name in [
            "lorenz", "tyson", "nowak", "seir", "sneir:1", "sneir:6", "senir:3", "toy1", "toy2",
            "toy3",
        ] {
            assert_eq!(Model::parse(name).unwrap().name(), name);
        }
        assert!(Model::parse("sneir:0").is_err());
        assert!(Model::parse("sneir").is_err());
        assert!(Model::parse("lorenz2").is_err());
    }

    #[test]
    fn dims_and_params_are_consistent() {
        for model in [
            Model::Lorenz,
            Model::Tyson,
            Model::Nowak,
            Model::Seir,
            Model::SnEir { n: 4 },
            Model::SeNir { n: 4 },
            Model::Toy1,
        ] {
            assert_eq!(model.param_names().len(), model.param_count());
            assert_eq!(model.default_ranges().len(), model.param_count());
        }
        assert_eq!(Model::SnEir { n: 4 }.dim(), 6);
        assert_eq!(Model::SeNir { n: 4 }.dim(), 6);
    }

    #[test]
    fn lorenz_origin_is_an_equilibrium() {
        let f = Model::Lorenz
            .rhs(&[0.0, 0.0, 0.0], &[10.0, 28.0, 8.0 / 3.0])
            .unwrap();
        assert_eq!(f, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn seir_disease_free_state_annihilates_rhs() {
        let f = Model::Seir
            .rhs(&[1.0, 0.0, 0.0], &[0.3, 0.9, 0.5, 0.2])
            .unwrap();
        assert_eq!(f, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn lorenz_jacobian_matches_worked_example() {
        // (sigma, r, b) = (1, 2, 3) at (x, y, z) = (4, 5, 6).
        let j = Model::Lorenz
            .jacobian(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0])
            .unwrap();
        let expected = nalgebra::dmatrix![
            -1.0, 1.0, 0.0;
            -4.0, -1.0, -4.0;
            5.0, 4.0, -3.0
        ];
        assert_eq!(j, expected);
    }

    #[test]
    fn toy2_jacobian_off_diagonal() {
        let j = Model::Toy2.jacobian(&[0.3, 0.7], &[2.0, 5.0]).unwrap();
        assert_eq!(j[(0, 1)], 2.0 * 2.0 * 0.7);
        assert_eq!(j[(1, 0)], 5.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        assert!(matches!(
            Model::Seir.rhs(&[1.0, 0.0], &[0.1, 0.2, 0.3, 0.4]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            Model::Seir.jacobian(&[1.0, 0.0, 0.0], &[0.1, 0.2]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn toy_jacobian_is_literal() {
        assert_eq!(toy_jacobian(0.0, 0.0), nalgebra::dmatrix![-1.0, 0.0; 0.0, -1.0]);
        assert_eq!(toy_jacobian(2.0, 0.5), nalgebra::dmatrix![-1.0, 2.0; 0.5, -1.0]);
    }
}
