//! Equation of state and the benchmark problem families on the unit square.

use crate::autodiff::{hyper_seed, Dual, ScalarField};
use crate::error::{FeError, SolverError};
use crate::scalar::Scalar;
use crate::{Point, Real};

/// Barotropic law `p = c rho^gamma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquationOfState {
    pub c: Real,
    pub gamma: Real,
}

impl EquationOfState {
    pub fn new(c: Real, gamma: Real) -> Result<Self, SolverError> {
        if !(c > 0.0) {
            return Err(SolverError::Config(format!("c must be positive, got {c}")));
        }
        if !(gamma >= 1.0) {
            return Err(SolverError::Config(format!("gamma must be >= 1, got {gamma}")));
        }
        Ok(Self { c, gamma })
    }

    pub fn isothermal(&self) -> bool {
        self.gamma == 1.0
    }

    pub fn pressure<S: Scalar>(&self, rho: S) -> S {
        let p = if self.isothermal() { rho } else { rho.powf(self.gamma) };
        S::from_f64(self.c) * p
    }

    /// Inverse law; `None` for negative pressure.
    pub fn density(&self, p: Real) -> Option<Real> {
        if p < 0.0 {
            None
        } else if self.isothermal() {
            Some(p / self.c)
        } else {
            Some((p / self.c).powf(1.0 / self.gamma))
        }
    }

    /// Elementwise pressure of a density vector.
    pub fn pressures(&self, rho: &[Real]) -> Result<Vec<Real>, FeError> {
        rho.iter()
            .enumerate()
            .map(|(index, &value)| {
                if value < 0.0 {
                    Err(FeError::NegativeDensity { index, value })
                } else {
                    Ok(self.pressure(value))
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    ConvergenceStudy,
    IncompressibilityLimit,
    WellBalanced,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::ConvergenceStudy => "convergence",
            Family::IncompressibilityLimit => "limit",
            Family::WellBalanced => "wellbalanced",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "convergence" => Ok(Family::ConvergenceStudy),
            "limit" => Ok(Family::IncompressibilityLimit),
            "wellbalanced" => Ok(Family::WellBalanced),
            _ => Err(format!("unknown family '{s}' (convergence, limit, wellbalanced)")),
        }
    }
}

/// Volume forces of the momentum balance `-div(sigma) + grad(p) = f + rho g`.
pub trait Forcing: Sync {
    fn f(&self, p: Point) -> [Real; 2];
    fn g(&self, p: Point) -> [Real; 2];
}

/// Forcing given by two closures.
pub struct FnForcing<F, G> {
    pub f: F,
    pub g: G,
}

impl<F, G> Forcing for FnForcing<F, G>
where
    F: Fn(Point) -> [Real; 2] + Sync,
    G: Fn(Point) -> [Real; 2] + Sync,
{
    fn f(&self, p: Point) -> [Real; 2] {
        (self.f)(p)
    }
    fn g(&self, p: Point) -> [Real; 2] {
        (self.g)(p)
    }
}

/// `f = grad(q)`, `g = 0` for a scalar potential `q`.
pub struct GradientForcing<Q>(pub Q);

impl<Q: ScalarField + Sync> Forcing for GradientForcing<Q> {
    fn f(&self, p: Point) -> [Real; 2] {
        self.0.gradient(p)
    }
    fn g(&self, _: Point) -> [Real; 2] {
        [0.0, 0.0]
    }
}

/// `psi = x^2 (x-1)^2 y^2 (y-1)^2`.
fn stream<S: Scalar>(x: S, y: S) -> S {
    let one = S::one();
    let a = x * (x - one) * y * (y - one);
    a * a
}

/// A manufactured solution together with the parameters it was built for.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Problem {
    pub family: Family,
    pub mu: Real,
    pub lambda: Real,
    pub eos: EquationOfState,
    /// Prescribed total mass.
    pub mass: Real,
}

impl Problem {
    /// `u = curl(psi) / rho`, `rho = 1 + (y - 1/2)/c`, `g = 0`; `lambda`
    /// defaults to `-2 mu / 3`.
    pub fn convergence(mu: Real, lambda: Option<Real>, c: Real, gamma: Real) -> Result<Self, SolverError> {
        if !(c > 0.5) {
            return Err(SolverError::Config(format!(
                "convergence family needs c > 1/2 for a positive density, got {c}"
            )));
        }
        Self::checked(Family::ConvergenceStudy, mu, lambda.unwrap_or(-2.0 * mu / 3.0), c, gamma)
    }

    /// `u = 0`, `f = 0`, `g = gamma rho^(gamma-2) (0, 1)`, `mu = 1`, `lambda = -2/3`.
    pub fn limit(c: Real, gamma: Real) -> Result<Self, SolverError> {
        if !(c >= 1.0) {
            return Err(SolverError::Config(format!("limit family needs c >= 1, got {c}")));
        }
        Self::checked(Family::IncompressibilityLimit, 1.0, -2.0 / 3.0, c, gamma)
    }

    /// `u = 0`, `f = gamma rho^(gamma-1) (0, 1)`, `g = 0`, `mu = 1`, `lambda = -2/3`.
    pub fn wellbalanced(c: Real, gamma: Real) -> Result<Self, SolverError> {
        if !(c >= 1.0) {
            return Err(SolverError::Config(format!("well-balanced family needs c >= 1, got {c}")));
        }
        Self::checked(Family::WellBalanced, 1.0, -2.0 / 3.0, c, gamma)
    }

    fn checked(family: Family, mu: Real, lambda: Real, c: Real, gamma: Real) -> Result<Self, SolverError> {
        if !(mu > 0.0) {
            return Err(SolverError::Config(format!("mu must be positive, got {mu}")));
        }
        if !(lambda > -2.0 * mu) {
            return Err(SolverError::Config(format!("lambda must exceed -2 mu, got {lambda}")));
        }
        Ok(Self {
            family,
            mu,
            lambda,
            eos: EquationOfState::new(c, gamma)?,
            mass: 1.0,
        })
    }

    pub fn density_at<S: Scalar>(&self, _x: S, y: S) -> S {
        S::one() + (y - S::from_f64(0.5)) / S::from_f64(self.eos.c)
    }

    pub fn velocity_at<S: Scalar>(&self, x: S, y: S) -> [S; 2] {
        match self.family {
            Family::ConvergenceStudy => {
                let dx = stream(Dual::var(x), Dual::cst(y)).eps;
                let dy = stream(Dual::cst(x), Dual::var(y)).eps;
                let rho = self.density_at(x, y);
                [dy / rho, -dx / rho]
            }
            _ => [S::zero(), S::zero()],
        }
    }

    pub fn pressure_at<S: Scalar>(&self, x: S, y: S) -> S {
        self.eos.pressure(self.density_at(x, y))
    }

    pub fn density(&self, p: Point) -> Real {
        self.density_at(p[0], p[1])
    }

    pub fn pressure(&self, p: Point) -> Real {
        self.pressure_at(p[0], p[1])
    }

    pub fn velocity(&self, p: Point) -> [Real; 2] {
        self.velocity_at(p[0], p[1])
    }

    /// `grad[c][d] = d u_c / d x_d`.
    pub fn velocity_gradient(&self, p: Point) -> [[Real; 2]; 2] {
        let ux = self.velocity_at(Dual::var(p[0]), Dual::cst(p[1]));
        let uy = self.velocity_at(Dual::cst(p[0]), Dual::var(p[1]));
        [[ux[0].eps, uy[0].eps], [ux[1].eps, uy[1].eps]]
    }

    pub fn pressure_gradient(&self, p: Point) -> [Real; 2] {
        [
            self.pressure_at(Dual::var(p[0]), Dual::cst(p[1])).eps,
            self.pressure_at(Dual::cst(p[0]), Dual::var(p[1])).eps,
        ]
    }

    /// `div(sigma(u))` with `sigma = 2 mu eps(u) + lambda div(u) I`, by
    /// nested dual numbers.
    pub fn stress_divergence(&self, p: Point) -> [Real; 2] {
        // hess[c][a][b] = d^2 u_c / dx_a dx_b
        let mut hess = [[[0.0; 2]; 2]; 2];
        for a in 0..2 {
            for b in a..2 {
                let (x, y) = hyper_seed(p, a, b);
                let u = self.velocity_at(x, y);
                for c in 0..2 {
                    hess[c][a][b] = u[c].eps.eps;
                    hess[c][b][a] = u[c].eps.eps;
                }
            }
        }
        let mut out = [0.0; 2];
        for (c, o) in out.iter_mut().enumerate() {
            let laplace = hess[c][0][0] + hess[c][1][1];
            let grad_div = hess[0][c][0] + hess[1][c][1];
            *o = self.mu * laplace + (self.mu + self.lambda) * grad_div;
        }
        out
    }

    /// `-div(sigma) + grad(p) - f - rho g`; zero for a consistent family.
    pub fn pde_residual(&self, p: Point) -> [Real; 2] {
        let ds = self.stress_divergence(p);
        let gp = self.pressure_gradient(p);
        let f = self.f(p);
        let g = self.g(p);
        let rho = self.density(p);
        [
            -ds[0] + gp[0] - f[0] - rho * g[0],
            -ds[1] + gp[1] - f[1] - rho * g[1],
        ]
    }
}

impl Forcing for Problem {
    fn f(&self, p: Point) -> [Real; 2] {
        let gamma = self.eos.gamma;
        match self.family {
            Family::ConvergenceStudy => {
                let ds = self.stress_divergence(p);
                let gp = self.pressure_gradient(p);
                [gp[0] - ds[0], gp[1] - ds[1]]
            }
            Family::IncompressibilityLimit => [0.0, 0.0],
            Family::WellBalanced => [0.0, gamma * self.density(p).powf(gamma - 1.0)],
        }
    }

    fn g(&self, p: Point) -> [Real; 2] {
        let gamma = self.eos.gamma;
        match self.family {
            Family::IncompressibilityLimit => [0.0, gamma * self.density(p).powf(gamma - 2.0)],
            _ => [0.0, 0.0],
        }
    }
}
