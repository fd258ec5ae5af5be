//! Translation-invariant two-body couplings J(|x|) of the generalized Ising
//! chain, their summability norms, and the Lieb–Robinson velocity.
//!
//! Norm convention: the norm of the pair interaction between the origin and
//! site x is taken to be |J(|x|)|. Sums run over x ∈ ℤ \ {0}, so each
//! distance is counted twice.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::special::riemann_zeta;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InteractionError {
    #[error("exponential model needs xi > 1, got {0}")]
    InvalidXi(f64),
    #[error("Dyson model needs alpha > 1, got {0}")]
    InvalidAlpha(f64),
    #[error("coupling table entry at distance 0 is not allowed (J(0) = 0)")]
    TableAtOrigin,
    #[error("coupling table value at distance {distance} is not finite")]
    TableNotFinite { distance: u64 },
    #[error("coupling scale must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("lambda must be positive, got {0} (use stability_norm for the lambda = 0 limit)")]
    NonPositiveLambda(f64),
}

/// Functional form of J(|x|).
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingKind {
    /// J(|x|) = −ξ^{−|x|}.
    Exponential { xi: f64 },
    /// J(|x|) = −|x|^{−α}.
    Dyson { alpha: f64 },
    /// Finitely supported J, given per positive distance.
    Table(BTreeMap<u64, f64>),
}

/// A coupling J(|x|) multiplied by a positive strength.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingModel {
    kind: CouplingKind,
    scale: f64,
}

impl CouplingModel {
    pub fn exponential(xi: f64) -> Result<Self, InteractionError> {
        if !(xi > 1.0 && xi.is_finite()) {
            return Err(InteractionError::InvalidXi(xi));
        }
        Ok(Self {
            kind: CouplingKind::Exponential { xi },
            scale: 1.0,
        })
    }

    pub fn dyson(alpha: f64) -> Result<Self, InteractionError> {
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(InteractionError::InvalidAlpha(alpha));
        }
        Ok(Self {
            kind: CouplingKind::Dyson { alpha },
            scale: 1.0,
        })
    }

    pub fn table<I>(entries: I) -> Result<Self, InteractionError>
    where
        I: IntoIterator<Item = (u64, f64)>,
    {
        let mut map = BTreeMap::new();
        for (distance, value) in entries {
            if distance == 0 {
                return Err(InteractionError::TableAtOrigin);
            }
            if !value.is_finite() {
                return Err(InteractionError::TableNotFinite { distance });
            }
            if value != 0.0 {
                map.insert(distance, value);
            }
        }
        Ok(Self {
            kind: CouplingKind::Table(map),
            scale: 1.0,
        })
    }

    /// The non-interacting chain.
    pub fn zero() -> Self {
        Self {
            kind: CouplingKind::Table(BTreeMap::new()),
            scale: 1.0,
        }
    }

    /// Multiplies J by `factor > 0`.
    pub fn scaled(mut self, factor: f64) -> Result<Self, InteractionError> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(InteractionError::InvalidScale(factor));
        }
        self.scale *= factor;
        Ok(self)
    }

    pub fn kind(&self) -> &CouplingKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_dyson(&self) -> bool {
        matches!(self.kind, CouplingKind::Dyson { .. })
    }

    /// J(|x|); zero at the origin.
    pub fn coupling_at(&self, x: i64) -> f64 {
        let d = x.unsigned_abs();
        if d == 0 {
            return 0.0;
        }
        match &self.kind {
            CouplingKind::Exponential { xi } => -self.scale * xi.powf(-(d as f64)),
            CouplingKind::Dyson { alpha } => -self.scale * (d as f64).powf(-alpha),
            CouplingKind::Table(map) => self.scale * map.get(&d).copied().unwrap_or(0.0),
        }
    }

    /// ε(d) = |J(d)|.
    pub fn magnitude(&self, distance: u64) -> f64 {
        self.coupling_at(distance as i64).abs()
    }

    /// Largest distance with nonzero coupling, if the support is finite.
    pub fn support(&self) -> Option<u64> {
        match &self.kind {
            CouplingKind::Table(map) => Some(map.keys().next_back().copied().unwrap_or(0)),
            _ => None,
        }
    }

    /// Σ_{x≠0} |J(|x|)|.
    pub fn stability_norm(&self) -> f64 {
        match &self.kind {
            CouplingKind::Exponential { xi } => 2.0 * self.scale / (xi - 1.0),
            CouplingKind::Dyson { alpha } => 2.0 * self.scale * riemann_zeta(*alpha).value,
            CouplingKind::Table(map) => {
                2.0 * self.scale * map.values().map(|v| v.abs()).sum::<f64>()
            }
        }
    }

    /// Supremum of the λ for which the exponential moment converges.
    pub fn lambda_max(&self) -> f64 {
        match &self.kind {
            CouplingKind::Exponential { xi } => xi.ln(),
            CouplingKind::Dyson { .. } => 0.0,
            CouplingKind::Table(_) => f64::INFINITY,
        }
    }

    /// ‖Φ‖_λ = Σ_{x≠0} |J(|x|)| e^{λ|x|}.
    pub fn lambda_norm(&self, lambda: f64) -> Result<LambdaNorm, InteractionError> {
        if !(lambda > 0.0) {
            return Err(InteractionError::NonPositiveLambda(lambda));
        }
        let value = match &self.kind {
            CouplingKind::Exponential { xi } => {
                let q = (lambda - xi.ln()).exp();
                if q < 1.0 {
                    NormValue::Finite(2.0 * self.scale * q / (1.0 - q))
                } else {
                    NormValue::Divergent
                }
            }
            CouplingKind::Dyson { .. } => NormValue::Divergent,
            CouplingKind::Table(map) => {
                let s: f64 = map
                    .iter()
                    .map(|(&d, v)| v.abs() * (lambda * d as f64).exp())
                    .sum();
                if s.is_finite() {
                    NormValue::Finite(2.0 * self.scale * s)
                } else {
                    NormValue::Divergent
                }
            }
        };
        Ok(LambdaNorm { lambda, value })
    }

    /// g(λ) = 2‖Φ‖_λ / λ, or `None` outside the convergence region.
    pub fn velocity_objective(&self, lambda: f64) -> Option<f64> {
        match self.lambda_norm(lambda).ok()?.value {
            NormValue::Finite(v) => Some(2.0 * v / lambda),
            NormValue::Divergent => None,
        }
    }

    /// v_Φ = inf_λ 2‖Φ‖_λ/λ, by golden-section search in ln λ down to a
    /// relative bracket width of 1e-10.
    pub fn lr_velocity(&self) -> Velocity {
        let lambda_max = match &self.kind {
            CouplingKind::Dyson { .. } => return Velocity::Divergent,
            CouplingKind::Exponential { xi } => xi.ln(),
            CouplingKind::Table(map) => match map.keys().next_back() {
                None => {
                    return Velocity::Finite(VelocityResult {
                        lambda_star: f64::INFINITY,
                        velocity: 0.0,
                        bracket: (f64::INFINITY, f64::INFINITY),
                    })
                }
                // keep e^{λ d} far from overflow
                Some(&d) => 600.0 / d as f64,
            },
        };
        let objective = |log_lambda: f64| {
            self.velocity_objective(log_lambda.exp())
                .unwrap_or(f64::INFINITY)
        };
        let lo = (lambda_max * 1e-12).ln();
        let hi = (lambda_max * (1.0 - 1e-12)).ln();
        let (a, b) = golden_section(objective, lo, hi, 1e-10);
        let lambda_star = (0.5 * (a + b)).exp();
        Velocity::Finite(VelocityResult {
            lambda_star,
            velocity: self
                .velocity_objective(lambda_star)
                .expect("minimizer lies inside the convergence region"),
            bracket: (a.exp(), b.exp()),
        })
    }
}

/// Outcome of a λ-norm evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormValue {
    Finite(f64),
    Divergent,
}

impl NormValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            NormValue::Finite(v) => Some(v),
            NormValue::Divergent => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaNorm {
    pub lambda: f64,
    pub value: NormValue,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityResult {
    /// Minimizing λ.
    pub lambda_star: f64,
    pub velocity: f64,
    /// Final golden-section interval in λ; contains `lambda_star`.
    pub bracket: (f64, f64),
}

/// Lieb–Robinson velocity, or the marker that the coupling has no
/// exponential moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Velocity {
    Finite(VelocityResult),
    Divergent,
}

impl Velocity {
    pub fn finite(self) -> Option<VelocityResult> {
        match self {
            Velocity::Finite(v) => Some(v),
            Velocity::Divergent => None,
        }
    }
}

/// Golden-section minimization of a unimodal function on [lo, hi]; returns
/// the final bracket once its width is below `tol`.
pub fn golden_section<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..500 {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    (lo, hi)
}
