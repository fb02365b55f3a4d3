//! Physical parameters and the two reparametrizations of the frequency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bottom of the spectrum of `-Δ + x₁² + x₂²`, i.e. the lowest eigenvalue of
/// the two-dimensional oscillator `-Δ_y + |y|²`.
pub const LAMBDA0: f64 = 2.0;

/// Exponent of the power nonlinearity `|u|^{p-2}u` and the frequency `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    p: f64,
    lambda: f64,
}

impl ModelParams {
    pub fn new(p: f64, lambda: f64) -> Result<Self> {
        if !(p > 2.0 && p < 6.0) {
            return Err(Error::InvalidParams(format!("p = {p} outside (2, 6)")));
        }
        if !lambda.is_finite() || lambda >= LAMBDA0 {
            return Err(Error::InvalidParams(format!("lambda = {lambda} must be finite and below {LAMBDA0}")));
        }
        Ok(Self { p, lambda })
    }

    /// Parameters at distance `tau` below the bottom of the spectrum.
    pub fn from_tau(p: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidParams(format!("tau = {tau} must be positive")));
        }
        Self::new(p, LAMBDA0 - tau)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `μ = 1/λ²`, defined on the negative side only.
    pub fn mu(&self) -> Option<f64> {
        (self.lambda < 0.0).then(|| 1.0 / (self.lambda * self.lambda))
    }

    /// `τ = Λ₀ − λ`, always positive.
    pub fn tau(&self) -> f64 {
        LAMBDA0 - self.lambda
    }

    /// Amplitude exponent `1/(p-2)` shared by both scaling maps.
    pub fn amplitude_exponent(&self) -> f64 {
        1.0 / (self.p - 2.0)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.p, lambda)
    }
}

/// The `(μ, τ)` pair; `μ` is absent for `λ ≥ 0`.
pub fn reparametrize(params: &ModelParams) -> (Option<f64>, f64) {
    (params.mu(), params.tau())
}
