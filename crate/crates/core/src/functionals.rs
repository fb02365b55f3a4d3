//! Norms, actions, Nehari residuals and gradients.
//!
//! All quadratic quantities are evaluated in coefficient space and the
//! `L^p` integral by nodal quadrature on the same grid, so gradients are the
//! exact derivatives of the discrete actions.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretization::radial_matmul;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::params::{ModelParams, LAMBDA0};

/// The separate quadratic pieces of a field and its `L^p` integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// `∫|u|²`
    pub mass: f64,
    /// `∫|∇_y u|²`
    pub grad_y: f64,
    /// `∫|∂_z u|²`
    pub grad_z: f64,
    /// `∫|y|²|u|²`
    pub r2: f64,
    /// `∫|u|^p`
    pub lp: f64,
}

impl Moments {
    pub fn of(u: &Field, p: f64) -> Moments {
        let g = u.grid();
        let c = u.coeffs();
        let r2c = radial_matmul(g.r2_matrix(), &c.view());
        let mut mass = 0.0;
        let mut lap_y = 0.0;
        let mut grad_z = 0.0;
        let mut r2 = 0.0;
        for ((k, m), v) in c.indexed_iter() {
            let n = v.norm_sqr();
            let xi = g.xi(m);
            mass += n;
            lap_y += g.eigenvalues()[k] * n;
            grad_z += xi * xi * n;
            r2 += (v.conj() * r2c[[k, m]]).re;
        }
        Moments {
            mass,
            // eigenvalues are those of -Δ_y + ω²|y|²
            grad_y: lap_y - g.trap() * r2,
            grad_z,
            r2,
            lp: lp_integral(u, p),
        }
    }
}

/// `∫|u|^p` by nodal quadrature.
pub fn lp_integral(u: &Field, p: f64) -> f64 {
    let g = u.grid();
    let dz = g.dz();
    u.nodes().rows().into_iter().zip(g.radial_weights()).map(|(row, &w)| w * dz * row.iter().map(|z| z.norm().powf(p)).sum::<f64>()).sum()
}

/// `|u|^{p-2} u` at the nodes, as a field of the same kind.
pub fn nonlinearity(u: &Field, p: f64) -> Field {
    u.map_nodes_indexed(|_, _, z| {
        let a = z.norm();
        if a == 0.0 {
            z
        } else {
            z * a.powf(p - 2.0)
        }
    })
}

/// Stationary equation `A w = |w|^{p-2} w` with
/// `A = a(-Δ_y + ω²|y|²) + b(-∂_zz) + c` on the grid of the field.
///
/// The three pictures share this form: the original problem at λ
/// (`a = b = 1`, `c = -λ`, unit trap), the far-field rescaling (`a = b = c = 1`,
/// trap μ), and the near-threshold rescaling (`a = 1/τ`, `b = 1`,
/// `c = 1 - Λ₀/τ`, unit trap).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equation {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub p: f64,
}

impl Equation {
    pub fn u_picture(params: &ModelParams) -> Equation {
        Equation { a: 1.0, b: 1.0, c: -params.lambda(), p: params.p() }
    }

    /// Equation for `v`; the grid must carry trap coefficient μ.
    pub fn v_picture(p: f64) -> Equation {
        Equation { a: 1.0, b: 1.0, c: 1.0, p }
    }

    pub fn w_picture(params: &ModelParams) -> Equation {
        let tau = params.tau();
        Equation { a: 1.0 / tau, b: 1.0, c: 1.0 - LAMBDA0 / tau, p: params.p() }
    }

    /// `⟨u, A u⟩`, the squared norm of the picture.
    pub fn quadratic(&self, u: &Field) -> f64 {
        let g = u.grid();
        u.coeffs()
            .indexed_iter()
            .map(|((k, m), v)| {
                let xi = g.xi(m);
                (self.a * g.eigenvalues()[k] + self.b * xi * xi + self.c) * v.norm_sqr()
            })
            .sum()
    }

    pub fn action(&self, u: &Field) -> f64 {
        0.5 * self.quadratic(u) - lp_integral(u, self.p) / self.p
    }

    /// `⟨u, A u⟩ − ∫|u|^p`.
    pub fn nehari_residual(&self, u: &Field) -> f64 {
        self.quadratic(u) - lp_integral(u, self.p)
    }

    /// `A u − |u|^{p-2} u`.
    pub fn gradient(&self, u: &Field) -> Field {
        u.apply_linear(self.a, self.b, self.c).sub(&nonlinearity(u, self.p)).expect("same grid")
    }

    pub fn apply(&self, u: &Field) -> Field {
        u.apply_linear(self.a, self.b, self.c)
    }

    pub fn solve(&self, f: &Field) -> Result<Field> {
        f.solve_linear(self.a, self.b, self.c)
    }

    /// Diagonal of `A` in coefficient space.
    pub fn multiplier(&self, u: &Field) -> Array2<f64> {
        u.grid().multiplier(self.a, self.b, self.c)
    }

    /// The unique `t > 0` with `t u` on the Nehari manifold.
    pub fn nehari_scale(&self, u: &Field) -> Result<f64> {
        let q = self.quadratic(u);
        let l = lp_integral(u, self.p);
        if l == 0.0 || u.l2_norm_sq() == 0.0 {
            return Err(Error::ZeroField);
        }
        if !(q > 0.0) {
            return Err(Error::InvalidParams(format!("quadratic form {q:.3e} is not positive on the field")));
        }
        Ok((q / l).powf(1.0 / (self.p - 2.0)))
    }

    /// `d/dt J(t u)` for the sign test along rays.
    pub fn ray_derivative(&self, u: &Field, t: f64) -> f64 {
        t * self.quadratic(u) - t.powf(self.p - 1.0) * lp_integral(u, self.p)
    }
}

/// Scalar diagnostics of a real field for the original problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub l2_mass: f64,
    pub h1_norm_sq: f64,
    pub h_norm_sq: f64,
    pub lambda_norm_sq: f64,
    pub lp_integral: f64,
    pub action: f64,
    pub nehari_residual: f64,
}

impl FunctionalReport {
    pub fn from_moments(m: &Moments, params: &ModelParams) -> FunctionalReport {
        let grad = m.grad_y + m.grad_z;
        let lambda_norm_sq = grad + m.r2 - params.lambda() * m.mass;
        FunctionalReport {
            l2_mass: m.mass,
            h1_norm_sq: grad + m.mass,
            h_norm_sq: grad + m.r2 + m.mass,
            lambda_norm_sq,
            lp_integral: m.lp,
            action: 0.5 * lambda_norm_sq - m.lp / params.p(),
            nehari_residual: lambda_norm_sq - m.lp,
        }
    }
}

pub fn report(u: &Field, params: &ModelParams) -> FunctionalReport {
    FunctionalReport::from_moments(&Moments::of(u, params.p()), params)
}

/// `∇J_λ(u) = (−Δ + |y|² − λ) u − |u|^{p−2} u`.
pub fn gradient(u: &Field, params: &ModelParams) -> Field {
    Equation::u_picture(params).gradient(u)
}

/// `J̃_μ(v) = ½∫(|∇v|² + μ|y|²v² + v²) − (1/p)∫|v|^p`.
pub fn action_v(v: &Field, mu: f64, p: f64) -> f64 {
    let m = Moments::of(v, p);
    0.5 * (m.grad_y + m.grad_z + mu * m.r2 + m.mass) - m.lp / p
}

/// `Ĵ_τ(w) = ½∫((1/τ)(|∇_y w|² + |y|²w² − Λ₀w²) + |∂_z w|² + w²) − (1/p)∫|w|^p`.
pub fn action_w(w: &Field, tau: f64, p: f64) -> f64 {
    let m = Moments::of(w, p);
    0.5 * ((m.grad_y + m.r2 - LAMBDA0 * m.mass) / tau + m.grad_z + m.mass) - m.lp / p
}

/// Actions of the rescaled problems on already transformed fields `v` and `w`.
pub fn scaled_actions(v: &Field, w: &Field, params: &ModelParams) -> (Option<f64>, f64) {
    let p = params.p();
    (params.mu().map(|mu| action_v(v, mu, p)), action_w(w, params.tau(), p))
}

/// Derivative of `s ↦ J_λ(u(y, z/s))` at `s = 1`:
/// `½(∫|∇_y u|² + ∫|y|²u² − λ∫u²) − ½∫|∂_z u|² − (1/p)∫|u|^p`.
/// Vanishes on solutions.
pub fn pohozaev_residual(u: &Field, params: &ModelParams) -> f64 {
    let m = Moments::of(u, params.p());
    0.5 * (m.grad_y + m.r2 - params.lambda() * m.mass) - 0.5 * m.grad_z - m.lp / params.p()
}

/// `‖u‖² = ∫(|∇u|² + (|y|² + 1)|u|²)`, the norm of the trapped energy space.
pub fn h_norm_sq(u: &Field) -> f64 {
    let m = Moments::of(u, 2.0);
    m.grad_y + m.grad_z + m.r2 + m.mass
}

/// `∫(|∇u|² + |u|²)`.
pub fn h1_norm_sq(u: &Field) -> f64 {
    let m = Moments::of(u, 2.0);
    m.grad_y + m.grad_z + m.mass
}

/// Real part of the coefficient-space pairing.
pub fn pairing(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::Discretization;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn gaussian_closed_forms() {
        let g = Arc::new(Discretization::build(16, 64, 8.0).unwrap());
        let u = Field::from_fn(g, |r, z| (-(r * r + z * z) / 2.0).exp());
        let params = ModelParams::new(4.0, 0.0).unwrap();
        let rep = report(&u, &params);
        assert!((rep.lambda_norm_sq - 2.5 * PI.powf(1.5)).abs() < 1e-10);
        assert!((rep.lp_integral - (PI / 2.0).powf(1.5)).abs() < 1e-10);
        assert_eq!(rep.action, 0.5 * rep.lambda_norm_sq - rep.lp_integral / 4.0);
        let zero = report(&u.scale(0.0), &params);
        assert_eq!(zero.l2_mass, 0.0);
        assert_eq!(zero.action, 0.0);
        assert_eq!(pohozaev_residual(&u.scale(0.0), &params), 0.0);
    }

    #[test]
    fn gaussian_nehari_scale() {
        let g = Arc::new(Discretization::build(16, 64, 8.0).unwrap());
        let u = Field::from_fn(g, |r, z| (-(r * r + z * z) / 2.0).exp());
        let eq = Equation::u_picture(&ModelParams::new(4.0, 0.0).unwrap());
        let t = eq.nehari_scale(&u).unwrap();
        assert!((t - (5.0 * 2f64.sqrt()).sqrt()).abs() < 1e-8);
        let on = u.scale(t);
        assert!((eq.nehari_scale(&on).unwrap() - 1.0).abs() < 1e-12);
        assert!(eq.nehari_residual(&on).abs() < 1e-10 * eq.quadratic(&on));
    }
}
