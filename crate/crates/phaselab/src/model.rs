//! Model algebra: pointwise terms of the evolution system, integral energy and
//! entropy functionals, a-priori estimate constants, and the dimensional
//! coefficients of the sharp-interface relations.
//!
//! The evolution system in runtime form is
//!
//! ```text
//! α̂ ∂tφ = ε²Δφ − W′(φ) + γ ν′(φ) T
//! β̂ ∂tT = δ ΔT − γ (T + θ) ∂tν(φ) + α̂ (∂tφ)²
//! ```
//!
//! Everything here is deterministic arithmetic on the current state; no stepping.

use crate::field::{phi_grad_sq, phi_laplacian, FieldState, Grid};
use crate::params::{HatParams, PhysicalParams};
use crate::potential::Potential;
use crate::{Error, Result};

/// Variational driving force μ_G = W′(φ) − γ ν′(φ) T − ε² Δφ.
///
/// The order-parameter equation is α̂ ∂tφ = −μ_G; stationary profiles satisfy
/// μ_G = 0. `lap_phi` is the (discrete or analytic) Laplacian at the same point.
pub fn mu_g(pot: &dyn Potential, h: &HatParams, phi: f64, temp: f64, lap_phi: f64) -> f64 {
    pot.w_prime(phi) - h.gamma * pot.nu_prime(phi) * temp - h.eps * h.eps * lap_phi
}

/// Dissipative heat source F = G·∂tφ with G = ε²Δφ − W′(φ), expanded as
/// F = (G² + γ G ν′(φ) T)/α̂.
///
/// Equivalently F = α̂(∂tφ)² − γ ν′(φ) T ∂tφ: the full temperature equation
/// β̂∂tT + γθ∂tν = δΔT + F collects the frictional heating and the
/// temperature-proportional part of the latent release into this one term.
pub fn source_f(pot: &dyn Potential, h: &HatParams, phi: f64, temp: f64, lap_phi: f64) -> f64 {
    let g = h.eps * h.eps * lap_phi - pot.w_prime(phi);
    (g * g + h.gamma * g * pot.nu_prime(phi) * temp) / h.alpha_hat
}

/// Temperature-dependent latent-heat factor (T + θ)/θ = 1 + T/θ.
///
/// Multiplies the equilibrium release rate γθ in front of ∂tν; it must stay
/// positive (absolute temperature T + θ > 0) for the model to make sense.
pub fn latent_heat(h: &HatParams, temp: f64) -> Result<f64> {
    let absolute = temp + h.theta;
    if !(absolute > 0.0) {
        return Err(Error::domain(format!(
            "absolute temperature T + θ = {absolute} must be positive (T = {temp}, θ = {})",
            h.theta
        )));
    }
    Ok(1.0 + temp / h.theta)
}

/// Integral functionals of one state. Field names match the diagnostics CSV
/// columns `E`, `E0`, `E1`, `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    /// Conserved total energy E = ∫ T + β[W(φ) + γθ ν(φ) + ½ε²|∇φ|²] with β = 1/β̂.
    /// Insulated runs hold it fixed up to discretization drift; in general
    /// dE/dt = (δ/β̂) ∮ ∂T/∂n.
    pub total: f64,
    /// Quadratic energy E0 = ∫ (β̂/2θ) T² + W(φ) + ½ε²|∇φ|², the Lyapunov
    /// functional of the reduced (quadratic-heating-free) system.
    pub quadratic: f64,
    /// Augmented energy E1 = E0 + ε²δα̂/(2μθ) ∫ |Δφ|² with μ = γ²·sup|ν′|²;
    /// infinite when the interpolant degenerates (sup|ν′| = 0).
    pub augmented: f64,
    /// Entropy S = ∫ βγ ν(φ) + ln(T + θ), nondecreasing in insulated runs.
    pub entropy: f64,
}

impl EnergyReport {
    /// E1* = max(1, E1), the clamped augmented energy driving the a-priori bound.
    pub fn e1_star(&self) -> f64 {
        self.augmented.max(1.0)
    }
}

/// Evaluate every functional of [`EnergyReport`] on one state.
///
/// Gradient and Laplacian terms use the cell-centered central-difference
/// operators of [`crate::field`] with the reflection ghosts of φ. Fails when
/// T + θ ≤ 0 anywhere, since the entropy density is undefined there.
pub fn energy_report(
    grid: &Grid,
    state: &FieldState,
    pot: &dyn Potential,
    h: &HatParams,
) -> Result<EnergyReport> {
    state.check_shape(grid)?;
    h.validate()?;
    let grad2 = phi_grad_sq(grid, &state.phi);
    let lap = phi_laplacian(grid, &state.phi);
    let beta = h.beta();
    let eps2 = h.eps * h.eps;
    let half_t2_coeff = h.beta_hat / (2.0 * h.theta);

    let mut e_sum = 0.0;
    let mut e0_sum = 0.0;
    let mut lap2_sum = 0.0;
    let mut s_sum = 0.0;
    for i in 0..grid.cell_count() {
        let phi = state.phi[i];
        let temp = state.temp[i];
        let w = pot.w(phi);
        let nu = pot.nu(phi);
        let grad_term = 0.5 * eps2 * grad2[i];
        e_sum += temp + beta * (w + h.gamma * h.theta * nu + grad_term);
        e0_sum += half_t2_coeff * temp * temp + w + grad_term;
        lap2_sum += lap[i] * lap[i];
        let absolute = temp + h.theta;
        if !(absolute > 0.0) {
            return Err(Error::domain(format!(
                "entropy undefined: T + θ = {absolute} ≤ 0 at cell {i}"
            )));
        }
        s_sum += beta * h.gamma * nu + absolute.ln();
    }
    let vol = grid.cell_volume();
    let sups = pot.sup_norms();
    let mu = h.gamma * h.gamma * sups.nu_prime * sups.nu_prime;
    let quadratic = e0_sum * vol;
    let augmented = if mu > 0.0 {
        quadratic + 0.5 * eps2 * h.delta * h.alpha_hat / (mu * h.theta) * lap2_sum * vol
    } else {
        f64::INFINITY
    };
    Ok(EnergyReport {
        total: e_sum * vol,
        quadratic,
        augmented,
        entropy: s_sum * vol,
    })
}

/// Constants of the a-priori differential inequality
///
/// ```text
/// d/dt E1*(t) ≤ A·E1* + D·(B + E1*)³ + C,      E1* = max(1, E1),
/// ```
///
/// computed from the runtime chart, the derivative sup-norms of the potential
/// family, and the L²/H¹ norms of the boundary lifting T̃. The intermediate
/// groups (`a0`, `b0`, `c0`, `d0`) isolate the lifting-free cores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateConstants {
    /// Coupling strength μ = γ²·sup|ν′|².
    pub mu: f64,
    /// Stiffness ω = sup|W″|².
    pub omega: f64,
    /// Interpolant distortion ι = (sup|ν″| / sup|ν′|)².
    pub iota: f64,
    pub a0: f64,
    pub b0: f64,
    pub c0: f64,
    pub d0: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// True when sup|ν′| = 0: the coupling degenerates and the inequality gives
    /// no control (the μ-weighted constants are infinite, t*₁ = 0).
    pub degenerate: bool,
}

impl EstimateConstants {
    /// Guaranteed existence horizon t*₁ = 1 / (D · max(1, E1(0))²) extracted from
    /// the cubic inequality.
    pub fn t_star_1(&self, e1_initial: f64) -> f64 {
        1.0 / (self.d * e1_initial.max(1.0).powi(2))
    }
}

/// Evaluate [`EstimateConstants`] for one chart, potential family, and lifting.
///
/// `t_tilde_l2` and `t_tilde_h1` are ‖T̃‖_{L²} and ‖T̃‖_{H¹} of the stationary
/// boundary lifting (zero for homogeneous data).
pub fn estimate_constants(
    h: &HatParams,
    pot: &dyn Potential,
    t_tilde_l2: f64,
    t_tilde_h1: f64,
) -> Result<EstimateConstants> {
    h.validate()?;
    for (v, name) in [(t_tilde_l2, "t_tilde_l2"), (t_tilde_h1, "t_tilde_h1")] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::domain(format!(
                "lifting norm `{name}` must be finite and nonnegative, got {v}"
            )));
        }
    }
    if t_tilde_h1 < t_tilde_l2 {
        return Err(Error::domain(format!(
            "H¹ lifting norm ({t_tilde_h1}) cannot be smaller than the L² norm ({t_tilde_l2})"
        )));
    }

    let sups = pot.sup_norms();
    let (alpha, beta) = (h.alpha(), h.beta());
    let (gamma, delta, eps, theta) = (h.gamma, h.delta, h.eps, h.theta);
    let mu = gamma * gamma * sups.nu_prime * sups.nu_prime;
    let omega = sups.w_second * sups.w_second;
    let w1 = sups.w_prime;
    let l2_sq = t_tilde_l2 * t_tilde_l2;
    let h1_sq = t_tilde_h1 * t_tilde_h1;

    let b0 = h.beta_hat * l2_sq / theta;
    let c0 = (mu * alpha + delta / theta) * h1_sq;

    if sups.nu_prime == 0.0 {
        // No coupling: every μ-weighted constant blows up and the bound is void.
        return Ok(EstimateConstants {
            mu: 0.0,
            omega,
            iota: f64::INFINITY,
            a0: f64::INFINITY,
            b0,
            c0,
            d0: f64::INFINITY,
            a: f64::INFINITY,
            b: b0,
            c: f64::INFINITY,
            d: f64::INFINITY,
            degenerate: true,
        });
    }

    let iota = (sups.nu_second / sups.nu_prime).powi(2);
    let eps2 = eps * eps;
    let eps4 = eps2 * eps2;

    let a0 = delta * omega / (mu * theta * eps2);
    let iota_mu = iota * mu / eps4;
    let d0 = (theta * beta).max(1.0) * (theta * beta) * (1.0 + mu * alpha * theta / delta)
        * iota_mu
        * (1.0 + iota_mu);

    let a = a0 + beta * alpha * (1.0 + mu.sqrt()) * w1 + alpha * alpha * mu.powf(1.5) / delta;
    let b = b0;
    let c = c0
        + (alpha / theta) * mu.sqrt() * w1 * h1_sq
        + (alpha / theta) * w1.powi(3)
        + (alpha / theta) * eps2 * mu.sqrt() * h1_sq * h1_sq;
    let beta_theta = beta * theta;
    let d = d0
        + eps2 * beta_theta.sqrt() * alpha * alpha * mu / delta
            * (1.0 + alpha.powi(3) * mu.powi(3) * beta_theta.powf(1.5) / delta.powi(3))
        + eps * beta * mu * (alpha.powi(3) * theta / delta).sqrt()
            * (1.0
                + eps.powi(3)
                    * mu.powi(3)
                    * (alpha.powi(9) * theta.powi(3) / delta.powi(9)).sqrt());

    Ok(EstimateConstants {
        mu,
        omega,
        iota,
        a0,
        b0,
        c0,
        d0,
        a,
        b,
        c,
        d,
        degenerate: false,
    })
}

/// Dimensional coefficients of the sharp-interface relations recovered from
/// [`PhysicalParams`]:
///
/// * `kinetic` — ρ/(κ₀·h), multiplying the normal velocity in the kinetic
///   Gibbs–Thomson relation,
/// * `capillary` — σ, multiplying the mean curvature,
/// * `undercooling` — ρ·L/T_e, multiplying the interface temperature,
/// * `quadratic` — 2/(κ₀·h), multiplying v² in the generalized heat-flux jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StefanCoefficients {
    pub kinetic: f64,
    pub capillary: f64,
    pub undercooling: f64,
    pub quadratic: f64,
}

/// Extract the dimensional interface coefficients from material data.
pub fn physical_stefan_coefficients(p: &PhysicalParams) -> Result<StefanCoefficients> {
    // Reuse the full positivity validation of the nondimensionalization map.
    crate::params::nondimensionalize(p)?;
    let kappa_h = p.kinetic_coeff * p.interface_width;
    Ok(StefanCoefficients {
        kinetic: p.density / kappa_h,
        capillary: p.surface_tension,
        undercooling: p.density * p.latent_heat / p.melt_temperature,
        quadratic: 2.0 / kappa_h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{PotentialRegistry, SupNorms};
    use std::sync::Arc;

    fn quartic() -> Arc<dyn Potential> {
        PotentialRegistry::with_builtins().get("quartic").unwrap()
    }

    /// Test-only family whose sup-norms are exactly one; the pointwise values are
    /// irrelevant for the constants, which consume only the sup-norms.
    struct UnitSups;
    impl Potential for UnitSups {
        fn name(&self) -> &str {
            "unit-sups"
        }
        fn w(&self, phi: f64) -> f64 {
            0.5 * phi * phi
        }
        fn w_prime(&self, phi: f64) -> f64 {
            phi
        }
        fn w_second(&self, _phi: f64) -> f64 {
            1.0
        }
        fn nu(&self, phi: f64) -> f64 {
            phi
        }
        fn nu_prime(&self, _phi: f64) -> f64 {
            1.0
        }
        fn nu_second(&self, _phi: f64) -> f64 {
            0.0
        }
        fn sup_norms(&self) -> SupNorms {
            SupNorms {
                w_prime: 1.0,
                w_second: 1.0,
                nu_prime: 1.0,
                nu_second: 1.0,
            }
        }
    }

    /// Test-only family with a constant interpolant (no coupling).
    struct Uncoupled;
    impl Potential for Uncoupled {
        fn name(&self) -> &str {
            "uncoupled"
        }
        fn w(&self, phi: f64) -> f64 {
            (phi * (1.0 - phi)).powi(2)
        }
        fn w_prime(&self, phi: f64) -> f64 {
            2.0 * phi * (1.0 - phi) * (1.0 - 2.0 * phi)
        }
        fn w_second(&self, phi: f64) -> f64 {
            12.0 * phi * phi - 12.0 * phi + 2.0
        }
        fn nu(&self, _phi: f64) -> f64 {
            0.5
        }
        fn nu_prime(&self, _phi: f64) -> f64 {
            0.0
        }
        fn nu_second(&self, _phi: f64) -> f64 {
            0.0
        }
        fn sup_norms(&self) -> SupNorms {
            SupNorms {
                w_prime: 3.0,
                w_second: 11.0,
                nu_prime: 0.0,
                nu_second: 0.0,
            }
        }
    }

    #[test]
    fn wells_are_phase_neutral_for_every_temperature() {
        let pot = quartic();
        let h = HatParams {
            alpha_hat: 0.7,
            beta_hat: 2.0,
            gamma: 1.3,
            delta: 0.9,
            eps: 0.2,
            theta: 1.5,
        };
        let (solid, liquid) = pot.wells();
        for temp in [-3.0, -0.5, 0.0, 0.25, 3.0] {
            for well in [solid, liquid] {
                let m = mu_g(pot.as_ref(), &h, well, temp, 0.0);
                let f = source_f(pot.as_ref(), &h, well, temp, 0.0);
                assert!(m.abs() < 1e-14, "μ_G = {m} at well {well}, T = {temp}");
                assert!(f.abs() < 1e-14, "F = {f} at well {well}, T = {temp}");
            }
        }
    }

    #[test]
    fn heat_source_matches_its_defining_identity() {
        let pot = quartic();
        let h = HatParams {
            alpha_hat: 0.6,
            beta_hat: 1.1,
            gamma: 2.2,
            delta: 0.4,
            eps: 0.3,
            theta: 2.0,
        };
        for phi in [-0.2, 0.1, 0.35, 0.5, 0.8, 1.2] {
            for temp in [-1.5, -0.1, 0.0, 0.7] {
                for lap in [-4.0, 0.0, 2.5] {
                    let g = h.eps * h.eps * lap - pot.w_prime(phi);
                    let dphi = (g + h.gamma * pot.nu_prime(phi) * temp) / h.alpha_hat;
                    let expected =
                        h.alpha_hat * dphi * dphi - h.gamma * pot.nu_prime(phi) * temp * dphi;
                    let got = source_f(pot.as_ref(), &h, phi, temp, lap);
                    let scale = expected.abs().max(1.0);
                    assert!(
                        (got - expected).abs() / scale < 1e-12,
                        "F identity broken at φ={phi}, T={temp}, Δφ={lap}: {got} vs {expected}"
                    );
                }
            }
        }
    }

    #[test]
    fn latent_heat_factor_and_its_domain() {
        let h = HatParams::all_ones();
        assert!((latent_heat(&h, 0.5).unwrap() - 1.5).abs() < 1e-15);
        assert!((latent_heat(&h, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(latent_heat(&h, -1.0).is_err(), "T + θ = 0 must be rejected");
        assert!(latent_heat(&h, -2.0).is_err());
    }

    #[test]
    fn all_ones_constants_are_frozen() {
        let c = estimate_constants(&HatParams::all_ones(), &UnitSups, 0.0, 0.0).unwrap();
        assert!(!c.degenerate);
        for (got, want, name) in [
            (c.mu, 1.0, "mu"),
            (c.omega, 1.0, "omega"),
            (c.iota, 1.0, "iota"),
            (c.a0, 1.0, "a0"),
            (c.b0, 0.0, "b0"),
            (c.c0, 0.0, "c0"),
            (c.d0, 4.0, "d0"),
            (c.a, 4.0, "a"),
            (c.b, 0.0, "b"),
            (c.c, 1.0, "c"),
            (c.d, 8.0, "d"),
        ] {
            assert!(
                (got - want).abs() < 1e-14,
                "{name} = {got}, expected {want} at the all-ones chart"
            );
        }
    }

    #[test]
    fn constants_match_a_hand_computed_point() {
        struct Sups;
        impl Potential for Sups {
            fn name(&self) -> &str {
                "hand-sups"
            }
            fn w(&self, _: f64) -> f64 {
                0.0
            }
            fn w_prime(&self, _: f64) -> f64 {
                0.0
            }
            fn w_second(&self, _: f64) -> f64 {
                0.0
            }
            fn nu(&self, _: f64) -> f64 {
                0.0
            }
            fn nu_prime(&self, _: f64) -> f64 {
                0.0
            }
            fn nu_second(&self, _: f64) -> f64 {
                0.0
            }
            fn sup_norms(&self) -> SupNorms {
                SupNorms {
                    w_prime: 2.0,
                    w_second: 3.0,
                    nu_prime: 0.5,
                    nu_second: 1.0,
                }
            }
        }
        let h = HatParams {
            alpha_hat: 2.0,
            beta_hat: 4.0,
            gamma: 3.0,
            delta: 2.0,
            eps: 0.5,
            theta: 2.0,
        };
        let c = estimate_constants(&h, &Sups, 0.3, 0.7).unwrap();
        // μ = 9·0.25, ω = 9, ι = 4; the grouped constants then follow by hand:
        // A0 = 2·9/(2.25·2·0.25) = 16,  B0 = 4·0.09/2 = 0.18,
        // C0 = (1.125 + 1)·0.49 = 1.04125,
        // D0 = 1·0.5·2.125·144·145 = 22185,
        // A = 16 + 0.25·0.5·2.5·2 + 0.25·3.375/2 = 17.046875,
        // C = 1.04125 + 0.3675 + 2 + 0.022509375 = 3.431259375.
        assert!((c.mu - 2.25).abs() < 1e-14);
        assert!((c.omega - 9.0).abs() < 1e-14);
        assert!((c.iota - 4.0).abs() < 1e-14);
        assert!((c.a0 - 16.0).abs() < 1e-12, "a0 = {}", c.a0);
        assert!((c.b0 - 0.18).abs() < 1e-12, "b0 = {}", c.b0);
        assert!((c.c0 - 1.04125).abs() < 1e-12, "c0 = {}", c.c0);
        assert!((c.d0 - 22185.0).abs() < 1e-8, "d0 = {}", c.d0);
        assert!((c.a - 17.046875).abs() < 1e-12, "a = {}", c.a);
        assert!((c.b - c.b0).abs() == 0.0);
        assert!((c.c - 3.431259375).abs() < 1e-12, "c = {}", c.c);
    }

    #[test]
    fn degenerate_interpolant_is_flagged_and_uncontrolled() {
        let c = estimate_constants(&HatParams::all_ones(), &Uncoupled, 0.0, 0.0).unwrap();
        assert!(c.degenerate);
        assert_eq!(c.mu, 0.0);
        assert!(c.iota.is_infinite());
        assert!(c.a0.is_infinite() && c.d0.is_infinite());
        assert!(c.d.is_infinite());
        assert_eq!(c.t_star_1(1.0), 0.0, "no existence horizon without coupling");
    }

    #[test]
    fn existence_horizon_scales_inverse_quadratically() {
        let c = estimate_constants(&HatParams::all_ones(), &UnitSups, 0.0, 0.0).unwrap();
        let t2 = c.t_star_1(2.0);
        let t6 = c.t_star_1(6.0);
        assert!((t2 - 1.0 / 32.0).abs() < 1e-15);
        assert!((t2 / t6 - 9.0).abs() < 1e-12, "ratio {}", t2 / t6);
        // Initial energies below 1 are clamped.
        assert_eq!(c.t_star_1(0.5), c.t_star_1(1.0));
        assert!((c.t_star_1(0.5) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn lifting_norms_are_validated() {
        let h = HatParams::all_ones();
        assert!(estimate_constants(&h, &UnitSups, -0.1, 0.0).is_err());
        assert!(estimate_constants(&h, &UnitSups, f64::NAN, 1.0).is_err());
        // H¹ dominates L²; swapped arguments are caught.
        assert!(estimate_constants(&h, &UnitSups, 2.0, 1.0).is_err());
    }

    #[test]
    fn energy_report_matches_longhand_recomputation() {
        let grid = Grid::line(8, 1.0).unwrap();
        let pot = quartic();
        let h = HatParams {
            alpha_hat: 0.8,
            beta_hat: 1.6,
            gamma: 0.9,
            delta: 1.2,
            eps: 0.35,
            theta: 1.7,
        };
        let phi = vec![0.1, 0.25, 0.4, 0.6, 0.85, 1.0, 0.9, 0.7];
        let temp = vec![-0.2, 0.0, 0.15, 0.3, 0.2, 0.05, -0.1, -0.25];
        let state = FieldState::new(phi.clone(), temp.clone(), 0.0);
        let rep = energy_report(&grid, &state, pot.as_ref(), &h).unwrap();

        // Longhand: central differences with reflected end ghosts, midpoint sums.
        let n = 8;
        let dx = grid.dx;
        let beta = 1.0 / h.beta_hat;
        let eps2 = h.eps * h.eps;
        let mut e = 0.0;
        let mut e0 = 0.0;
        let mut s = 0.0;
        let mut lap2 = 0.0;
        for i in 0..n {
            let west = if i > 0 { phi[i - 1] } else { phi[0] };
            let east = if i + 1 < n { phi[i + 1] } else { phi[n - 1] };
            let grad = (east - west) / (2.0 * dx);
            let lap = (west - 2.0 * phi[i] + east) / (dx * dx);
            let grad_term = 0.5 * eps2 * grad * grad;
            e += temp[i] + beta * (pot.w(phi[i]) + h.gamma * h.theta * pot.nu(phi[i]) + grad_term);
            e0 += h.beta_hat / (2.0 * h.theta) * temp[i] * temp[i] + pot.w(phi[i]) + grad_term;
            s += beta * h.gamma * pot.nu(phi[i]) + (temp[i] + h.theta).ln();
            lap2 += lap * lap;
        }
        let sups = pot.sup_norms();
        let mu = h.gamma * h.gamma * sups.nu_prime * sups.nu_prime;
        let e1 = e0 * dx + 0.5 * eps2 * h.delta * h.alpha_hat / (mu * h.theta) * lap2 * dx;
        assert!((rep.total - e * dx).abs() < 1e-13, "E {} vs {}", rep.total, e * dx);
        assert!((rep.quadratic - e0 * dx).abs() < 1e-13);
        assert!((rep.entropy - s * dx).abs() < 1e-13);
        assert!((rep.augmented - e1).abs() < 1e-13, "E1 {} vs {e1}", rep.augmented);
    }

    #[test]
    fn energy_report_converges_to_continuum_values_at_second_order() {
        use std::f64::consts::PI;
        let pot = quartic();
        let h = HatParams {
            alpha_hat: 0.8,
            beta_hat: 1.6,
            gamma: 0.9,
            delta: 1.2,
            eps: 0.35,
            theta: 1.7,
        };
        let phi_f = |x: f64| 0.5 + 0.3 * (PI * x).cos();
        let dphi_f = |x: f64| -0.3 * PI * (PI * x).sin();
        let ddphi_f = |x: f64| -0.3 * PI * PI * (PI * x).cos();
        let temp_f = |x: f64| 0.2 + 0.1 * (PI * x).cos();

        // Continuum reference by composite Simpson quadrature of the exact densities.
        let beta = 1.0 / h.beta_hat;
        let eps2 = h.eps * h.eps;
        let sups = pot.sup_norms();
        let mu = h.gamma * h.gamma * sups.nu_prime * sups.nu_prime;
        let density = |x: f64| {
            let (p, t) = (phi_f(x), temp_f(x));
            let grad_term = 0.5 * eps2 * dphi_f(x) * dphi_f(x);
            let e = t + beta * (pot.w(p) + h.gamma * h.theta * pot.nu(p) + grad_term);
            let e0 = h.beta_hat / (2.0 * h.theta) * t * t + pot.w(p) + grad_term;
            let e1_extra = 0.5 * eps2 * h.delta * h.alpha_hat / (mu * h.theta)
                * ddphi_f(x)
                * ddphi_f(x);
            let s = beta * h.gamma * pot.nu(p) + (t + h.theta).ln();
            [e, e0, e0 + e1_extra, s]
        };
        let panels = 1 << 14;
        let hq = 1.0 / panels as f64;
        let mut reference = [0.0f64; 4];
        for k in 0..panels {
            let (x0, x1) = (k as f64 * hq, (k as f64 + 1.0) * hq);
            let (f0, fm, f1) = (density(x0), density(0.5 * (x0 + x1)), density(x1));
            for j in 0..4 {
                reference[j] += hq / 6.0 * (f0[j] + 4.0 * fm[j] + f1[j]);
            }
        }

        let mut errors = Vec::new();
        for n in [64usize, 128, 256] {
            let grid = Grid::line(n, 1.0).unwrap();
            let state = FieldState::from_fn(&grid, |x, _| phi_f(x), |x, _| temp_f(x));
            let rep = energy_report(&grid, &state, pot.as_ref(), &h).unwrap();
            let errs = [
                (rep.total - reference[0]).abs(),
                (rep.quadratic - reference[1]).abs(),
                (rep.augmented - reference[2]).abs(),
                (rep.entropy - reference[3]).abs(),
            ];
            errors.push(errs);
        }
        // E, E0, E1 carry a genuine O(h²) error from the discrete ∇φ and Δφ terms.
        for j in 0..3 {
            let r1 = errors[0][j] / errors[1][j];
            let r2 = errors[1][j] / errors[2][j];
            assert!(
                r1 > 3.2 && r1 < 4.8,
                "functional {j}: coarse ratio {r1}, errors {:?}",
                errors.iter().map(|e| e[j]).collect::<Vec<_>>()
            );
            assert!(
                r2 > 3.2 && r2 < 4.8,
                "functional {j}: fine ratio {r2}, errors {:?}",
                errors.iter().map(|e| e[j]).collect::<Vec<_>>()
            );
        }
        // S has no discrete-derivative part, and the midpoint rule is spectrally
        // accurate for these even smooth integrands: already exact at N = 64.
        for errs in &errors {
            assert!(errs[3] < 1e-12, "entropy error {} should be at machine level", errs[3]);
        }
    }

    #[test]
    fn augmented_energy_dominates_quadratic() {
        let grid = Grid::line(32, 1.0).unwrap();
        let pot = quartic();
        let h = HatParams::all_ones();
        let state = FieldState::from_fn(
            &grid,
            |x, _| 0.5 + 0.4 * (std::f64::consts::PI * x).cos(),
            |x, _| 0.2 * (std::f64::consts::PI * x).cos(),
        );
        let rep = energy_report(&grid, &state, pot.as_ref(), &h).unwrap();
        assert!(rep.augmented >= rep.quadratic);
        assert!(rep.e1_star() >= 1.0);
    }

    #[test]
    fn degenerate_coupling_gives_infinite_augmented_energy() {
        let grid = Grid::line(16, 1.0).unwrap();
        let state = FieldState::uniform(&grid, 0.3, 0.1);
        let rep = energy_report(&grid, &state, &Uncoupled, &HatParams::all_ones()).unwrap();
        assert!(rep.augmented.is_infinite());
        assert!(rep.total.is_finite() && rep.quadratic.is_finite() && rep.entropy.is_finite());
    }

    #[test]
    fn entropy_requires_positive_absolute_temperature() {
        let grid = Grid::line(8, 1.0).unwrap();
        let mut state = FieldState::uniform(&grid, 0.5, 0.0);
        state.temp[5] = -1.0; // T + θ = 0 at the all-ones chart
        let err = energy_report(&grid, &state, quartic().as_ref(), &HatParams::all_ones())
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cell 5"), "error should locate the cell: {msg}");
    }

    #[test]
    fn stefan_coefficients_at_unit_and_hand_points() {
        let ones = PhysicalParams {
            density: 1.0,
            specific_heat: 1.0,
            conductivity: 1.0,
            kinetic_coeff: 1.0,
            surface_tension: 1.0,
            latent_heat: 1.0,
            melt_temperature: 1.0,
            temp_scale: 1.0,
            interface_width: 1.0,
            domain_length: 1.0,
            time_scale: 1.0,
        };
        let c = physical_stefan_coefficients(&ones).unwrap();
        assert_eq!(
            (c.kinetic, c.capillary, c.undercooling, c.quadratic),
            (1.0, 1.0, 1.0, 2.0)
        );

        let p = PhysicalParams {
            density: 3.0,
            kinetic_coeff: 4.0,
            interface_width: 0.5,
            surface_tension: 3.0,
            latent_heat: 10.0,
            melt_temperature: 5.0,
            ..ones
        };
        let c = physical_stefan_coefficients(&p).unwrap();
        assert!((c.kinetic - 1.5).abs() < 1e-15);
        assert!((c.capillary - 3.0).abs() < 1e-15);
        assert!((c.undercooling - 6.0).abs() < 1e-15);
        assert!((c.quadratic - 1.0).abs() < 1e-15);

        let mut bad = ones;
        bad.melt_temperature = 0.0;
        assert!(physical_stefan_coefficients(&bad).is_err());
    }
}
