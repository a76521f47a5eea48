//! Parameter charts.
//!
//! Three equivalent parameterizations of the same physics, plus the sharp-interface
//! scalings used by ε-sweeps:
//!
//! * [`PhysicalParams`] — dimensional material data,
//! * [`NondimParams`] — the nondimensional group (ε, Pe, α, θ, β, St),
//! * [`HatParams`] — the runtime coefficients of the evolution system,
//!   α̂ = 1/α, β̂ = 1/β, γ = 1/(β·St·θ), δ = 1/(β·Pe),
//! * [`SharpScalings`] — the ε-rescaled coefficients ᾱ = α̂/ε², β̄ = β̂/ε,
//!   γ̄ = γ/ε, δ̄ = δ/ε that stay fixed in the sharp-interface limit.
//!
//! Conversions are exact arithmetic on positive inputs; chart round-trips agree to
//! machine precision and are enforced by tests.

use crate::{Error, Result};

/// Dimensional material and scale data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Density ρ.
    pub density: f64,
    /// Specific heat per unit mass.
    pub specific_heat: f64,
    /// Heat conductivity.
    pub conductivity: f64,
    /// Kinetic (mobility) coefficient of the order parameter.
    pub kinetic_coeff: f64,
    /// Surface tension.
    pub surface_tension: f64,
    /// Latent heat per unit mass.
    pub latent_heat: f64,
    /// Equilibrium melting temperature.
    pub melt_temperature: f64,
    /// Temperature scale used for nondimensionalization.
    pub temp_scale: f64,
    /// Diffuse-interface width.
    pub interface_width: f64,
    /// Domain length scale.
    pub domain_length: f64,
    /// Time scale.
    pub time_scale: f64,
}

/// Nondimensional parameter group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NondimParams {
    /// Interface width over domain length.
    pub eps: f64,
    /// Péclet number.
    pub pe: f64,
    /// Kinetic number.
    pub alpha: f64,
    /// Scaled melting temperature.
    pub theta: f64,
    /// Capillarity number.
    pub beta: f64,
    /// Stefan number.
    pub st: f64,
}

/// Runtime coefficients of the evolution system
/// α̂ ∂tφ = ε²Δφ − W′(φ) + γν′(φ)T and β̂ ∂tT = δΔT − γ(T+θ)∂tν + α̂(∂tφ)².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatParams {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub gamma: f64,
    pub delta: f64,
    pub eps: f64,
    pub theta: f64,
}

/// Coefficients held fixed in the sharp-interface limit ε → 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpScalings {
    pub alpha_bar: f64,
    pub beta_bar: f64,
    pub gamma_bar: f64,
    pub delta_bar: f64,
    /// The ε at which these scalings were extracted.
    pub eps: f64,
}

fn require_positive(value: f64, name: &str) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::domain(format!(
            "parameter `{name}` must be positive and finite, got {value}"
        )));
    }
    Ok(())
}

/// Map dimensional data to the nondimensional group.
///
/// Every field of `p` must be positive; the error names the offending field.
pub fn nondimensionalize(p: &PhysicalParams) -> Result<NondimParams> {
    for (value, name) in [
        (p.density, "density"),
        (p.specific_heat, "specific_heat"),
        (p.conductivity, "conductivity"),
        (p.kinetic_coeff, "kinetic_coeff"),
        (p.surface_tension, "surface_tension"),
        (p.latent_heat, "latent_heat"),
        (p.melt_temperature, "melt_temperature"),
        (p.temp_scale, "temp_scale"),
        (p.interface_width, "interface_width"),
        (p.domain_length, "domain_length"),
        (p.time_scale, "time_scale"),
    ] {
        require_positive(value, name)?;
    }
    Ok(NondimParams {
        eps: p.interface_width / p.domain_length,
        pe: p.density * p.specific_heat * p.domain_length * p.domain_length
            / (p.conductivity * p.time_scale),
        alpha: p.kinetic_coeff * p.time_scale * p.surface_tension
            / (p.density * p.interface_width),
        theta: p.melt_temperature / p.temp_scale,
        beta: p.surface_tension
            / (p.density * p.specific_heat * p.interface_width * p.temp_scale),
        st: p.specific_heat * p.temp_scale / p.latent_heat,
    })
}

impl NondimParams {
    pub fn validate(&self) -> Result<()> {
        for (value, name) in [
            (self.eps, "eps"),
            (self.pe, "pe"),
            (self.alpha, "alpha"),
            (self.theta, "theta"),
            (self.beta, "beta"),
            (self.st, "st"),
        ] {
            require_positive(value, name)?;
        }
        Ok(())
    }
}

/// Derive the runtime and sharp-interface charts from the nondimensional group.
pub fn hat_and_sharp_params(n: &NondimParams) -> Result<(HatParams, SharpScalings)> {
    n.validate()?;
    let hat = HatParams {
        alpha_hat: 1.0 / n.alpha,
        beta_hat: 1.0 / n.beta,
        gamma: 1.0 / (n.beta * n.st * n.theta),
        delta: 1.0 / (n.beta * n.pe),
        eps: n.eps,
        theta: n.theta,
    };
    Ok((hat, hat.sharp_scalings()))
}

impl HatParams {
    /// The canonical all-ones chart used as the documented default.
    pub fn all_ones() -> Self {
        HatParams {
            alpha_hat: 1.0,
            beta_hat: 1.0,
            gamma: 1.0,
            delta: 1.0,
            eps: 1.0,
            theta: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (value, name) in [
            (self.alpha_hat, "alpha_hat"),
            (self.beta_hat, "beta_hat"),
            (self.gamma, "gamma"),
            (self.delta, "delta"),
            (self.eps, "eps"),
            (self.theta, "theta"),
        ] {
            require_positive(value, name)?;
        }
        Ok(())
    }

    /// α = 1/α̂ (mobility number of the nondimensional chart).
    pub fn alpha(&self) -> f64 {
        1.0 / self.alpha_hat
    }

    /// β = 1/β̂ (capillarity number of the nondimensional chart).
    pub fn beta(&self) -> f64 {
        1.0 / self.beta_hat
    }

    /// Invert the chart: recover (ε, Pe, α, θ, β, St).
    pub fn to_nondim(&self) -> NondimParams {
        let beta = self.beta();
        NondimParams {
            eps: self.eps,
            pe: 1.0 / (beta * self.delta),
            alpha: self.alpha(),
            theta: self.theta,
            beta,
            st: 1.0 / (beta * self.gamma * self.theta),
        }
    }

    pub fn sharp_scalings(&self) -> SharpScalings {
        SharpScalings {
            alpha_bar: self.alpha_hat / (self.eps * self.eps),
            beta_bar: self.beta_hat / self.eps,
            gamma_bar: self.gamma / self.eps,
            delta_bar: self.delta / self.eps,
            eps: self.eps,
        }
    }
}

impl SharpScalings {
    /// Rebuild runtime coefficients at a different ε with these scalings held fixed:
    /// α̂ = ᾱε², β̂ = β̄ε, γ = γ̄ε, δ = δ̄ε.
    pub fn hat_at_eps(&self, eps: f64, theta: f64) -> HatParams {
        HatParams {
            alpha_hat: self.alpha_bar * eps * eps,
            beta_hat: self.beta_bar * eps,
            gamma: self.gamma_bar * eps,
            delta: self.delta_bar * eps,
            eps,
            theta,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_ones_physical() -> PhysicalParams {
        PhysicalParams {
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
        }
    }

    #[test]
    fn all_ones_physical_maps_to_all_ones_charts() {
        let n = nondimensionalize(&all_ones_physical()).unwrap();
        for (v, name) in [
            (n.eps, "eps"),
            (n.pe, "pe"),
            (n.alpha, "alpha"),
            (n.theta, "theta"),
            (n.beta, "beta"),
            (n.st, "st"),
        ] {
            assert_eq!(v, 1.0, "{name} should be exactly 1");
        }
        let (hat, bars) = hat_and_sharp_params(&n).unwrap();
        assert_eq!(hat, HatParams::all_ones());
        assert_eq!(bars.alpha_bar, 1.0);
        assert_eq!(bars.delta_bar, 1.0);
    }

    #[test]
    fn nondimensional_formulas_match_hand_computation() {
        let p = PhysicalParams {
            density: 2.0,
            specific_heat: 3.0,
            conductivity: 5.0,
            kinetic_coeff: 7.0,
            surface_tension: 0.4,
            latent_heat: 11.0,
            melt_temperature: 13.0,
            temp_scale: 0.5,
            interface_width: 0.01,
            domain_length: 0.2,
            time_scale: 4.0,
        };
        let n = nondimensionalize(&p).unwrap();
        assert!((n.eps - 0.05).abs() < 1e-15);
        // Pe = ρ C L² / (k t0) = 2·3·0.04 / (5·4) = 0.012
        assert!((n.pe - 0.012).abs() < 1e-15);
        // α = κ t0 σ / (ρ h) = 7·4·0.4 / (2·0.01) = 560
        assert!((n.alpha - 560.0).abs() < 1e-10);
        // θ = Te/dT = 26
        assert!((n.theta - 26.0).abs() < 1e-12);
        // β = σ / (ρ C h dT) = 0.4 / (2·3·0.01·0.5) = 40/3
        assert!((n.beta - 40.0 / 3.0).abs() < 1e-12);
        // St = C dT / Le = 3·0.5/11
        assert!((n.st - 1.5 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_fields_are_rejected_by_name() {
        let mut p = all_ones_physical();
        p.conductivity = 0.0;
        let err = nondimensionalize(&p).unwrap_err();
        assert!(
            err.to_string().contains("conductivity"),
            "error should name the field: {err}"
        );

        let mut p = all_ones_physical();
        p.latent_heat = -2.0;
        let err = nondimensionalize(&p).unwrap_err();
        assert!(err.to_string().contains("latent_heat"));
    }

    #[test]
    fn hat_chart_satisfies_defining_identities() {
        let n = NondimParams {
            eps: 0.05,
            pe: 3.0,
            alpha: 0.7,
            theta: 2.0,
            beta: 1.3,
            st: 0.45,
        };
        let (hat, bars) = hat_and_sharp_params(&n).unwrap();
        // γ·β·St·θ = 1 and δ·β·Pe = 1 by construction.
        assert!((hat.gamma * n.beta * n.st * n.theta - 1.0).abs() < 1e-14);
        assert!((hat.delta * n.beta * n.pe - 1.0).abs() < 1e-14);
        assert!((hat.alpha_hat * n.alpha - 1.0).abs() < 1e-14);
        assert!((hat.beta_hat * n.beta - 1.0).abs() < 1e-14);
        // Bars: γ/ε = γ̄ and friends.
        assert!((hat.gamma / n.eps - bars.gamma_bar).abs() < 1e-14);
        assert!((hat.alpha_hat / (n.eps * n.eps) - bars.alpha_bar).abs() < 1e-12);
        assert!((hat.beta_hat / n.eps - bars.beta_bar).abs() < 1e-12);
        assert!((hat.delta / n.eps - bars.delta_bar).abs() < 1e-12);
    }

    #[test]
    fn chart_round_trip_is_exact_to_machine_precision() {
        let n = NondimParams {
            eps: 0.02,
            pe: 12.5,
            alpha: 0.33,
            theta: 4.5,
            beta: 2.25,
            st: 0.8,
        };
        let (hat, _) = hat_and_sharp_params(&n).unwrap();
        let back = hat.to_nondim();
        for (a, b, name) in [
            (n.eps, back.eps, "eps"),
            (n.pe, back.pe, "pe"),
            (n.alpha, back.alpha, "alpha"),
            (n.theta, back.theta, "theta"),
            (n.beta, back.beta, "beta"),
            (n.st, back.st, "st"),
        ] {
            assert!(
                ((a - b) / a).abs() < 1e-12,
                "{name} round trip: {a} vs {b}"
            );
        }
    }

    #[test]
    fn sharp_rescaling_reconstructs_hats_at_each_eps() {
        let bars = SharpScalings {
            alpha_bar: 1.0,
            beta_bar: 1.0,
            gamma_bar: 1.0,
            delta_bar: 1.0,
            eps: 0.08,
        };
        for eps in [0.08, 0.04, 0.02, 0.01] {
            let hat = bars.hat_at_eps(eps, 1.0);
            assert!((hat.gamma / eps - bars.gamma_bar).abs() < 1e-15);
            assert!((hat.alpha_hat - eps * eps).abs() < 1e-18);
            assert!((hat.beta_hat - eps).abs() < 1e-18);
            assert!((hat.delta - eps).abs() < 1e-18);
            // Round trip through the bar extraction.
            let bars2 = hat.sharp_scalings();
            assert!((bars2.alpha_bar - 1.0).abs() < 1e-12);
            assert!((bars2.beta_bar - 1.0).abs() < 1e-12);
        }
    }
}
