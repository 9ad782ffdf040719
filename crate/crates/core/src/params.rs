//! Physical inputs, constants and the dimensionless working parameter set.
//!
//! Time is measured in units of the bare mirror period (`tau = omega_m * t`),
//! lengths in units of the ground-state width `sigma`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Representative nonenvironmental (CSL) decoherence strength.
pub const LAMBDA_CSL: f64 = 2e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysConstants {
    /// J s
    pub hbar: f64,
    /// J / K
    pub k_b: f64,
}

impl PhysConstants {
    pub const CODATA: PhysConstants = PhysConstants {
        hbar: 1.054571817e-34,
        k_b: 1.380649e-23,
    };

    pub fn new(hbar: f64, k_b: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::invalid("hbar", "must be positive and finite"));
        }
        if !(k_b > 0.0 && k_b.is_finite()) {
            return Err(Error::invalid("k_B", "must be positive and finite"));
        }
        Ok(PhysConstants { hbar, k_b })
    }
}

impl Default for PhysConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

/// Experiment description in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Mirror mass, kg.
    pub mass: f64,
    /// Mirror angular frequency, rad/s.
    pub omega_m: f64,
    /// Photon angular frequency, rad/s.
    pub omega_c: f64,
    /// Cavity length, m.
    pub cavity_length: f64,
    /// Temperature, K.
    pub temperature: f64,
    /// Friction rate, 1/s.
    pub gamma: f64,
    /// Multiplier of the minimal coordinate diffusion; 0 disables it.
    pub lambda_qq: f64,
    /// Nonenvironmental position decoherence added to the thermal part.
    pub lambda_nonenv: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        positive("M_kg", self.mass)?;
        positive("omega_m_rad_s", self.omega_m)?;
        positive("omega_c_rad_s", self.omega_c)?;
        positive("L_m", self.cavity_length)?;
        non_negative("T_K", self.temperature)?;
        non_negative("gamma_per_s", self.gamma)?;
        non_negative("lambda_qq", self.lambda_qq)?;
        non_negative("Lambda_nonenv", self.lambda_nonenv)?;
        if self.lambda_qq > 0.0 && self.lambda_qq < 1.0 {
            return Err(Error::invalid(
                "lambda_qq",
                format!(
                    "{} is below the positivity bound; use 0 or a value >= 1",
                    self.lambda_qq
                ),
            ));
        }
        Ok(())
    }

    /// Thermal energy over the mechanical quantum, `k_B T / (hbar omega_m)`.
    pub fn thermal_ratio(&self, c: &PhysConstants) -> f64 {
        c.k_b * self.temperature / (c.hbar * self.omega_m)
    }
}

/// Working parameter set of the characteristic-function dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    /// Ground-state width in metres. Unknown in dimensionless input mode.
    pub sigma: Option<f64>,
    /// Photon-mirror coupling.
    pub kappa: f64,
    /// Total position decoherence strength (thermal + nonenvironmental).
    pub lambda: f64,
    /// Thermal part of `lambda`.
    pub lambda_t: f64,
    /// Momentum (coordinate-diffusion) decoherence strength.
    pub chi: f64,
    /// Inverse mechanical quality factor, `gamma / omega_m`.
    pub inv_q: f64,
    /// Thermal phonon occupation.
    pub n_bar: f64,
    /// Bare mirror frequency in rad/s; 1 in dimensionless mode.
    pub omega_m: f64,
    /// Damped frequency in rad/s; `None` when overdamped.
    pub omega_tilde: Option<f64>,
}

impl DimensionlessParams {
    /// Dimensionless input mode. Times are reported in units of `1/omega_m`
    /// and the whole of `lambda` is attributed to the thermal bath.
    pub fn new(kappa: f64, lambda: f64, chi: f64, inv_q: f64, n_bar: f64) -> Result<Self> {
        let d = DimensionlessParams {
            sigma: None,
            kappa,
            lambda,
            lambda_t: lambda,
            chi,
            inv_q,
            n_bar,
            omega_m: 1.0,
            omega_tilde: damped_frequency(1.0, inv_q),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.sigma {
            positive("sigma", s)?;
        }
        finite("kappa", self.kappa)?;
        non_negative("Lambda", self.lambda)?;
        non_negative("Lambda_T", self.lambda_t)?;
        non_negative("chi", self.chi)?;
        non_negative("inv_Q", self.inv_q)?;
        non_negative("n_bar", self.n_bar)?;
        positive("omega_m", self.omega_m)?;
        if self.chi > 0.0 && self.lambda > 0.0 {
            let bound = self.inv_q * self.inv_q / 16.0;
            // relative slack for the lambda_qq = 1 case, which sits exactly on the bound
            if self.chi * self.lambda < bound * (1.0 - 1e-12) {
                return Err(Error::invalid(
                    "chi",
                    format!(
                        "chi*Lambda = {:e} violates the positivity bound inv_Q^2/16 = {:e}",
                        self.chi * self.lambda,
                        bound
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.inv_q * self.omega_m
    }

    /// Damped frequency, or an error when the oscillator does not revive.
    pub fn require_underdamped(&self) -> Result<f64> {
        self.omega_tilde
            .ok_or(Error::Overdamped { inv_q: self.inv_q })
    }
}

/// Convert SI inputs to the dimensionless working set.
pub fn derive_dimensionless(p: &PhysicalParams, c: &PhysConstants) -> Result<DimensionlessParams> {
    p.validate()?;
    if p.temperature == 0.0 && p.lambda_qq > 0.0 {
        return Err(Error::invalid(
            "T_K",
            "T = 0 with lambda_qq > 0: minimal coordinate diffusion diverges",
        ));
    }

    let sigma = (c.hbar / (2.0 * p.mass * p.omega_m)).sqrt();
    let kappa = (p.omega_c / p.omega_m) * (sigma / p.cavity_length);
    let inv_q = p.gamma / p.omega_m;
    let n_bar = bose_occupation(p.temperature, p.omega_m, c);
    let lambda_t = p.thermal_ratio(c) / 2.0 * inv_q;
    let chi = if lambda_t > 0.0 && p.lambda_qq > 0.0 {
        p.lambda_qq * inv_q * inv_q / (16.0 * lambda_t)
    } else {
        0.0
    };

    Ok(DimensionlessParams {
        sigma: Some(sigma),
        kappa,
        lambda: lambda_t + p.lambda_nonenv,
        lambda_t,
        chi,
        inv_q,
        n_bar,
        omega_m: p.omega_m,
        omega_tilde: damped_frequency(p.omega_m, inv_q),
    })
}

/// `chi / (4 Lambda_T)`, which must equal `lambda_qq (hbar omega_m / 4 k_B T)^2`.
pub fn chi_identity_check(p: &PhysicalParams, c: &PhysConstants) -> Result<f64> {
    if !(p.temperature > 0.0) {
        return Err(Error::invalid("T_K", "must be positive"));
    }
    if !(p.gamma > 0.0) {
        return Err(Error::invalid("gamma_per_s", "must be positive"));
    }
    if !(p.lambda_qq >= 1.0) {
        return Err(Error::invalid("lambda_qq", "must be >= 1"));
    }
    let d = derive_dimensionless(p, c)?;
    Ok(d.chi / (4.0 * d.lambda_t))
}

/// Classicality combinations `(kappa^2 Lambda_T, kappa^2 n_bar)`: the
/// first-revival extinction coefficient and the thermal-narrowing parameter.
pub fn classicality_diagnostics(d: &DimensionlessParams) -> (f64, f64) {
    let k2 = d.kappa * d.kappa;
    (k2 * d.lambda_t, k2 * d.n_bar)
}

/// Exact Bose-Einstein occupation; 0 at T = 0.
pub fn bose_occupation(temperature: f64, omega_m: f64, c: &PhysConstants) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = c.hbar * omega_m / (c.k_b * temperature);
    1.0 / x.exp_m1()
}

pub(crate) fn damped_frequency(omega_m: f64, inv_q: f64) -> Option<f64> {
    if inv_q < 2.0 {
        Some(omega_m * (1.0 - inv_q * inv_q / 4.0).sqrt())
    } else {
        None
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{v} is not finite")))
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    finite(name, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{v} must be > 0")))
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    finite(name, v)?;
    if v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{v} must be >= 0")))
    }
}

#[cfg(test)]
pub(crate) fn operating_point() -> PhysicalParams {
    PhysicalParams {
        mass: 1e-12,
        omega_m: 3e3,
        omega_c: 3e15,
        cavity_length: 5e-2,
        temperature: 2e-3,
        gamma: 3e-2,
        lambda_qq: 0.0,
        lambda_nonenv: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const C: PhysConstants = PhysConstants::CODATA;

    #[test]
    fn thermal_decoherence_at_operating_point() {
        let d = derive_dimensionless(&operating_point(), &C).unwrap();
        assert!((0.43..0.44).contains(&d.lambda_t), "{}", d.lambda_t);
        assert_eq!(d.lambda, d.lambda_t);
        assert!((8.7e4..8.75e4).contains(&d.n_bar), "{}", d.n_bar);
        assert_relative_eq!(d.inv_q, 1e-5, max_relative = 1e-14);
        assert_eq!(d.chi, 0.0);
    }

    #[test]
    fn ground_state_width() {
        let d = derive_dimensionless(&operating_point(), &C).unwrap();
        let sigma = d.sigma.unwrap();
        assert_relative_eq!(sigma, 1.3257e-13, max_relative = 1e-4);
        // sigma^2 * 2 M omega_m = hbar
        assert_relative_eq!(sigma * sigma * 2.0 * 1e-12 * 3e3, C.hbar, max_relative = 1e-14);
    }

    #[test]
    fn zero_temperature_frictionless() {
        let p = PhysicalParams {
            temperature: 0.0,
            gamma: 0.0,
            lambda_nonenv: 3e-9,
            ..operating_point()
        };
        let d = derive_dimensionless(&p, &C).unwrap();
        assert_eq!(d.n_bar, 0.0);
        assert_eq!(d.lambda, 3e-9);
        assert_eq!(d.chi, 0.0);
        assert_eq!(d.inv_q, 0.0);
        assert_eq!(d.omega_tilde, Some(3e3));
    }

    #[test]
    fn rejects_zero_temperature_with_coordinate_diffusion() {
        let p = PhysicalParams {
            temperature: 0.0,
            lambda_qq: 1.0,
            ..operating_point()
        };
        assert!(matches!(
            derive_dimensionless(&p, &C),
            Err(Error::InvalidParameter { name: "T_K", .. })
        ));
    }

    #[test]
    fn rejects_sub_unit_lambda_qq() {
        let p = PhysicalParams {
            lambda_qq: 0.5,
            ..operating_point()
        };
        assert!(derive_dimensionless(&p, &C).is_err());
    }

    #[test]
    fn overdamped_has_no_damped_frequency() {
        let p = PhysicalParams {
            gamma: 2.0 * 3e3,
            ..operating_point()
        };
        let d = derive_dimensionless(&p, &C).unwrap();
        assert!(d.omega_tilde.is_none());
        assert!(matches!(d.require_underdamped(), Err(Error::Overdamped { .. })));
    }

    #[test]
    fn chi_identity_examples() {
        let p = PhysicalParams {
            lambda_qq: 1.0,
            ..operating_point()
        };
        let r1 = chi_identity_check(&p, &C).unwrap();
        let rhs = (C.hbar * 3e3 / (4.0 * C.k_b * 2e-3)).powi(2);
        assert_relative_eq!(r1, rhs, max_relative = 1e-12);
        assert!((8.1e-12..8.3e-12).contains(&r1));

        let r4 = chi_identity_check(&PhysicalParams { lambda_qq: 4.0, ..p }, &C).unwrap();
        assert_relative_eq!(r4, 4.0 * r1, max_relative = 1e-12);

        let t_unit = C.hbar * 3e3 / (4.0 * C.k_b);
        let r = chi_identity_check(&PhysicalParams { temperature: t_unit, ..p }, &C).unwrap();
        assert_relative_eq!(r, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn chi_identity_requires_positive_inputs() {
        let p = PhysicalParams {
            lambda_qq: 1.0,
            ..operating_point()
        };
        assert!(chi_identity_check(&PhysicalParams { gamma: 0.0, ..p }, &C).is_err());
        assert!(chi_identity_check(&PhysicalParams { lambda_qq: 0.0, ..p }, &C).is_err());
        assert!(chi_identity_check(&PhysicalParams { temperature: 0.0, ..p }, &C).is_err());
    }

    #[test]
    fn classicality_limits() {
        let d = DimensionlessParams::new(0.0, 0.3, 0.0, 1e-3, 50.0).unwrap();
        assert_eq!(classicality_diagnostics(&d), (0.0, 0.0));

        let d = derive_dimensionless(&operating_point(), &C)
            .unwrap()
            .with_kappa(1.0);
        let (ext, narrow) = classicality_diagnostics(&d);
        assert_eq!(ext, d.lambda_t);
        assert_eq!(narrow, d.n_bar);
    }

    #[test]
    fn dimensionless_mode_rejects_positivity_violation() {
        // chi * Lambda = 1e-3 * 1e-3 < (0.1)^2 / 16
        assert!(DimensionlessParams::new(1.0, 1e-3, 1e-3, 0.1, 1.0).is_err());
        assert!(DimensionlessParams::new(1.0, 0.5, 0.0, 1e-5, 1e5).is_ok());
    }

    #[test]
    fn occupation_is_monotone_in_temperature() {
        let mut prev = 0.0;
        for i in 1..50 {
            let t = 1e-9 * 1.5f64.powi(i);
            let n = bose_occupation(t, 3e3, &C);
            assert!(n > prev);
            prev = n;
        }
    }
}
