//! Gauss-Hermite averaging of `exp(-c6)` over the thermal P function.
//!
//! With `alpha0 = sqrt(n_bar) (u + i v)` the P function becomes the product
//! weight `exp(-u^2 - v^2) / pi`, and since `c6` is affine in `(u, v)` the
//! tensor-product rule factorizes into two one-dimensional sums. Each sum is
//! taken along a contour shifted into the complex plane to the saddle of its
//! exponent; without the shift an oscillatory integrand whose true value is
//! `~1e-70` would cancel to rounding noise. Sums are accumulated in the log
//! domain so exponents far beyond `f64` range survive.

use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_ORDER: usize = 40;
pub const MIN_ORDER: usize = 20;
/// Allowed relative change of `-ln(nu)` when the order is doubled.
pub const CONVERGENCE_TOL: f64 = 1e-6;
const CONVERGENCE_ABS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Contour {
    /// Integrate along the real axis.
    Real,
    /// Shift to the saddle point of the exponent.
    #[default]
    Saddle,
}

/// Nodes and log-weights for `int exp(-u^2) g(u) du`.
#[derive(Debug, Clone)]
pub struct HermiteRule {
    nodes: Vec<f64>,
    ln_weights: Vec<f64>,
}

impl HermiteRule {
    pub fn new(order: usize) -> Result<Self> {
        let deg = NonZeroUsize::new(order)
            .ok_or_else(|| Error::invalid("quad_order", "must be positive"))?;
        let rule = GaussHermite::new(deg);
        let (nodes, ln_weights) = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (x, w.ln()))
            .unzip();
        Ok(HermiteRule { nodes, ln_weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `ln[ pi^(-1/2) int exp(-u^2 - beta u) du ]`.
    pub fn ln_mean_exp(&self, beta: Complex64, contour: Contour) -> Complex64 {
        let z0 = match contour {
            Contour::Real => Complex64::new(0.0, 0.0),
            Contour::Saddle => -beta / 2.0,
        };
        // u = v + z0:  exp(-u^2 - beta u) = exp(-v^2) exp(-2 v z0 - z0^2 - beta (v + z0))
        let terms: Vec<Complex64> = self
            .nodes
            .iter()
            .zip(&self.ln_weights)
            .map(|(&v, &lw)| lw - 2.0 * v * z0 - z0 * z0 - beta * (v + z0))
            .collect();
        let m = terms.iter().map(|t| t.re).fold(f64::NEG_INFINITY, f64::max);
        let sum: Complex64 = terms.iter().map(|t| (t - m).exp()).sum();
        m + sum.ln() - 0.5 * std::f64::consts::PI.ln()
    }
}

/// Thermal average of `exp(-c6)` for one time point, returned as a logarithm.
///
/// `c6 = c6_vacuum + x slope_re + y slope_im` with `alpha0 = x + i y`.
pub fn ln_thermal_average(
    rule: &HermiteRule,
    c6_vacuum: Complex64,
    slope_re: Complex64,
    slope_im: Complex64,
    n_bar: f64,
    contour: Contour,
) -> Complex64 {
    let s = n_bar.sqrt();
    -c6_vacuum + rule.ln_mean_exp(slope_re * s, contour) + rule.ln_mean_exp(slope_im * s, contour)
}

/// A rule of order `n` paired with one of order `2n` for the convergence check.
#[derive(Debug, Clone)]
pub struct ThermalQuadrature {
    base: HermiteRule,
    doubled: HermiteRule,
    contour: Contour,
}

impl ThermalQuadrature {
    pub fn new(order: usize) -> Result<Self> {
        if order < MIN_ORDER {
            return Err(Error::invalid(
                "quad_order",
                format!("{order} is below the minimum of {MIN_ORDER}"),
            ));
        }
        Ok(ThermalQuadrature {
            base: HermiteRule::new(order)?,
            doubled: HermiteRule::new(2 * order)?,
            contour: Contour::Saddle,
        })
    }

    pub fn with_contour(mut self, contour: Contour) -> Self {
        self.contour = contour;
        self
    }

    /// `-ln|<exp(-c6)>|` at the base order, checked against the doubled order.
    pub fn neg_log_visibility(
        &self,
        tau: f64,
        c6_vacuum: Complex64,
        slope_re: Complex64,
        slope_im: Complex64,
        n_bar: f64,
    ) -> Result<f64> {
        let eval = |rule: &HermiteRule| {
            -ln_thermal_average(rule, c6_vacuum, slope_re, slope_im, n_bar, self.contour).re
        };
        let a = eval(&self.base);
        let b = eval(&self.doubled);
        let change = (a - b).abs();
        if !(change <= CONVERGENCE_TOL * b.abs() + CONVERGENCE_ABS_FLOOR) {
            return Err(Error::QuadratureNotConverged {
                tau,
                relative: change / b.abs().max(f64::MIN_POSITIVE),
            });
        }
        Ok(a)
    }
}
