//! Interferometric visibility `nu(t)` by several independent routes.
//!
//! * `ode_analytic`: integrated response functions, Gaussian thermal average in closed form.
//! * `ode_quadrature`: same probe runs, thermal average by Gauss-Hermite quadrature.
//! * `closed_form`: high-Q analytic expression with damped frequency.
//!
//! The exponent `-ln(nu)` is the primary quantity; `nu` itself underflows for
//! strongly decohered or thermally narrowed states.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::output::sci;
use crate::params::DimensionlessParams;
use crate::propagator::{f_from_probes, FTriple, ProbeSet, Propagator};
use crate::quadrature::ThermalQuadrature;

/// Exponents above this are reported as `nu = 0`.
pub const UNDERFLOW_EXPONENT: f64 = 700.0;
/// `Q_m^-1` above which the closed form is flagged as outside its high-Q validity.
pub const HIGH_Q_LIMIT: f64 = 0.1;
const SMALL_DAMPING: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    OdeAnalytic,
    OdeQuadrature,
    ClosedForm,
}

impl Route {
    pub fn as_str(&self) -> &'static str {
        match self {
            Route::OdeAnalytic => "ode_analytic",
            Route::OdeQuadrature => "ode_quadrature",
            Route::ClosedForm => "closed_form",
        }
    }
}

pub fn nu_from_exponent(neg_log_nu: f64) -> f64 {
    if neg_log_nu > UNDERFLOW_EXPONENT {
        0.0
    } else {
        (-neg_log_nu).exp().min(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisibilitySeries {
    pub taus: Vec<f64>,
    pub t_seconds: Vec<f64>,
    pub nu: Vec<f64>,
    pub neg_log_nu: Vec<f64>,
    pub route: Route,
    /// Set when the closed form is used with `Q_m^-1 > 0.1`.
    pub high_q_warning: bool,
}

impl VisibilitySeries {
    fn from_exponents(taus: Vec<f64>, omega_m: f64, neg_log_nu: Vec<f64>, route: Route) -> Self {
        VisibilitySeries {
            t_seconds: taus.iter().map(|t| t / omega_m).collect(),
            nu: neg_log_nu.iter().copied().map(nu_from_exponent).collect(),
            taus,
            neg_log_nu,
            route,
            high_q_warning: false,
        }
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn write_rows<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                sci(self.taus[i]),
                sci(self.t_seconds[i]),
                sci(self.nu[i]),
                sci(self.neg_log_nu[i]),
                self.route.as_str()
            )?;
        }
        Ok(())
    }
}

pub const CSV_HEADER: &str = "tau,t_s,nu,neg_log_nu,route";

/// Header plus the rows of every series, in order.
pub fn write_csv<W: Write>(series: &[VisibilitySeries], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for s in series {
        s.write_rows(&mut w)?;
    }
    Ok(())
}

/// `2 Tr rho_OD = exp(-c6)` for a single coherent mirror state.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleStateSeries {
    pub taus: Vec<f64>,
    pub value: Vec<Complex64>,
}

pub fn visibility_single(
    d: &DimensionlessParams,
    alpha0: Complex64,
    tau_max: f64,
    prop: &Propagator,
) -> Result<SingleStateSeries> {
    let traj = prop.propagate(d, alpha0, tau_max)?;
    Ok(SingleStateSeries {
        taus: traj.taus(),
        value: traj.states.iter().map(|s| (-s.c6()).exp()).collect(),
    })
}

/// Thermal exponent `kappa^2 [f1 + n_bar/4 (f2^2 + f3^2)]` from response functions.
pub fn thermal_from_f(f: &FTriple, d: &DimensionlessParams) -> VisibilitySeries {
    let k2 = d.kappa * d.kappa;
    let neg_log = (0..f.taus.len())
        .map(|i| k2 * (f.f1[i] + d.n_bar / 4.0 * (f.f2[i].powi(2) + f.f3[i].powi(2))))
        .collect();
    VisibilitySeries::from_exponents(f.taus.clone(), d.omega_m, neg_log, Route::OdeAnalytic)
}

fn ones(taus: Vec<f64>, omega_m: f64, route: Route) -> VisibilitySeries {
    let zeros = vec![0.0; taus.len()];
    VisibilitySeries::from_exponents(taus, omega_m, zeros, route)
}

pub fn visibility_thermal(
    d: &DimensionlessParams,
    tau_max: f64,
    prop: &Propagator,
) -> Result<VisibilitySeries> {
    if d.kappa == 0.0 {
        return Ok(ones(prop.grid(tau_max), d.omega_m, Route::OdeAnalytic));
    }
    let probes = prop.probes(d, tau_max)?;
    Ok(thermal_from_f(&f_from_probes(&probes, d.kappa)?, d))
}

/// Quadrature route from precomputed probe runs.
pub fn quadrature_from_probes(
    probes: &ProbeSet,
    d: &DimensionlessParams,
    quad: &ThermalQuadrature,
    prop: &Propagator,
) -> Result<VisibilitySeries> {
    let neg_log = prop.execution().try_map(probes.taus.len(), |i| {
        let (a, b) = probes.slopes(i);
        quad.neg_log_visibility(probes.taus[i], probes.c6_vacuum[i], a, b, d.n_bar)
    })?;
    Ok(VisibilitySeries::from_exponents(
        probes.taus.clone(),
        d.omega_m,
        neg_log,
        Route::OdeQuadrature,
    ))
}

pub fn check_quadrature_inputs(d: &DimensionlessParams) -> Result<()> {
    if !(d.n_bar > 0.0) {
        return Err(Error::invalid(
            "n_bar",
            "quadrature route needs n_bar > 0 (the P function is singular at n_bar = 0)",
        ));
    }
    Ok(())
}

pub fn visibility_quadrature(
    d: &DimensionlessParams,
    tau_max: f64,
    prop: &Propagator,
    order: usize,
) -> Result<VisibilitySeries> {
    let quad = ThermalQuadrature::new(order)?;
    check_quadrature_inputs(d)?;
    if d.kappa == 0.0 {
        return Ok(ones(prop.grid(tau_max), d.omega_m, Route::OdeQuadrature));
    }
    let probes = prop.probes(d, tau_max)?;
    quadrature_from_probes(&probes, d, &quad, prop)
}

/// `(1 - exp(-x)) / x`, continuous at 0.
fn relaxation_factor(x: f64) -> f64 {
    if x < SMALL_DAMPING {
        1.0 - x / 2.0 + x * x / 6.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// High-Q closed-form exponent at physical time `t` (seconds).
pub fn closed_form_exponent(d: &DimensionlessParams, omega_tilde: f64, t: f64) -> f64 {
    let k2 = d.kappa * d.kappa;
    let gt = d.gamma() * t;
    let wt = omega_tilde * t;
    let decay = (-gt).exp();
    let half_decay = (-gt / 2.0).exp();

    let revival = (d.n_bar + 0.5) * k2 * (1.0 + decay - 2.0 * half_decay * wt.cos());

    // chi/(4 Lambda) distributed into the braces so Lambda = 0 stays finite
    let r = relaxation_factor(gt);
    let sin2 = decay * (2.0 * wt).sin();
    let lambda_part = wt * (r / 3.0 + 2.0 / 3.0) - 4.0 / 3.0 * half_decay * wt.sin() + sin2 / 6.0;
    let chi_part = wt * r / 3.0 - sin2 / 6.0;
    let decoherence = 6.0 * k2 * (d.lambda * lambda_part + d.chi / 4.0 * chi_part);

    revival + decoherence
}

pub fn visibility_closed_form(d: &DimensionlessParams, t_seconds: &[f64]) -> Result<VisibilitySeries> {
    let omega_tilde = d.require_underdamped()?;
    let neg_log = t_seconds
        .iter()
        .map(|&t| closed_form_exponent(d, omega_tilde, t))
        .collect();
    let taus = t_seconds.iter().map(|t| t * d.omega_m).collect();
    let mut s = VisibilitySeries::from_exponents(taus, d.omega_m, neg_log, Route::ClosedForm);
    s.t_seconds = t_seconds.to_vec();
    s.high_q_warning = d.inv_q > HIGH_Q_LIMIT;
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstRevival {
    pub t1_s: f64,
    pub nu: f64,
    pub neg_log_nu: f64,
}

/// Height of the first revival at `t1 = 2 pi / omega_tilde`, friction neglected.
pub fn first_revival(d: &DimensionlessParams) -> Result<FirstRevival> {
    let omega_tilde = d.require_underdamped()?;
    let neg_log_nu = PI * d.kappa * d.kappa * (12.0 * d.lambda + d.chi);
    Ok(FirstRevival {
        t1_s: 2.0 * PI / omega_tilde,
        nu: nu_from_exponent(neg_log_nu),
        neg_log_nu,
    })
}

/// Full width at half maximum (in tau) of the visibility peak nearest `center_tau`.
///
/// Returns `None` if the half-maximum crossings are not inside the series.
pub fn peak_fwhm(s: &VisibilitySeries, center_tau: f64) -> Option<f64> {
    let n = s.len();
    if n < 3 {
        return None;
    }
    let center = s
        .taus
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - center_tau).abs().total_cmp(&(b.1 - center_tau).abs()))?
        .0;
    // climb to the local maximum
    let mut peak = center;
    while peak + 1 < n && s.nu[peak + 1] > s.nu[peak] {
        peak += 1;
    }
    while peak > 0 && s.nu[peak - 1] > s.nu[peak] {
        peak -= 1;
    }
    let half = s.nu[peak] / 2.0;
    if !(half > 0.0) {
        return None;
    }
    let crossing = |i: usize, j: usize| {
        let (a, b) = (s.nu[i], s.nu[j]);
        s.taus[i] + (half - a) / (b - a) * (s.taus[j] - s.taus[i])
    };
    let mut right = peak;
    while right + 1 < n && s.nu[right + 1] >= half {
        right += 1;
    }
    if right + 1 >= n {
        return None;
    }
    let mut left = peak;
    while left > 0 && s.nu[left - 1] >= half {
        left -= 1;
    }
    if left == 0 {
        return None;
    }
    Some(crossing(right, right + 1) - crossing(left, left - 1))
}

/// Max over the grid of `|a - b| / max(|a|, floor * max|a|)`.
///
/// Pointwise relative discrepancy with a floor so exact zeros of `a` (at
/// `tau = 0`, at frictionless revivals) do not divide by zero.
pub fn relative_discrepancy(a: &[f64], b: &[f64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len(), "series lengths differ");
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let denom_floor = (floor * scale).max(f64::MIN_POSITIVE);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(denom_floor))
        .fold(0.0, f64::max)
}
