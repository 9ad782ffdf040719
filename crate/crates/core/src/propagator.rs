//! Gaussian characteristic-function dynamics.
//!
//! For a coherent initial mirror state the off-diagonal characteristic function
//! stays Gaussian,
//!
//! ```text
//! rho(k, D) = 1/2 exp(-[c1 k^2 + c2 k D + c3 D^2 + i c4 k + i c5 D + c6])
//! ```
//!
//! and the six coefficients obey a closed linear system which is integrated
//! here with a fixed-step classical Runge-Kutta scheme in `tau = omega_m t`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::params::DimensionlessParams;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Magnitude beyond which a coefficient is considered to have diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e12;
/// Bound on the imaginary parts of the real width coefficients c1..c3.
pub const WIDTH_IMAG_TOL: f64 = 1e-10;
/// Bound on imaginary residues of f2, f3.
pub const RESPONSE_IMAG_TOL: f64 = 1e-9;

pub const DEFAULT_STEPS_PER_PERIOD: usize = 2000;
pub const MIN_STEPS_PER_PERIOD: usize = 100;

/// Coefficients `[c1, .., c6]` at dimensionless time `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffState {
    pub tau: f64,
    pub c: [Complex64; 6],
}

impl CoeffState {
    /// Coherent mirror state `|alpha0>` at `tau = 0`.
    pub fn initial(alpha0: Complex64) -> Self {
        CoeffState {
            tau: 0.0,
            c: [
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.125, 0.0),
                Complex64::new(-2.0 * alpha0.re, 0.0),
                Complex64::new(-alpha0.im, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        }
    }

    pub fn c6(&self) -> Complex64 {
        self.c[5]
    }

    /// Exponent `c1 k^2 + c2 k D + c3 D^2 + i c4 k + i c5 D + c6`.
    pub fn exponent(&self, k: f64, delta: f64) -> Complex64 {
        let [c1, c2, c3, c4, c5, c6] = self.c;
        c1 * k * k + c2 * k * delta + c3 * delta * delta + I * (c4 * k + c5 * delta) + c6
    }

    /// `d ln(rho)/dk` and `d ln(rho)/dD` of the Gaussian form.
    fn log_gradient(&self, k: f64, delta: f64) -> (Complex64, Complex64) {
        let [c1, c2, c3, c4, c5, _] = self.c;
        (
            -(c1 * 2.0 * k + c2 * delta + I * c4),
            -(c2 * k + c3 * 2.0 * delta + I * c5),
        )
    }
}

/// Deliberate corruption of the equations of motion, used by the
/// self-validation suite to prove the residual check can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Flip the sign of the `-c4/2` restoring term in dc5/dtau.
    FlipC5Restoring,
}

/// Time derivative of the coefficients.
pub fn rhs(c: &[Complex64; 6], d: &DimensionlessParams) -> [Complex64; 6] {
    derivative(c, d, Fault::None)
}

fn derivative(c: &[Complex64; 6], d: &DimensionlessParams, fault: Fault) -> [Complex64; 6] {
    let [c1, c2, c3, c4, c5, _] = *c;
    let kappa = d.kappa;
    let q = d.inv_q;
    let restoring = match fault {
        Fault::None => -0.5 * c4,
        Fault::FlipC5Restoring => 0.5 * c4,
    };
    [
        2.0 * c2 + d.chi,
        4.0 * c3 - c1 - q * c2,
        -0.5 * c2 - 2.0 * q * c3 + d.lambda,
        2.0 * c5 - 2.0 * I * kappa * c1,
        restoring - kappa * (I * c2 + 0.5) - q * c5,
        I * kappa * c4,
    ]
}

fn axpy(y: &[Complex64; 6], a: f64, x: &[Complex64; 6]) -> [Complex64; 6] {
    std::array::from_fn(|i| y[i] + x[i] * a)
}

fn integrate(
    d: &DimensionlessParams,
    alpha0: Complex64,
    h: f64,
    steps: usize,
    fault: Fault,
) -> Result<Vec<[Complex64; 6]>> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = CoeffState::initial(alpha0).c;
    out.push(y);
    for n in 1..=steps {
        let k1 = derivative(&y, d, fault);
        let k2 = derivative(&axpy(&y, h / 2.0, &k1), d, fault);
        let k3 = derivative(&axpy(&y, h / 2.0, &k2), d, fault);
        let k4 = derivative(&axpy(&y, h, &k3), d, fault);
        y = std::array::from_fn(|i| y[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0));

        let tau = n as f64 * h;
        for (index, c) in y.iter().enumerate() {
            let magnitude = c.norm();
            if !(magnitude <= DIVERGENCE_LIMIT) {
                return Err(Error::Divergence {
                    tau,
                    index: index + 1,
                    magnitude,
                });
            }
        }
        for (index, c) in y[..3].iter().enumerate() {
            if c.im.abs() >= WIDTH_IMAG_TOL {
                return Err(Error::ComplexWidth {
                    tau,
                    index: index + 1,
                    imag: c.im,
                });
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// Coefficient history on the integrator grid `tau_n = n h`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTrajectory {
    pub alpha0: Complex64,
    pub states: Vec<CoeffState>,
    /// Grid spacing in tau.
    pub step: f64,
    /// Max coefficient difference between this run and one at half the step.
    pub error_estimate: f64,
}

impl CoeffTrajectory {
    pub fn taus(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.tau).collect()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// CSV dump, one row per grid point.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        use crate::output::sci;
        writeln!(w, "tau,re_c1,re_c2,re_c3,re_c4,im_c4,re_c5,im_c5,re_c6,im_c6")?;
        for s in &self.states {
            let [c1, c2, c3, c4, c5, c6] = s.c;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                sci(s.tau),
                sci(c1.re),
                sci(c2.re),
                sci(c3.re),
                sci(c4.re),
                sci(c4.im),
                sci(c5.re),
                sci(c5.im),
                sci(c6.re),
                sci(c6.im)
            )?;
        }
        Ok(())
    }
}

/// `c6` histories for the probe amplitudes `alpha0 = 0, 1, i`.
///
/// Since `c6` is affine in `(Re alpha0, Im alpha0)`, these three runs
/// determine it for every coherent initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSet {
    pub taus: Vec<f64>,
    pub c6_vacuum: Vec<Complex64>,
    pub c6_real: Vec<Complex64>,
    pub c6_imag: Vec<Complex64>,
}

impl ProbeSet {
    /// `c6(tau_i; alpha0)` by affine reconstruction.
    pub fn c6_at(&self, i: usize, alpha0: Complex64) -> Complex64 {
        let v = self.c6_vacuum[i];
        v + (self.c6_real[i] - v) * alpha0.re + (self.c6_imag[i] - v) * alpha0.im
    }

    /// Linear coefficients `(dc6/dRe alpha0, dc6/dIm alpha0)` at grid point `i`.
    pub fn slopes(&self, i: usize) -> (Complex64, Complex64) {
        let v = self.c6_vacuum[i];
        (self.c6_real[i] - v, self.c6_imag[i] - v)
    }
}

/// Response functions with
/// `c6(tau; alpha0) = kappa^2 f1 + i kappa^2 phase - i kappa (Re alpha0 f2 - Im alpha0 f3)`.
///
/// `f1` is the real part only; the imaginary part of `c6(tau; 0)` is a global
/// photon phase that drops out of the visibility modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct FTriple {
    pub taus: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub f3: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator {
    steps_per_period: usize,
    fault: Fault,
    exec: Execution,
}

impl Default for Propagator {
    fn default() -> Self {
        Propagator {
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            fault: Fault::None,
            exec: Execution::default(),
        }
    }
}

impl Propagator {
    pub fn new(steps_per_period: usize) -> Result<Self> {
        if steps_per_period < MIN_STEPS_PER_PERIOD {
            return Err(Error::invalid(
                "steps_per_period",
                format!("{steps_per_period} is below the minimum of {MIN_STEPS_PER_PERIOD}"),
            ));
        }
        Ok(Propagator {
            steps_per_period,
            ..Default::default()
        })
    }

    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = fault;
        self
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn steps_per_period(&self) -> usize {
        self.steps_per_period
    }

    pub fn step(&self) -> f64 {
        2.0 * PI / self.steps_per_period as f64
    }

    /// Number of steps needed to reach `tau_max` on this grid.
    pub fn steps_for(&self, tau_max: f64) -> usize {
        (tau_max / self.step() - 1e-9).ceil().max(0.0) as usize
    }

    /// Grid `n h`, `n = 0..=steps_for(tau_max)`.
    pub fn grid(&self, tau_max: f64) -> Vec<f64> {
        let h = self.step();
        (0..=self.steps_for(tau_max)).map(|n| n as f64 * h).collect()
    }

    pub fn propagate(
        &self,
        d: &DimensionlessParams,
        alpha0: Complex64,
        tau_max: f64,
    ) -> Result<CoeffTrajectory> {
        if !(tau_max >= 0.0 && tau_max.is_finite()) {
            return Err(Error::invalid("tau_max", format!("{tau_max} must be >= 0")));
        }
        let h = self.step();
        let n = self.steps_for(tau_max);
        let coarse = integrate(d, alpha0, h, n, self.fault)?;
        let fine = integrate(d, alpha0, h / 2.0, 2 * n, self.fault)?;

        let error_estimate = coarse
            .iter()
            .zip(fine.iter().step_by(2))
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max);

        let states = coarse
            .into_iter()
            .enumerate()
            .map(|(i, c)| CoeffState {
                tau: i as f64 * h,
                c,
            })
            .collect();

        Ok(CoeffTrajectory {
            alpha0,
            states,
            step: h,
            error_estimate,
        })
    }

    pub fn probes(&self, d: &DimensionlessParams, tau_max: f64) -> Result<ProbeSet> {
        let amplitudes = [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        let mut runs = self
            .exec
            .try_map(3, |i| self.propagate(d, amplitudes[i], tau_max))?
            .into_iter()
            .map(|t| t.states.iter().map(CoeffState::c6).collect::<Vec<_>>());
        let c6_vacuum = runs.next().expect("three probes");
        let c6_real = runs.next().expect("three probes");
        let c6_imag = runs.next().expect("three probes");
        Ok(ProbeSet {
            taus: self.grid(tau_max),
            c6_vacuum,
            c6_real,
            c6_imag,
        })
    }

    pub fn extract_f(&self, d: &DimensionlessParams, tau_max: f64) -> Result<FTriple> {
        let probes = self.probes(d, tau_max)?;
        f_from_probes(&probes, d.kappa)
    }
}

pub fn f_from_probes(p: &ProbeSet, kappa: f64) -> Result<FTriple> {
    if !(kappa > 0.0) {
        return Err(Error::invalid(
            "kappa",
            "response functions need kappa > 0",
        ));
    }
    let n = p.taus.len();
    let mut f = FTriple {
        taus: p.taus.clone(),
        f1: Vec::with_capacity(n),
        f2: Vec::with_capacity(n),
        f3: Vec::with_capacity(n),
    };
    for i in 0..n {
        let tau = p.taus[i];
        let (d_re, d_im) = p.slopes(i);
        let f2 = I * d_re / kappa;
        let f3 = -I * d_im / kappa;
        for (name, v) in [("f2", f2), ("f3", f3)] {
            if v.im.abs() > RESPONSE_IMAG_TOL {
                return Err(Error::NonRealResponse {
                    name,
                    tau,
                    imag: v.im,
                });
            }
        }
        f.f1.push(p.c6_vacuum[i].re / (kappa * kappa));
        f.f2.push(f2.re);
        f.f3.push(f3.re);
    }
    Ok(f)
}

pub fn propagate(
    d: &DimensionlessParams,
    alpha0: Complex64,
    tau_max: f64,
    steps_per_period: usize,
) -> Result<CoeffTrajectory> {
    Propagator::new(steps_per_period)?.propagate(d, alpha0, tau_max)
}

pub fn extract_f(d: &DimensionlessParams, tau_max: f64, steps_per_period: usize) -> Result<FTriple> {
    Propagator::new(steps_per_period)?.extract_f(d, tau_max)
}

/// Characteristic function of the off-diagonal block at Fourier point `(k, delta)`.
pub fn characteristic_value(s: &CoeffState, k: f64, delta: f64) -> Complex64 {
    0.5 * (-s.exponent(k, delta)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeResidual {
    /// `max |d_tau rho - L rho| / max(|rho|, 1e-300)`, normalized point by point.
    pub pointwise: f64,
    /// Same maximum absolute residual divided by the peak `|rho|` over the trajectory.
    pub relative_to_peak: f64,
}

/// Check the trajectory against the characteristic-function equation of motion.
///
/// The time derivative is a centered difference on the trajectory grid; the
/// `k` and `D` derivatives are analytic in the Gaussian form.
pub fn pde_residual(
    traj: &CoeffTrajectory,
    d: &DimensionlessParams,
    samples: &[(f64, f64)],
) -> Result<PdeResidual> {
    if traj.len() < 3 {
        return Err(Error::invalid(
            "trajectory",
            "at least three grid points are needed for a centered difference",
        ));
    }
    let h = traj.step;
    let mut pointwise = 0.0f64;
    let mut abs_max = 0.0f64;
    let mut peak = 0.0f64;
    for &(k, delta) in samples {
        let rho: Vec<Complex64> = traj
            .states
            .iter()
            .map(|s| characteristic_value(s, k, delta))
            .collect();
        peak = rho.iter().map(|r| r.norm()).fold(peak, f64::max);
        for i in 1..traj.len() - 1 {
            let dt = (rho[i + 1] - rho[i - 1]) / (2.0 * h);
            let r = rho[i];
            let (gk, gd) = traj.states[i].log_gradient(k, delta);
            let rhs = r
                * (2.0 * k * gd - 0.5 * delta * gk - d.lambda * delta * delta
                    + d.kappa * (gk + I * (0.5 * delta))
                    - d.inv_q * delta * gd
                    - d.chi * k * k);
            let res = (dt - rhs).norm();
            abs_max = abs_max.max(res);
            pointwise = pointwise.max(res / r.norm().max(1e-300));
        }
    }
    Ok(PdeResidual {
        pointwise,
        relative_to_peak: abs_max / peak.max(1e-300),
    })
}
