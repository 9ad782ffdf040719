//! First-revival visibility over a (temperature, friction) grid.
//!
//! Each cell is `first_revival` of the parameters derived at that `(T, gamma)`.
//! The height therefore neglects friction during the first period and omits
//! the thermal-averaging revival factor.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::output::sci;
use crate::params::{derive_dimensionless, PhysConstants, PhysicalParams};
use crate::visibility::first_revival;

pub const DEFAULT_T_RANGE: (f64, f64) = (1e-10, 1e-2);
pub const DEFAULT_GAMMA_RANGE: (f64, f64) = (1e-8, 1e-1);
pub const DEFAULT_POINTS: usize = 200;

pub const GRID_CSV_HEADER: &str = "T_K,gamma_per_s,Lambda_T,chi,n_bar,nu_t1,neg_log_nu";
pub const CURVE_CSV_HEADER: &str = "T_K,gamma_per_s";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanCell {
    pub lambda_t: f64,
    pub chi: f64,
    pub n_bar: f64,
    pub nu_t1: f64,
    pub neg_log_nu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub t_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub kappa: f64,
    pub lambda_qq: f64,
    pub lambda_nonenv: f64,
    pub omega_m: f64,
    pub constants: PhysConstants,
    /// Row-major over `(T, gamma)`: index `i_t * gamma_values.len() + i_gamma`.
    pub cells: Vec<std::result::Result<ScanCell, String>>,
}

impl ScanGrid {
    pub fn cell(&self, i_t: usize, i_gamma: usize) -> &std::result::Result<ScanCell, String> {
        &self.cells[i_t * self.gamma_values.len() + i_gamma]
    }

    /// `neg_log_nu` down the temperature axis at fixed friction; NaN for failed cells.
    pub fn t_column(&self, i_gamma: usize) -> Vec<f64> {
        (0..self.t_values.len())
            .map(|i| self.cell(i, i_gamma).as_ref().map_or(f64::NAN, |c| c.neg_log_nu))
            .collect()
    }

    /// `neg_log_nu` along the friction axis at fixed temperature.
    pub fn gamma_row(&self, i_t: usize) -> Vec<f64> {
        (0..self.gamma_values.len())
            .map(|j| self.cell(i_t, j).as_ref().map_or(f64::NAN, |c| c.neg_log_nu))
            .collect()
    }

    /// `(T, gamma, message)` for every failed cell.
    pub fn failures(&self) -> Vec<(f64, f64, &str)> {
        let ng = self.gamma_values.len();
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(k, c)| {
                c.as_ref()
                    .err()
                    .map(|e| (self.t_values[k / ng], self.gamma_values[k % ng], e.as_str()))
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{GRID_CSV_HEADER}")?;
        let ng = self.gamma_values.len();
        for (k, cell) in self.cells.iter().enumerate() {
            let (t, g) = (self.t_values[k / ng], self.gamma_values[k % ng]);
            match cell {
                Ok(c) => writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    sci(t),
                    sci(g),
                    sci(c.lambda_t),
                    sci(c.chi),
                    sci(c.n_bar),
                    sci(c.nu_t1),
                    sci(c.neg_log_nu)
                )?,
                Err(_) => writeln!(w, "{},{},nan,nan,nan,nan,nan", sci(t), sci(g))?,
            }
        }
        Ok(())
    }
}

/// `n` log-spaced values from `min` to `max` inclusive.
pub fn log_axis(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && max.is_finite()) {
        return Err(Error::invalid(
            "axis",
            format!("need 0 < min <= max, got [{min}, {max}]"),
        ));
    }
    if n == 0 {
        return Err(Error::invalid("axis", "need at least one point"));
    }
    if n == 1 {
        return Ok(vec![min]);
    }
    if max == min {
        return Err(Error::invalid("axis", "min == max with more than one point"));
    }
    let (a, b) = (min.ln(), max.ln());
    Ok((0..n)
        .map(|i| {
            if i == 0 {
                min
            } else if i == n - 1 {
                max
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

fn check_axis(name: &'static str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::invalid(name, "axis is empty"));
    }
    if axis.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(name, "axis must be strictly increasing"));
    }
    Ok(())
}

/// Evaluate the first-revival visibility on every `(T, gamma)` cell.
///
/// `base` supplies `omega_m` and `lambda_nonenv`; `kappa` and `lambda_qq`
/// override the base values. Cells that fail keep their error message.
pub fn run_scan(
    base: &PhysicalParams,
    t_axis: &[f64],
    gamma_axis: &[f64],
    kappa: f64,
    lambda_qq: f64,
    c: &PhysConstants,
    exec: Execution,
) -> Result<ScanGrid> {
    check_axis("T_axis", t_axis)?;
    check_axis("gamma_axis", gamma_axis)?;
    if !kappa.is_finite() {
        return Err(Error::invalid("kappa", "must be finite"));
    }
    let base = PhysicalParams { lambda_qq, ..*base };
    let ng = gamma_axis.len();
    let cells = exec.map(t_axis.len() * ng, |k| {
        evaluate_cell(&base, t_axis[k / ng], gamma_axis[k % ng], kappa, c)
            .map_err(|e| e.to_string())
    });
    Ok(ScanGrid {
        t_values: t_axis.to_vec(),
        gamma_values: gamma_axis.to_vec(),
        kappa,
        lambda_qq,
        lambda_nonenv: base.lambda_nonenv,
        omega_m: base.omega_m,
        constants: *c,
        cells,
    })
}

fn evaluate_cell(
    base: &PhysicalParams,
    temperature: f64,
    gamma: f64,
    kappa: f64,
    c: &PhysConstants,
) -> Result<ScanCell> {
    let p = PhysicalParams {
        temperature,
        gamma,
        ..*base
    };
    let d = derive_dimensionless(&p, c)?.with_kappa(kappa);
    let r = first_revival(&d)?;
    Ok(ScanCell {
        lambda_t: d.lambda_t,
        chi: d.chi,
        n_bar: d.n_bar,
        nu_t1: r.nu,
        neg_log_nu: r.neg_log_nu,
    })
}

/// Locus where thermal decoherence equals `lambda_csl`:
/// `gamma(T) = 2 hbar omega_m^2 lambda_csl / (k_B T)` for each grid temperature.
pub fn csl_threshold_curve(grid: &ScanGrid, lambda_csl: f64) -> Result<Vec<(f64, f64)>> {
    if !(lambda_csl > 0.0) {
        return Err(Error::invalid("Lambda_CSL", "must be > 0"));
    }
    let c = &grid.constants;
    let scale = 2.0 * c.hbar * grid.omega_m * grid.omega_m * lambda_csl / c.k_b;
    Ok(grid
        .t_values
        .iter()
        .filter(|&&t| t > 0.0)
        .map(|&t| (t, scale / t))
        .collect())
}

pub fn write_curve_csv<W: Write>(curve: &[(f64, f64)], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CURVE_CSV_HEADER}")?;
    for (t, g) in curve {
        writeln!(w, "{},{}", sci(*t), sci(*g))?;
    }
    Ok(())
}

/// Temperature minimizing the first-revival extinction when coordinate
/// diffusion is present: `T* = (hbar omega_m / k_B) sqrt(lambda_qq / 48)`.
pub fn optimal_temperature(omega_m: f64, lambda_qq: f64, c: &PhysConstants) -> Result<f64> {
    if !(lambda_qq >= 1.0) {
        return Err(Error::invalid("lambda_qq", "optimum exists only for lambda_qq >= 1"));
    }
    if !(omega_m > 0.0) {
        return Err(Error::invalid("omega_m_rad_s", "must be > 0"));
    }
    Ok(c.hbar * omega_m / c.k_b * (lambda_qq / 48.0).sqrt())
}

/// Index of the minimum if `values` strictly decreases to it and strictly
/// increases after it.
pub fn unimodal_minimum(values: &[f64]) -> Option<usize> {
    if values.iter().any(|v| !v.is_finite()) || values.is_empty() {
        return None;
    }
    let m = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?
        .0;
    let down = values[..=m].windows(2).all(|w| w[1] < w[0]);
    let up = values[m..].windows(2).all(|w| w[1] > w[0]);
    (down && up).then_some(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::operating_point;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const C: PhysConstants = PhysConstants::CODATA;

    #[test]
    fn single_cell_matches_direct_first_revival() {
        let p = operating_point();
        let g = run_scan(&p, &[2e-3], &[3e-2], 1.0, 0.0, &C, Execution::Sequential).unwrap();
        let d = derive_dimensionless(&p, &C).unwrap().with_kappa(1.0);
        let r = first_revival(&d).unwrap();
        let cell = g.cell(0, 0).as_ref().unwrap();
        assert_eq!(cell.neg_log_nu.to_bits(), r.neg_log_nu.to_bits());
        assert_eq!(cell.nu_t1.to_bits(), r.nu.to_bits());
        assert!((6.0e-8..8.0e-8).contains(&cell.nu_t1), "{}", cell.nu_t1);
    }

    #[test]
    fn classical_column_increases_with_temperature() {
        let t = log_axis(1e-8, 1e-2, 50).unwrap();
        let g = run_scan(&operating_point(), &t, &[1e-3], 1.0, 0.0, &C, Execution::Sequential).unwrap();
        let col = g.t_column(0);
        assert!(col.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn coordinate_diffusion_turnback() {
        let t = log_axis(1e-10, 1e-6, 200).unwrap();
        let t_star = optimal_temperature(3e3, 1.0, &C).unwrap();
        assert_relative_eq!(t_star, 3.307e-9, max_relative = 1e-3);
        for gamma in [1e-6, 1e-3] {
            let g = run_scan(&operating_point(), &t, &[gamma], 1.0, 1.0, &C, Execution::Sequential).unwrap();
            let m = unimodal_minimum(&g.t_column(0)).expect("unimodal");
            assert!(t[m - 1] < t_star && t_star < t[m + 1]);
        }
    }

    #[test]
    fn cell_neg_log_matches_first_revival_formula() {
        let p = PhysicalParams {
            lambda_nonenv: 1e-3,
            ..operating_point()
        };
        let g = run_scan(&p, &[1e-6, 1e-3], &[1e-4, 1e-2], 1.7, 1.0, &C, Execution::Sequential).unwrap();
        for c in g.cells.iter().map(|c| c.as_ref().unwrap()) {
            let expected = PI * 1.7 * 1.7 * (12.0 * (c.lambda_t + 1e-3) + c.chi);
            assert_eq!(c.neg_log_nu, expected);
        }
    }

    #[test]
    fn failed_cells_are_recorded() {
        // T = 0 with coordinate diffusion is rejected per cell
        let p = operating_point();
        let g = run_scan(&p, &[0.0, 1e-3], &[1e-3], 1.0, 1.0, &C, Execution::Sequential).unwrap();
        assert!(g.cell(0, 0).is_err());
        assert!(g.cell(1, 0).is_ok());
        assert_eq!(g.failures().len(), 1);
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with("nan,nan,nan,nan,nan"));
    }

    #[test]
    fn axes_validation() {
        let p = operating_point();
        assert!(run_scan(&p, &[], &[1.0], 1.0, 0.0, &C, Execution::Sequential).is_err());
        assert!(run_scan(&p, &[2.0, 1.0], &[1.0], 1.0, 0.0, &C, Execution::Sequential).is_err());
        assert!(log_axis(0.0, 1.0, 5).is_err());
        assert_eq!(log_axis(1e-3, 1e-3, 1).unwrap(), vec![1e-3]);
        let ax = log_axis(1e-10, 1e-2, 200).unwrap();
        assert_eq!(ax.len(), 200);
        assert_eq!((ax[0], ax[199]), (1e-10, 1e-2));
    }

    #[test]
    fn csl_curve_examples() {
        let p = operating_point();
        let g = run_scan(&p, &[1e-3, 2e-3, 4e-3], &[1e-2], 1.0, 0.0, &C, Execution::Sequential).unwrap();
        let curve = csl_threshold_curve(&g, 2e-9).unwrap();
        assert_relative_eq!(curve[1].1, 1.3749e-10, max_relative = 1e-4);
        assert_relative_eq!(curve[0].1, 2.0 * curve[1].1, max_relative = 1e-14);
        assert_relative_eq!(curve[2].1, 0.5 * curve[1].1, max_relative = 1e-14);

        // a threshold equal to the operating point's Lambda_T passes through it
        let lt = g.cell(1, 0).as_ref().unwrap().lambda_t * 3.0; // gamma there is 1e-2
        let through = csl_threshold_curve(&g, lt).unwrap();
        assert_relative_eq!(through[1].1, 3e-2, max_relative = 1e-12);
        assert!(csl_threshold_curve(&g, 0.0).is_err());
    }

    #[test]
    fn optimal_temperature_scaling() {
        let a = optimal_temperature(3e3, 1.0, &C).unwrap();
        let b = optimal_temperature(3e3, 4.0, &C).unwrap();
        assert_relative_eq!(b, 2.0 * a, max_relative = 1e-14);
        assert!(optimal_temperature(3e3, 0.5, &C).is_err());
    }

    #[test]
    fn unimodality_detection() {
        assert_eq!(unimodal_minimum(&[3.0, 2.0, 1.0, 2.0]), Some(2));
        assert_eq!(unimodal_minimum(&[3.0, 2.0, 2.5, 2.0, 3.0]), None);
        assert_eq!(unimodal_minimum(&[1.0, f64::NAN]), None);
    }

    #[test]
    fn parallel_and_sequential_scans_identical() {
        let t = log_axis(1e-9, 1e-3, 30).unwrap();
        let gm = log_axis(1e-6, 1e-1, 30).unwrap();
        let p = operating_point();
        let a = run_scan(&p, &t, &gm, 1.0, 1.0, &C, Execution::Sequential).unwrap();
        let b = run_scan(&p, &t, &gm, 1.0, 1.0, &C, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
