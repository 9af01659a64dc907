use serde::Serialize;

use super::solution::WkbSolution;
use crate::error::{Error, Result};
use crate::integrator::Trajectory;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    #[serde(rename = "E")]
    pub energy: f64,
    pub fit_window: (f64, f64),
    pub test_window: (f64, f64),
    #[serde(rename = "A_re")]
    pub a_re: f64,
    #[serde(rename = "A_im")]
    pub a_im: f64,
    pub residual: f64,
    pub fit_points: usize,
    pub test_points: usize,
}

/// Fit `u ≈ 2Re(A u₊)` on the fit window and report
/// `sup|u − 2Re(A u₊)| / sup|2Re(A u₊)|` on the test window.
pub fn wkb_residual(
    traj: &Trajectory,
    w: &WkbSolution,
    fit_window: (f64, f64),
    test_window: (f64, f64),
) -> Result<ResidualReport> {
    if traj.energy() != w.energy() {
        return Err(Error::Incompatible(format!(
            "trajectory at E = {} against WKB solution at E = {}",
            traj.energy(),
            w.energy()
        )));
    }
    for (name, (a, b)) in [("fit_window", fit_window), ("test_window", test_window)] {
        if !(a < b) || a < w.anchor() {
            return Err(Error::InvalidParameter {
                field: if name == "fit_window" { "fit_window" } else { "test_window" },
                reason: format!("[{a}, {b}] must be increasing and beyond the anchor {}", w.anchor()),
            });
        }
    }
    let x = traj.x();
    let u = traj.u();
    let inside = |(a, b): (f64, f64)| -> Vec<usize> { (0..x.len()).filter(|&i| x[i] >= a && x[i] <= b).collect() };
    let fit_idx = inside(fit_window);
    let test_idx = inside(test_window);
    if fit_idx.len() < 3 || test_idx.len() < 3 {
        return Err(Error::Resolution(format!(
            "{} fit and {} test samples; need at least 3 in each window",
            fit_idx.len(),
            test_idx.len()
        )));
    }
    let mut idx: Vec<usize> = fit_idx.iter().chain(&test_idx).copied().collect();
    idx.sort_unstable();
    idx.dedup();
    let pts: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let wkb = w.eval_many(&pts)?;
    let at = |i: usize| wkb[idx.binary_search(&i).expect("index was selected")];

    // u ≈ a·(2Re u₊) + b·(−2Im u₊) with A = a + ib
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &i in &fit_idx {
        let z = at(i);
        let (b1, b2) = (2.0 * z.re, -2.0 * z.im);
        s11 += b1 * b1;
        s12 += b1 * b2;
        s22 += b2 * b2;
        r1 += b1 * u[i];
        r2 += b2 * u[i];
    }
    let det = s11 * s22 - s12 * s12;
    if !(det.abs() > 1e-14 * (s11 * s22).max(f64::MIN_POSITIVE)) {
        return Err(Error::FitFailure("WKB basis is degenerate on the fit window".into()));
    }
    let a_re = (r1 * s22 - r2 * s12) / det;
    let a_im = (s11 * r2 - s12 * r1) / det;
    if a_re.hypot(a_im) < 1e-12 {
        return Err(Error::FitFailure(format!("|A| = {:e} below 1e-12", a_re.hypot(a_im))));
    }
    let (mut dev, mut size) = (0.0f64, 0.0f64);
    for &i in &test_idx {
        let z = at(i);
        let model = 2.0 * (a_re * z.re - a_im * z.im);
        dev = dev.max((u[i] - model).abs());
        size = size.max(model.abs());
    }
    Ok(ResidualReport {
        energy: w.energy(),
        fit_window,
        test_window,
        a_re,
        a_im,
        residual: dev / size,
        fit_points: fit_idx.len(),
        test_points: test_idx.len(),
    })
}
