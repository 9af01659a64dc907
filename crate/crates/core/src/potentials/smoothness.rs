//! Sampled Hölder, Zygmund and Dini moduli.
//!
//! These are grid estimates used as hypothesis diagnostics. Sups are taken
//! over a uniform probe grid with `2^k`-nested refinements, so refining never
//! drops a sample point.

use serde::Serialize;

use super::spec::PotentialSpec;
use crate::error::{Error, Result};

/// Smallest offset used in the Zygmund and Dini integrals.
pub const EPS_MIN: f64 = 1e-4;
/// Points of the logarithmic ε-grid.
pub const EPS_POINTS: usize = 200;
/// Offsets per decade when probing `D̄^α` (both signs).
const HOLDER_OFFSETS_PER_DECADE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeGrid {
    pub from: f64,
    pub to: f64,
    /// Number of intervals; refine by doubling.
    pub intervals: usize,
}

impl ProbeGrid {
    pub fn new(from: f64, to: f64, intervals: usize) -> Result<Self> {
        if !(from.is_finite() && to.is_finite()) || !(to > from) || intervals == 0 {
            return Err(Error::domain(format!("empty probe range [{from}, {to}] with {intervals} intervals")));
        }
        Ok(ProbeGrid { from, to, intervals })
    }

    pub fn refined(&self) -> Self {
        ProbeGrid { intervals: self.intervals * 2, ..*self }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let h = (self.to - self.from) / self.intervals as f64;
        (0..=self.intervals).map(move |i| self.from + i as f64 * h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessReport {
    pub alpha: f64,
    /// `(x, D̄^α q(x))` on the probe grid.
    pub holder: Vec<(f64, f64)>,
    pub holder_sup: f64,
    /// `∫_{ε_min}^1 sup_x |q(x+ε) − 2q(x) + q(x−ε)| dε/ε²`.
    pub zygmund: f64,
    /// `∫_{ε_min}^1 sup_x |q'(x+ε) − q'(x−ε)| dε/ε`.
    pub dini: f64,
    pub grid: ProbeGrid,
    pub eps_min: f64,
    pub eps_points: usize,
}

fn offsets() -> Vec<f64> {
    // |x − y| from 1e-4 up to just below 1
    let decades = 4;
    let n = decades * HOLDER_OFFSETS_PER_DECADE;
    (0..n)
        .map(|i| 10f64.powf(-(decades as f64) + i as f64 / HOLDER_OFFSETS_PER_DECADE as f64))
        .chain(std::iter::once(0.999))
        .collect()
}

fn eps_grid() -> Vec<f64> {
    let lo = EPS_MIN.ln();
    (0..EPS_POINTS).map(|i| (lo - lo * i as f64 / (EPS_POINTS - 1) as f64).exp()).collect()
}

/// Sampled `D̄^α q(x) = sup_{|x−y|<1} |q(x) − q(y)| / |x − y|^α`.
pub fn holder_quotient(spec: &PotentialSpec, alpha: f64, x: f64) -> Result<f64> {
    let qx = spec.eval(x)?;
    let mut sup = 0.0f64;
    for d in offsets() {
        for y in [x - d, x + d] {
            if matches!(spec, PotentialSpec::RandomBump(_)) && y < 0.0 {
                continue;
            }
            let v = (qx - spec.eval(y)?).abs() / d.powf(alpha);
            sup = sup.max(v);
        }
    }
    Ok(sup)
}

fn derivative_sampler(spec: &PotentialSpec) -> impl Fn(f64) -> f64 + '_ {
    move |x| match spec.derivative(x) {
        Some(d) => d,
        None => {
            let h = 1e-6 * x.abs().max(1.0);
            (spec.eval_unchecked(x + h) - spec.eval_unchecked(x - h)) / (2.0 * h)
        }
    }
}

/// Trapezoid in `log ε` of `g(ε)` against `dε / ε^power`.
fn log_grid_integral(eps: &[f64], values: &[f64], power: i32) -> f64 {
    let mut acc = 0.0;
    for i in 1..eps.len() {
        let (e0, e1) = (eps[i - 1], eps[i]);
        let w0 = values[i - 1] * e0 / e0.powi(power);
        let w1 = values[i] * e1 / e1.powi(power);
        acc += 0.5 * (w0 + w1) * (e1.ln() - e0.ln());
    }
    acc
}

pub fn smoothness_report(spec: &PotentialSpec, alpha: f64, grid: ProbeGrid) -> Result<SmoothnessReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter { field: "alpha", reason: format!("must lie in (0, 1], got {alpha}") });
    }
    let xs: Vec<f64> = grid.points().collect();
    let holder = xs.iter().map(|&x| holder_quotient(spec, alpha, x).map(|h| (x, h))).collect::<Result<Vec<_>>>()?;
    let holder_sup = holder.iter().fold(0.0f64, |m, &(_, v)| m.max(v));

    let eps = eps_grid();
    let dq = derivative_sampler(spec);
    let q = |x: f64| spec.eval_unchecked(x);
    let keep = |x: f64, e: f64| !matches!(spec, PotentialSpec::RandomBump(_)) || x - e >= 0.0;
    let mut second = Vec::with_capacity(eps.len());
    let mut deriv = Vec::with_capacity(eps.len());
    for &e in &eps {
        let mut s2 = 0.0f64;
        let mut sd = 0.0f64;
        for &x in xs.iter().filter(|&&x| keep(x, e)) {
            s2 = s2.max((q(x + e) - 2.0 * q(x) + q(x - e)).abs());
            sd = sd.max((dq(x + e) - dq(x - e)).abs());
        }
        second.push(s2);
        deriv.push(sd);
    }
    Ok(SmoothnessReport {
        alpha,
        holder,
        holder_sup,
        zygmund: log_grid_integral(&eps, &second, 2),
        dini: log_grid_integral(&eps, &deriv, 1),
        grid,
        eps_min: EPS_MIN,
        eps_points: EPS_POINTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{AnalyticPotential, BumpFunction, RandomBump};

    #[test]
    fn zero_potential_has_zero_moduli() {
        let r = smoothness_report(&PotentialSpec::Zero, 0.5, ProbeGrid::new(1.0, 10.0, 50).unwrap()).unwrap();
        assert_eq!(r.holder_sup, 0.0);
        assert_eq!(r.zygmund, 0.0);
        assert_eq!(r.dini, 0.0);
    }

    #[test]
    fn identity_is_lipschitz_one() {
        let q = PotentialSpec::Analytic(AnalyticPotential::linear(1.0));
        let r = smoothness_report(&q, 1.0, ProbeGrid::new(0.0, 5.0, 20).unwrap()).unwrap();
        assert!((r.holder_sup - 1.0).abs() < 1e-9);
        assert!(r.zygmund < 1e-6);
    }

    #[test]
    fn empty_range_rejected() {
        assert!(ProbeGrid::new(3.0, 3.0, 10).is_err());
        assert!(ProbeGrid::new(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn refinement_never_decreases_sup() {
        let q = PotentialSpec::RandomBump(RandomBump::new(BumpFunction::default(), 5));
        let g = ProbeGrid::new(20.0, 60.0, 40).unwrap();
        let a = smoothness_report(&q, 0.5, g).unwrap();
        let b = smoothness_report(&q, 0.5, g.refined()).unwrap();
        assert!(b.holder_sup >= a.holder_sup);
        assert!(b.zygmund >= a.zygmund);
        assert!(b.dini >= a.dini);
        assert!(a.zygmund >= 0.0 && a.dini >= 0.0);
    }

    #[test]
    fn sine_is_zygmund_smooth_and_wvn_is_not_dini() {
        let smooth = PotentialSpec::Analytic(AnalyticPotential::sine(0.5, 1.0));
        let wvn = PotentialSpec::wigner_von_neumann();
        let g = ProbeGrid::new(50.0, 60.0, 400).unwrap();
        let s = smoothness_report(&smooth, 1.0, g).unwrap();
        let w = smoothness_report(&wvn, 1.0, g).unwrap();
        assert!(s.zygmund < 1.0);
        // WvN-like: second differences ~ ε, so the Zygmund integral grows like log(1/ε_min)
        assert!(w.zygmund > 5.0 * s.zygmund);
        assert!(w.dini > 5.0 * s.dini);
    }
}
