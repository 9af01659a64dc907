use std::cell::Cell;

use num_complex::Complex64;

use super::decompose::Decomposition;
use crate::error::{Error, Result};
use crate::quadrature;

const PHASE_ABS_TOL: f64 = 1e-11;
const PHASE_REL_TOL: f64 = 1e-13;

/// `u₊(x) = (x − q₂ + E)^{-1/4} e^{iφ(x,E)}` with the phase anchored at `x₀`.
#[derive(Debug, Clone)]
pub struct WkbSolution {
    decomposition: Decomposition,
    energy: f64,
    anchor: f64,
}

impl WkbSolution {
    /// Anchored at the first crossing of `x − q₂(x) + E = 1` found on a
    /// doubling grid from the decomposition's lower limit.
    pub fn new(decomposition: Decomposition, energy: f64) -> Result<Self> {
        if !energy.is_finite() {
            return Err(Error::InvalidParameter { field: "energy", reason: "must be finite".into() });
        }
        let d = &decomposition;
        let g = |x: f64| -> Result<f64> { Ok(x - d.q2(x)? + energy) };
        let lo = d.x_min();
        let mut prev = lo;
        let anchor = if g(lo)? >= 1.0 {
            lo
        } else {
            let mut cur = lo + 1.0;
            while g(cur)? < 1.0 {
                prev = cur;
                cur = lo + 2.0 * (cur - lo);
                if cur > 1e12 {
                    return Err(Error::domain("x − q₂(x) + E stays below 1 up to x = 1e12"));
                }
            }
            let (mut a, mut b) = (prev, cur);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if g(m)? >= 1.0 {
                    b = m;
                } else {
                    a = m;
                }
            }
            b
        };
        Ok(WkbSolution { decomposition, energy, anchor })
    }

    pub fn with_anchor(decomposition: Decomposition, energy: f64, anchor: f64) -> Result<Self> {
        if !(anchor >= decomposition.x_min()) || !anchor.is_finite() {
            return Err(Error::domain(format!("anchor {anchor} below {}", decomposition.x_min())));
        }
        Ok(WkbSolution { decomposition, energy, anchor })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }

    fn root_argument(&self, x: f64) -> Result<f64> {
        let g = x - self.decomposition.q2(x)? + self.energy;
        if !(g > 0.0) {
            return Err(Error::domain(format!("x − q₂(x) + E = {g} is not positive at t = {x}")));
        }
        Ok(g)
    }

    /// `(x − q₂ + E)^{-1/4}`.
    pub fn amplitude(&self, x: f64) -> Result<f64> {
        Ok(self.root_argument(x)?.powf(-0.25))
    }

    /// `∫ₐᵇ [√(t − q₂ + E) − q₁/(2√(t − q₂ + E))] dt`.
    pub fn phase_between(&self, a: f64, b: f64) -> Result<f64> {
        let d = &self.decomposition;
        let lo = a.min(b);
        if lo < d.x_min() {
            return Err(Error::domain(format!("phase requested below x = {}", d.x_min())));
        }
        let failure: Cell<Option<Error>> = Cell::new(None);
        let integrand = |t: f64| -> f64 {
            let eval = || -> Result<f64> {
                let q = d.q(t)?;
                let q2 = d.q2(t)?;
                let g = t - q2 + self.energy;
                if !(g > 0.0) {
                    return Err(Error::domain(format!("x − q₂(x) + E = {g} is not positive at t = {t}")));
                }
                let r = g.sqrt();
                Ok(r - (q - q2) / (2.0 * r))
            };
            eval().unwrap_or_else(|e| {
                let prior = failure.take();
                failure.set(Some(prior.unwrap_or(e)));
                0.0
            })
        };
        let est = quadrature::integrate(integrand, a, b, PHASE_ABS_TOL, PHASE_REL_TOL);
        match failure.take() {
            Some(e) => Err(e),
            None => Ok(est.value),
        }
    }

    /// `φ(x, E)` from the anchor.
    pub fn phase(&self, x: f64) -> Result<f64> {
        self.phase_between(self.anchor, x)
    }

    /// Phases at increasing points, accumulated interval by interval.
    pub fn phases(&self, xs: &[f64]) -> Result<Vec<f64>> {
        if xs.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidParameter { field: "points", reason: "must be non-decreasing".into() });
        }
        let mut out = Vec::with_capacity(xs.len());
        let mut last = (self.anchor, 0.0);
        for &x in xs {
            let p = last.1 + self.phase_between(last.0, x)?;
            out.push(p);
            last = (x, p);
        }
        Ok(out)
    }

    pub fn eval(&self, x: f64) -> Result<Complex64> {
        Ok(Complex64::from_polar(self.amplitude(x)?, self.phase(x)?))
    }

    /// `u₊` at increasing points.
    pub fn eval_many(&self, xs: &[f64]) -> Result<Vec<Complex64>> {
        let phases = self.phases(xs)?;
        xs.iter().zip(phases).map(|(&x, p)| Ok(Complex64::from_polar(self.amplitude(x)?, p))).collect()
    }
}

/// `φ(x, E)` with the default anchor.
pub fn wkb_phase(d: &Decomposition, energy: f64, x: f64) -> Result<f64> {
    WkbSolution::new(d.clone(), energy)?.phase(x)
}

/// `u₊(x)` with the default anchor.
pub fn wkb_eval(d: &Decomposition, energy: f64, x: f64) -> Result<Complex64> {
    WkbSolution::new(d.clone(), energy)?.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{AnalyticPotential, PotentialSpec};
    use crate::wkb::decompose;

    fn zero() -> Decomposition {
        decompose(&PotentialSpec::Zero, None).unwrap()
    }

    #[test]
    fn free_phase_from_origin() {
        let w = WkbSolution::with_anchor(zero(), 0.0, 0.0).unwrap();
        for x in [1.0f64, 16.0, 900.0] {
            let expect = 2.0 / 3.0 * x * x.sqrt();
            assert!((w.phase(x).unwrap() - expect).abs() < 1e-9 * expect);
        }
        assert!((w.eval(16.0).unwrap().norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn free_phase_with_energy() {
        for e in [-3.0, 0.5, 2.0] {
            let x0 = f64::max(0.0, -e);
            let w = WkbSolution::with_anchor(zero(), e, x0).unwrap();
            for x in [10.0, 123.0] {
                let expect = 2.0 / 3.0 * ((x + e).powf(1.5) - (x0 + e).powf(1.5));
                assert!((w.phase(x).unwrap() - expect).abs() < 1e-9 * expect, "E = {e}");
            }
        }
    }

    #[test]
    fn default_anchor_is_unit_root() {
        let w = WkbSolution::new(zero(), -4.0).unwrap();
        assert!((w.anchor() - 5.0).abs() < 1e-12);
        let w = WkbSolution::new(zero(), 2.0).unwrap();
        assert_eq!(w.anchor(), 0.0);
    }

    #[test]
    fn negative_root_is_named() {
        let w = WkbSolution::with_anchor(zero(), -4.0, 1.0).unwrap();
        match w.phase(10.0) {
            Err(Error::Domain(m)) => assert!(m.contains("at t = ")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cumulative_matches_direct() {
        let spec = PotentialSpec::Analytic(AnalyticPotential::sine(0.7, 1.3));
        let w = WkbSolution::new(decompose(&spec, None).unwrap(), 1.0).unwrap();
        let xs = [5.0, 20.0, 21.5, 100.0];
        let c = w.phases(&xs).unwrap();
        for (x, p) in xs.iter().zip(c) {
            assert!((w.phase(*x).unwrap() - p).abs() < 1e-8);
        }
    }
}
