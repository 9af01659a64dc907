use serde::Serialize;

use crate::error::{Error, Result};
use crate::potentials::{BumpFunction, PotentialSpec};
use crate::quadrature::UnitRule;

/// Gauss–Legendre nodes across the mollifier window.
pub const MOLLIFIER_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// `q₂ = q`, `q₁ = 0`.
    Analytic,
    /// `q₂ = η_x * q` with window width `x^{-1/2}`.
    Mollified,
}

/// Largest sampled `|q₂(x)|/x` on `x ≥ x_zeta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZetaEstimate {
    pub zeta: f64,
    pub x_zeta: f64,
}

/// Split `q = q₁ + q₂` into a small-in-average part and a slowly varying part.
#[derive(Debug, Clone)]
pub struct Decomposition {
    spec: PotentialSpec,
    eta: BumpFunction,
    provenance: Provenance,
    rule: UnitRule,
}

fn default_mollifier() -> BumpFunction {
    BumpFunction::standard(1.0).and_then(|b| b.normalized()).expect("standard bump has a nonzero integral")
}

/// Analytic split for `Zero` and `PowerDecay`, whose `x^{-1}q′(x²)` is
/// integrable; mollification with `eta` for everything else.
pub fn decompose(spec: &PotentialSpec, eta: Option<BumpFunction>) -> Result<Decomposition> {
    match spec {
        PotentialSpec::Zero | PotentialSpec::PowerDecay { .. } => Decomposition::analytic(spec),
        _ => mollify_decompose(spec, eta.unwrap_or_else(default_mollifier)),
    }
}

/// `q₂(x) = x^{1/2} ∫ η(x^{1/2}(x − y)) q(y) dy`, `q₁ = q − q₂`.
pub fn mollify_decompose(spec: &PotentialSpec, eta: BumpFunction) -> Result<Decomposition> {
    if (eta.integral() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter {
            field: "mollifier",
            reason: format!("must integrate to 1, got {}", eta.integral()),
        });
    }
    Ok(Decomposition {
        spec: spec.clone(),
        eta,
        provenance: Provenance::Mollified,
        rule: UnitRule::new(MOLLIFIER_NODES),
    })
}

impl Decomposition {
    /// `q₂ = q`; needs an exact derivative.
    pub fn analytic(spec: &PotentialSpec) -> Result<Self> {
        if !spec.has_derivative() {
            return Err(Error::Incompatible(format!(
                "{} has no derivative sampler for an analytic split",
                spec.label()
            )));
        }
        Ok(Decomposition {
            spec: spec.clone(),
            eta: default_mollifier(),
            provenance: Provenance::Analytic,
            rule: UnitRule::new(1),
        })
    }

    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn mollifier(&self) -> &BumpFunction {
        &self.eta
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Smallest `x` at which the samplers are defined.
    pub fn x_min(&self) -> f64 {
        match self.provenance {
            Provenance::Analytic => 0.0,
            Provenance::Mollified => 1.0,
        }
    }

    fn check(&self, x: f64) -> Result<()> {
        if !x.is_finite() || x < self.x_min() {
            return Err(Error::domain(format!("decomposition sampled at x = {x}, below {}", self.x_min())));
        }
        Ok(())
    }

    pub fn q(&self, x: f64) -> Result<f64> {
        self.spec.eval(x)
    }

    pub fn q2(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(match self.provenance {
            Provenance::Analytic => self.spec.eval_unchecked(x),
            Provenance::Mollified => {
                let w = x.sqrt().recip();
                self.rule.integrate(0.0, 1.0, |s| self.eta.eval(s) * self.spec.eval_unchecked(x - s * w))
            }
        })
    }

    pub fn q1(&self, x: f64) -> Result<f64> {
        Ok(self.q(x)? - self.q2(x)?)
    }

    /// `q₂′(x)`, for the mollified split from the three-term formula
    /// `q₂/(2x) + x^{1/2}∫η′(s)(q(y) − q(x))ds + (2x)^{-1}∫sη′(s)q(y)ds`
    /// with `y = x − s x^{-1/2}`.
    pub fn q2_prime(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        match self.provenance {
            Provenance::Analytic => {
                self.spec.derivative(x).ok_or_else(|| Error::Incompatible("analytic split without derivative".into()))
            }
            Provenance::Mollified => {
                let r = x.sqrt();
                let qx = self.spec.eval_unchecked(x);
                let (mut t1, mut t2, mut t3) = (0.0, 0.0, 0.0);
                for (&s, &w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                    let qy = self.spec.eval_unchecked(x - s / r);
                    let e = self.eta.eval(s);
                    let de = self.eta.derivative(s);
                    t1 += w * e * qy;
                    t2 += w * de * (qy - qx);
                    t3 += w * s * de * qy;
                }
                Ok(t1 / (2.0 * x) + r * t2 + t3 / (2.0 * x))
            }
        }
    }

    /// Sampled `sup |q₂(x)|/x` over a geometric grid on `[from, to]`.
    pub fn zeta(&self, from: f64, to: f64, points: usize) -> Result<ZetaEstimate> {
        if !(from >= self.x_min().max(f64::MIN_POSITIVE) && to > from && points >= 2) {
            return Err(Error::InvalidParameter {
                field: "zeta grid",
                reason: format!("need x_min <= from < to and >= 2 points, got [{from}, {to}] x {points}"),
            });
        }
        let mut zeta = 0.0f64;
        for i in 0..points {
            let x = from * (to / from).powf(i as f64 / (points - 1) as f64);
            zeta = zeta.max(self.q2(x)?.abs() / x);
        }
        Ok(ZetaEstimate { zeta, x_zeta: from })
    }
}
