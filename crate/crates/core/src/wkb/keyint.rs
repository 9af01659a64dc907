use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{IntegrationConfig, ModifiedPruferSolver, PruferSolver};
use crate::potentials::PotentialSpec;
use crate::transforms::{PruferState, XI_MIN};

/// Partial key integrals `∫₁ᴺ V sin 2θ dξ` and, where a derivative exists,
/// `∫₁ᴺ V′/(1−V) cos 2θ̃ dξ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyintPartials {
    pub energy: f64,
    pub beta: f64,
    pub n: Vec<f64>,
    pub keyint: Vec<f64>,
    pub keyint1: Option<Vec<f64>>,
    /// Why the modified variant is missing, if it is.
    pub keyint1_note: Option<String>,
}

fn spread(n: &[f64], values: &[f64], from: f64, to: f64) -> f64 {
    let (lo, hi) = n
        .iter()
        .zip(values)
        .filter(|(&x, _)| x >= from && x <= to)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, &v)| (lo.min(v), hi.max(v)));
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

impl KeyintPartials {
    /// `max − min` of the partials with `N ∈ [from, to]`.
    pub fn variation(&self, from: f64, to: f64) -> f64 {
        spread(&self.n, &self.keyint, from, to)
    }

    pub fn variation1(&self, from: f64, to: f64) -> Option<f64> {
        self.keyint1.as_ref().map(|k| spread(&self.n, k, from, to))
    }
}

pub fn keyint_partial(
    spec: &PotentialSpec,
    energy: f64,
    beta: f64,
    n: &[f64],
    cfg: &IntegrationConfig,
) -> Result<KeyintPartials> {
    if n.is_empty() || n.windows(2).any(|w| !(w[0] < w[1])) || !(n[0] >= XI_MIN) || !n[n.len() - 1].is_finite() {
        return Err(Error::InvalidParameter {
            field: "N list",
            reason: format!("must be strictly increasing, finite and >= {XI_MIN}"),
        });
    }
    let mut solver = PruferSolver::new(spec, energy, XI_MIN, PruferState { log_r: 0.0, theta: beta }, cfg)?;
    let mut keyint = Vec::with_capacity(n.len());
    for &target in n {
        solver.advance(target, |_, _, _| {})?;
        keyint.push(solver.keyint());
    }
    let (keyint1, keyint1_note) = if spec.has_derivative() {
        let run = || -> Result<Vec<f64>> {
            let mut m = ModifiedPruferSolver::new(spec, energy, XI_MIN, beta, cfg)?;
            n.iter()
                .map(|&target| {
                    m.advance(target, |_, _, _| {})?;
                    Ok(m.keyint())
                })
                .collect()
        };
        match run() {
            Ok(k) => (Some(k), None),
            Err(e @ Error::RepresentationInvalid { .. }) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        }
    } else {
        (None, Some("no derivative sampler".into()))
    };
    Ok(KeyintPartials { energy, beta, n: n.to_vec(), keyint, keyint1, keyint1_note })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_spec_partials_settle() {
        let n: Vec<f64> = (0..=20).map(|i| 10f64.powf(3.0 + 0.1 * i as f64)).collect();
        let k = keyint_partial(&PotentialSpec::Zero, 1.0, 0.3, &n, &IntegrationConfig::default()).unwrap();
        assert!(k.variation(1e3, 1e5) < 0.1, "{}", k.variation(1e3, 1e5));
        assert!(k.keyint1.is_some());
    }

    #[test]
    fn unsorted_grid_rejected() {
        let cfg = IntegrationConfig::default();
        assert!(keyint_partial(&PotentialSpec::Zero, 0.0, 0.0, &[10.0, 5.0], &cfg).is_err());
        assert!(keyint_partial(&PotentialSpec::Zero, 0.0, 0.0, &[0.5], &cfg).is_err());
    }
}
