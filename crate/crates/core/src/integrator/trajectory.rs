use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;
use crate::transforms::{
    effective_potential_unchecked, phi_from_modified_prufer, phi_from_prufer, phi_pair_of_u, u_pair_of_phi,
    x_of_xi_unchecked, ModifiedPruferState, PruferState,
};

/// Captured states, in the representation they were integrated in.
#[derive(Debug, Clone)]
pub enum States {
    Prufer(Vec<PruferState>),
    ModifiedPrufer(Vec<ModifiedPruferState>),
    /// `(u, du/dx)`.
    Direct(Vec<[f64; 2]>),
}

/// A sampled solution at fixed energy.
#[derive(Debug, Clone)]
pub struct Trajectory {
    spec: PotentialSpec,
    energy: f64,
    beta: Option<f64>,
    xi: Vec<f64>,
    x: Vec<f64>,
    states: States,
    keyint: Option<Vec<f64>>,
    steps: u64,
}

impl Trajectory {
    pub(crate) fn new(
        spec: PotentialSpec,
        energy: f64,
        beta: Option<f64>,
        xi: Vec<f64>,
        states: States,
        keyint: Option<Vec<f64>>,
        steps: u64,
    ) -> Self {
        let x = xi.iter().map(|&s| x_of_xi_unchecked(s)).collect();
        Trajectory { spec, energy, beta, xi, x, states, keyint, steps }
    }

    pub(crate) fn set_x(&mut self, x: Vec<f64>) {
        debug_assert_eq!(x.len(), self.xi.len());
        self.x = x;
    }

    /// A trajectory from samples of `(u, u′)` on an increasing ξ-grid.
    pub fn from_samples(spec: PotentialSpec, energy: f64, xi: Vec<f64>, u: Vec<f64>, du: Vec<f64>) -> Result<Self> {
        if xi.len() != u.len() || xi.len() != du.len() || xi.is_empty() {
            return Err(Error::InvalidParameter {
                field: "samples",
                reason: "grid and value arrays must be non-empty and of equal length".into(),
            });
        }
        if xi.windows(2).any(|w| !(w[0] < w[1])) || !(xi[0] > 0.0) {
            return Err(Error::InvalidParameter {
                field: "samples",
                reason: "grid must be positive and strictly increasing".into(),
            });
        }
        if let Some(i) = u.iter().zip(&du).position(|(a, b)| !(a.is_finite() && b.is_finite())) {
            return Err(Error::NonFinite { at: xi[i] });
        }
        let states = u.into_iter().zip(du).map(|(a, b)| [a, b]).collect();
        Ok(Trajectory::new(spec, energy, None, xi, States::Direct(states), None, 0))
    }

    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn states(&self) -> &States {
        &self.states
    }

    /// `∫_{ξ₀}^{ξ} V sin 2θ` (Prüfer) or `∫ V′/(1−V) cos 2θ̃` (modified).
    pub fn keyint(&self) -> Option<&[f64]> {
        self.keyint.as_deref()
    }

    /// Accepted integrator steps.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// `(φ, dφ/dξ)` at sample `i`.
    pub fn phi_pair(&self, i: usize) -> (f64, f64) {
        match &self.states {
            States::Prufer(s) => phi_from_prufer(s[i]),
            States::ModifiedPrufer(s) => {
                let v = effective_potential_unchecked(&self.spec, self.xi[i], self.energy);
                phi_from_modified_prufer(s[i], v).unwrap_or((f64::NAN, f64::NAN))
            }
            States::Direct(s) => phi_pair_of_u(self.x[i], s[i][0], s[i][1]),
        }
    }

    /// `(u, du/dx)` at sample `i`.
    pub fn u_pair(&self, i: usize) -> (f64, f64) {
        match &self.states {
            States::Direct(s) => (s[i][0], s[i][1]),
            _ => {
                let (p, dp) = self.phi_pair(i);
                u_pair_of_phi(self.x[i], p, dp)
            }
        }
    }

    pub fn u(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.u_pair(i).0).collect()
    }

    pub fn du(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.u_pair(i).1).collect()
    }

    pub fn phi(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.phi_pair(i).0).collect()
    }

    pub fn dphi(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.phi_pair(i).1).collect()
    }

    /// `log R` at sample `i`, whatever the representation.
    pub fn log_r(&self, i: usize) -> f64 {
        match &self.states {
            States::Prufer(s) => s[i].log_r,
            _ => {
                let (p, dp) = self.phi_pair(i);
                p.hypot(dp).ln()
            }
        }
    }

    /// CSV with columns `xi,x,logR,theta` (Prüfer) or `xi,x,u,du` (direct),
    /// 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        match &self.states {
            States::Prufer(s) => {
                writeln!(w, "xi,x,logR,theta")?;
                for i in 0..self.len() {
                    writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", self.xi[i], self.x[i], s[i].log_r, s[i].theta)?;
                }
            }
            States::ModifiedPrufer(s) => {
                writeln!(w, "xi,x,logR_mod,theta_mod")?;
                for i in 0..self.len() {
                    writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", self.xi[i], self.x[i], s[i].log_r, s[i].theta)?;
                }
            }
            States::Direct(s) => {
                writeln!(w, "xi,x,u,du")?;
                for i in 0..self.len() {
                    writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", self.xi[i], self.x[i], s[i][0], s[i][1])?;
                }
            }
        }
        Ok(())
    }

    /// Little-endian binary: magic `STKT`, `u8` kind (0 Prüfer, 1 modified,
    /// 2 direct), 3 zero bytes, `u64` count, `f64` energy, then `count`
    /// records of four `f64` in CSV column order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        let kind: u8 = match self.states {
            States::Prufer(_) => 0,
            States::ModifiedPrufer(_) => 1,
            States::Direct(_) => 2,
        };
        w.write_all(b"STKT")?;
        w.write_all(&[kind, 0, 0, 0])?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&self.energy.to_le_bytes())?;
        for i in 0..self.len() {
            let (a, b) = match &self.states {
                States::Prufer(s) => (s[i].log_r, s[i].theta),
                States::ModifiedPrufer(s) => (s[i].log_r, s[i].theta),
                States::Direct(s) => (s[i][0], s[i][1]),
            };
            for v in [self.xi[i], self.x[i], a, b] {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// `u₁u₂′ − u₁′u₂` on the shared grid.
pub fn wronskian(t1: &Trajectory, t2: &Trajectory) -> Result<Vec<f64>> {
    if t1.energy != t2.energy {
        return Err(Error::Incompatible(format!("energies differ: {} vs {}", t1.energy, t2.energy)));
    }
    if !t1.spec.same_as(&t2.spec) {
        return Err(Error::Incompatible("trajectories use different potentials".into()));
    }
    if t1.len() != t2.len() || t1.xi.iter().zip(&t2.xi).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0)) {
        return Err(Error::Incompatible("trajectories are sampled on different grids".into()));
    }
    Ok((0..t1.len())
        .map(|i| match (&t1.states, &t2.states) {
            (States::Prufer(a), States::Prufer(b)) => (a[i].log_r + b[i].log_r).exp() * (a[i].theta - b[i].theta).sin(),
            _ => {
                let (p1, dp1) = t1.phi_pair(i);
                let (p2, dp2) = t2.phi_pair(i);
                p1 * dp2 - dp1 * p2
            }
        })
        .collect())
}

/// Cumulative `∫|u|² dx` and its log-log growth exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    pub l: Vec<f64>,
    /// `log ∫_{x₀}^{L} |u|² dx`.
    pub values: Vec<f64>,
    pub exponent: f64,
    /// Slope of `log(I(L) − I(L/10))` against `log L`.
    pub window_slope: f64,
    /// Intercept of the window fit.
    pub intercept: f64,
    /// RMS residual of the fit.
    pub residual: f64,
    /// Left end of the fitted range.
    pub fit_from: f64,
}

/// Ordinary least squares `y ≈ a + b t`; returns `(b, a, rms residual)`.
pub(crate) fn line_fit(t: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = t.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mt = t.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut stt, mut sty) = (0.0, 0.0);
    for (a, b) in t.iter().zip(y) {
        stt += (a - mt) * (a - mt);
        sty += (a - mt) * (b - my);
    }
    if stt == 0.0 {
        return None;
    }
    let slope = sty / stt;
    let icpt = my - slope * mt;
    let rss: f64 = t.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    Some((slope, icpt, (rss / nf).sqrt()))
}

/// `log I(L/10)` by linear interpolation in `log L`, or `None` below the grid.
fn log_i_tenth(l: &[f64], log_i: &[f64], at: f64) -> Option<f64> {
    let at = at / 10.0;
    if at < l[0] * (1.0 - 1e-12) {
        return None;
    }
    let j = l.partition_point(|&v| v < at).clamp(1, l.len() - 1);
    let w = (at.ln() - l[j - 1].ln()) / (l[j].ln() - l[j - 1].ln());
    Some(log_i[j - 1] + w.clamp(0.0, 1.0) * (log_i[j] - log_i[j - 1]))
}

/// Growth exponent of `I(L)` from the decade windows `I(L) − I(L/10)` over
/// the top two decades of `L`. The windows drop the constant contributed by
/// the lower limit, which otherwise biases log-log slopes at moderate `L`.
/// A negative window slope means `I` converges, so the exponent is clamped at 0.
pub(crate) fn fit_growth(l: &[f64], log_i: Vec<f64>) -> Result<GrowthFit> {
    if l.len() != log_i.len() || l.len() < 2 {
        return Err(Error::FitFailure("L grid and values differ in length or are too short".into()));
    }
    let l_max = l[l.len() - 1];
    let from = l_max / 100.0;
    let mut t = Vec::new();
    let mut y = Vec::new();
    for (i, &at) in l.iter().enumerate() {
        if at < from * (1.0 - 1e-12) {
            continue;
        }
        let Some(lower) = log_i_tenth(l, &log_i, at) else { continue };
        let gap = -(lower - log_i[i]).exp();
        if !(gap > -1.0) {
            return Err(Error::FitFailure(format!("∫|u|² does not increase over [{:.4e}, {at:.4e}]", at / 10.0)));
        }
        t.push(at.ln());
        y.push(log_i[i] + gap.ln_1p());
    }
    if t.len() < 3 {
        return Err(Error::FitFailure(format!(
            "need at least 3 L values in [{from}, {l_max}] with L/10 on the grid, got {}",
            t.len()
        )));
    }
    let (slope, intercept, residual) = line_fit(&t, &y).ok_or_else(|| Error::FitFailure("degenerate L grid".into()))?;
    Ok(GrowthFit {
        l: l.to_vec(),
        values: log_i,
        exponent: slope.max(0.0),
        window_slope: slope,
        intercept,
        residual,
        fit_from: from,
    })
}

pub fn l2_growth(traj: &Trajectory, l_grid: &[f64]) -> Result<GrowthFit> {
    if l_grid.is_empty() || l_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter { field: "L grid", reason: "must be non-empty and increasing".into() });
    }
    let x = traj.x();
    let (x_lo, x_hi) = (x[0], x[x.len() - 1]);
    if l_grid[0] <= x_lo || l_grid[l_grid.len() - 1] > x_hi * (1.0 + 1e-12) {
        return Err(Error::domain(format!(
            "L grid [{}, {}] is not inside the trajectory's x range [{x_lo}, {x_hi}]",
            l_grid[0],
            l_grid[l_grid.len() - 1]
        )));
    }
    let l_max = l_grid[l_grid.len() - 1];
    let mut decade = l_max / 100.0;
    while decade < l_max * (1.0 - 1e-9) {
        let hi = (decade * 10.0).min(l_max);
        let count = x.iter().filter(|&&v| v >= decade && v <= hi).count();
        if count < 10 {
            return Err(Error::Resolution(format!(
                "only {count} samples in x ∈ [{decade:.4e}, {hi:.4e}]; need 10 per decade"
            )));
        }
        decade = hi;
    }
    // trapezoid of u² in x
    let u = traj.u();
    let mut cum = vec![0.0; x.len()];
    for i in 1..x.len() {
        cum[i] = cum[i - 1] + 0.5 * (u[i - 1] * u[i - 1] + u[i] * u[i]) * (x[i] - x[i - 1]);
    }
    let values: Vec<f64> = l_grid
        .iter()
        .map(|&l| {
            let j = x.partition_point(|&v| v < l).clamp(1, x.len() - 1);
            let w = (l - x[j - 1]) / (x[j] - x[j - 1]);
            let part =
                0.5 * (u[j - 1] * u[j - 1] + (u[j - 1] * u[j - 1] * (1.0 - w) + u[j] * u[j] * w)) * (l - x[j - 1]);
            (cum[j - 1] + part).ln()
        })
        .collect();
    fit_growth(l_grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::xi_of_x;

    fn synthetic(u: impl Fn(f64) -> f64) -> Trajectory {
        let xi: Vec<f64> = (0..=200_000).map(|k| 1.0 + 0.5 * k as f64).collect();
        let x: Vec<f64> = xi.iter().map(|&s| x_of_xi_unchecked(s)).collect();
        let uu = x.iter().map(|&v| u(v)).collect();
        Trajectory::from_samples(PotentialSpec::Zero, 0.0, xi, uu, vec![0.0; x.len()]).unwrap()
    }

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn constant_solution_grows_linearly() {
        let t = synthetic(|_| 1.0);
        let hi = *t.x().last().unwrap();
        let g = l2_growth(&t, &log_grid(2.0, hi, 40)).unwrap();
        assert!((g.exponent - 1.0).abs() < 0.02, "{}", g.exponent);
    }

    #[test]
    fn lower_limit_does_not_bias_the_exponent() {
        // ∫₁^L x^{-1/2} = 2√L − 2; a plain log-log fit over L ≤ 10⁴ reads about 0.53
        let t = synthetic(|x| x.powf(-0.25));
        let hi = *t.x().last().unwrap();
        let g = l2_growth(&t, &log_grid(hi / 1e3, hi, 40)).unwrap();
        assert!((g.exponent - 0.5).abs() < 2e-3, "{}", g.exponent);
    }

    #[test]
    fn inverse_solution_is_bounded() {
        let t = synthetic(|x| 1.0 / x);
        let hi = *t.x().last().unwrap();
        let g = l2_growth(&t, &log_grid(2.0, hi, 40)).unwrap();
        assert!(g.exponent.abs() < 0.02, "{}", g.exponent);
        assert!(g.values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let xi: Vec<f64> = (0..50).map(|k| 1.0 + 1000.0 * k as f64).collect();
        let n = xi.len();
        let t = Trajectory::from_samples(PotentialSpec::Zero, 0.0, xi, vec![1.0; n], vec![0.0; n]).unwrap();
        let hi = *t.x().last().unwrap();
        assert!(matches!(l2_growth(&t, &log_grid(2.0, hi, 10)), Err(Error::Resolution(_))));
    }

    #[test]
    fn csv_and_binary_layout() {
        let xi = vec![1.0, 2.0];
        let t = Trajectory::from_samples(PotentialSpec::Zero, 0.5, xi, vec![0.1, 0.2], vec![1.0, 2.0]).unwrap();
        let mut csv = Vec::new();
        t.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("xi,x,u,du\n1.0000000000000000e0,"));
        let mut bin = Vec::new();
        t.write_binary(&mut bin).unwrap();
        assert_eq!(bin.len(), 24 + 2 * 32);
        assert_eq!(&bin[..4], b"STKT");
        assert_eq!(u64::from_le_bytes(bin[8..16].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(bin[16..24].try_into().unwrap()), 0.5);
        let x1 = f64::from_le_bytes(bin[32..40].try_into().unwrap());
        assert!((xi_of_x(x1).unwrap() - 1.0).abs() < 1e-15);
    }
}
