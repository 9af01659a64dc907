use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bump::BumpFunction;
use crate::error::{Error, Result};
use crate::LIOUVILLE_C;

type Sampler = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Blocks whose phases are precomputed when a [`RandomBump`] is built.
/// Covers ξ up to ~1.7e7; later blocks are drawn on demand.
pub const PHASE_CACHE_BLOCKS: usize = 256;

/// Phase `a_n ∈ [0, 2π)` of block `n` for realization `seed`.
///
/// ChaCha8 keyed by `seed` with stream `n`: every block is addressable without
/// generating its predecessors.
pub fn block_phase(seed: u64, n: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(n);
    TAU * rng.gen::<f64>()
}

/// A user-supplied smooth potential with an optional exact derivative.
#[derive(Clone)]
pub struct AnalyticPotential {
    name: String,
    value: Sampler,
    derivative: Option<Sampler>,
}

impl fmt::Debug for AnalyticPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticPotential")
            .field("name", &self.name)
            .field("derivative", &self.derivative.is_some())
            .finish()
    }
}

impl AnalyticPotential {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
    ) -> Self {
        AnalyticPotential { name: name.into(), value: Arc::new(value), derivative: derivative.map(Arc::from) }
    }

    /// `amplitude · sin(frequency · x)`: bounded, C^∞, Zygmund-smooth.
    pub fn sine(amplitude: f64, frequency: f64) -> Self {
        Self::new(
            format!("sine({amplitude},{frequency})"),
            move |x| amplitude * (frequency * x).sin(),
            Some(Box::new(move |x| amplitude * frequency * (frequency * x).cos())),
        )
    }

    /// `slope · x`.
    pub fn linear(slope: f64) -> Self {
        Self::new(format!("linear({slope})"), move |x| slope * x, Some(Box::new(move |_| slope)))
    }

    /// `value` everywhere.
    pub fn constant(value: f64) -> Self {
        Self::new(format!("constant({value})"), move |_| value, Some(Box::new(|_| 0.0)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }
}

/// The random bump-train
/// `q(x) = c Σₙ n^{-1/2} f(√(x/c) − n) sin((4/3) x^{3/2} + aₙ)`.
#[derive(Debug, Clone)]
pub struct RandomBump {
    bump: BumpFunction,
    seed: u64,
    coupling: f64,
    phases: Arc<Vec<f64>>,
}

impl RandomBump {
    pub fn new(bump: BumpFunction, seed: u64) -> Self {
        let phases = (0..PHASE_CACHE_BLOCKS as u64).map(|n| block_phase(seed, n)).collect();
        RandomBump { bump, seed, coupling: 1.0, phases: Arc::new(phases) }
    }

    /// Same bump and coupling, fresh phases from `seed`.
    pub fn reseeded(&self, seed: u64) -> Self {
        RandomBump::new(self.bump.clone(), seed).with_coupling(self.coupling)
    }

    /// Multiply the whole potential by `coupling`; `0` gives the zero potential
    /// while keeping the random-family code path (used as a test control).
    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    /// Replace the phase of block `n` by `phase`, leaving all others alone.
    pub fn with_phase(mut self, n: u64, phase: f64) -> Self {
        let mut phases = (*self.phases).clone();
        if n as usize >= phases.len() {
            let old = phases.len() as u64;
            phases.extend((old..=n).map(|k| block_phase(self.seed, k)));
        }
        phases[n as usize] = phase;
        self.phases = Arc::new(phases);
        self
    }

    pub fn bump(&self) -> &BumpFunction {
        &self.bump
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    #[inline]
    pub fn phase(&self, n: u64) -> f64 {
        match self.phases.get(n as usize) {
            Some(&a) => a,
            None => block_phase(self.seed, n),
        }
    }

    /// Index `n ≥ 1` of the block containing Liouville coordinate `ξ`
    /// (`n³ ≤ ξ < (n+1)³`), or `None` for `ξ < 1`.
    #[inline]
    pub fn block_of_xi(xi: f64) -> Option<u64> {
        if xi < 1.0 {
            return None;
        }
        let mut n = xi.cbrt().floor() as u64;
        // cbrt rounding near perfect cubes
        while n > 1 && (n as f64).powi(3) > xi {
            n -= 1;
        }
        while ((n + 1) as f64).powi(3) <= xi {
            n += 1;
        }
        Some(n)
    }

    /// `q(cξ^{2/3}) / (cξ^{2/3}) = ξ^{-2/3} n^{-1/2} f(ξ^{1/3} − n) sin(2ξ + aₙ)`.
    #[inline]
    pub fn eval_xi_unchecked(&self, xi: f64) -> f64 {
        let Some(n) = Self::block_of_xi(xi) else { return 0.0 };
        let r = xi.cbrt();
        let t = r - n as f64;
        let f = self.bump.eval(t);
        if f == 0.0 {
            return 0.0;
        }
        self.coupling * f * (2.0 * xi + self.phase(n)).sin() / (r * r * (n as f64).sqrt())
    }

    /// ξ-derivative of [`Self::eval_xi_unchecked`].
    pub fn derivative_xi_unchecked(&self, xi: f64) -> f64 {
        let Some(n) = Self::block_of_xi(xi) else { return 0.0 };
        let r = xi.cbrt();
        let t = r - n as f64;
        let f = self.bump.eval(t);
        let fp = self.bump.derivative(t);
        if f == 0.0 && fp == 0.0 {
            return 0.0;
        }
        let (s, c) = (2.0 * xi + self.phase(n)).sin_cos();
        let r2 = r * r;
        let d = -2.0 / 3.0 * f * s / (r2 * xi) + fp * s / (3.0 * r2 * r2) + 2.0 * f * c / r2;
        self.coupling * d / (n as f64).sqrt()
    }

    fn eval_x(&self, x: f64) -> f64 {
        let s = (x / LIOUVILLE_C).sqrt();
        if s < 1.0 {
            return 0.0;
        }
        let n = s.floor();
        let f = self.bump.eval(s - n);
        if f == 0.0 {
            return 0.0;
        }
        let phase = 4.0 / 3.0 * x * x.sqrt() + self.phase(n as u64);
        self.coupling * LIOUVILLE_C * f * phase.sin() / n.sqrt()
    }

    fn derivative_x(&self, x: f64) -> f64 {
        let s = (x / LIOUVILLE_C).sqrt();
        if s < 1.0 {
            return 0.0;
        }
        let n = s.floor();
        let t = s - n;
        let f = self.bump.eval(t);
        let fp = self.bump.derivative(t);
        let phase = 4.0 / 3.0 * x * x.sqrt() + self.phase(n as u64);
        let (sn, cs) = phase.sin_cos();
        let ds = 0.5 / (LIOUVILLE_C * s);
        self.coupling * LIOUVILLE_C * (fp * ds * sn + f * 2.0 * x.sqrt() * cs) / n.sqrt()
    }
}

/// Description of the perturbation `q(x)`.
#[derive(Debug, Clone)]
pub enum PotentialSpec {
    Zero,
    /// `amplitude · (1 + |x|)^{-exponent}`.
    PowerDecay {
        amplitude: f64,
        exponent: f64,
    },
    Analytic(AnalyticPotential),
    /// `c1 · x^{-1/2} sin(c2 · x^{3/2})` for `x > 0`, zero otherwise.
    /// `c1 = −12`, `c2 = 4/3` reproduces the Wigner–von Neumann tail
    /// `−8 sin(2ξ)/ξ` in Liouville coordinates.
    WignerVonNeumannLike {
        c1: f64,
        c2: f64,
    },
    RandomBump(RandomBump),
}

impl PotentialSpec {
    pub fn power_decay(amplitude: f64, exponent: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(Error::InvalidParameter { field: "amplitude", reason: "must be finite".into() });
        }
        if !(exponent > 0.0) || !exponent.is_finite() {
            return Err(Error::InvalidParameter {
                field: "exponent",
                reason: format!("must be positive, got {exponent}"),
            });
        }
        Ok(PotentialSpec::PowerDecay { amplitude, exponent })
    }

    /// Wigner–von Neumann-like potential resonant at `E = 0`.
    pub fn wigner_von_neumann() -> Self {
        PotentialSpec::WignerVonNeumannLike { c1: -12.0, c2: 4.0 / 3.0 }
    }

    /// `q(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::domain(format!("potential evaluated at non-finite x = {x}")));
        }
        if let PotentialSpec::RandomBump(_) = self {
            if x < 0.0 {
                return Err(Error::domain(format!("random potential needs x >= 0, got {x}")));
            }
        }
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::PowerDecay { amplitude, exponent } => amplitude * (1.0 + x.abs()).powf(-exponent),
            PotentialSpec::Analytic(a) => (a.value)(x),
            PotentialSpec::WignerVonNeumannLike { c1, c2 } => {
                if x <= 0.0 {
                    0.0
                } else {
                    c1 * (c2 * x * x.sqrt()).sin() / x.sqrt()
                }
            }
            PotentialSpec::RandomBump(r) => r.eval_x(x),
        }
    }

    /// Exact `q'(x)` for the families with a closed form.
    pub fn derivative(&self, x: f64) -> Option<f64> {
        match self {
            PotentialSpec::Zero => Some(0.0),
            PotentialSpec::PowerDecay { amplitude, exponent } => {
                let s = x.signum();
                Some(-amplitude * exponent * s * (1.0 + x.abs()).powf(-exponent - 1.0))
            }
            PotentialSpec::Analytic(a) => a.derivative.as_ref().map(|d| d(x)),
            PotentialSpec::WignerVonNeumannLike { c1, c2 } => {
                if x <= 0.0 {
                    Some(0.0)
                } else {
                    let r = x.sqrt();
                    let (s, c) = (c2 * x * r).sin_cos();
                    Some(c1 * (-0.5 * s / (x * r) + 1.5 * c2 * c))
                }
            }
            PotentialSpec::RandomBump(r) => Some(r.derivative_x(x)),
        }
    }

    pub fn has_derivative(&self) -> bool {
        !matches!(self, PotentialSpec::Analytic(a) if !a.has_derivative())
    }

    /// `q(x)` for the random family evaluated directly in ξ (see
    /// [`RandomBump::eval_xi_unchecked`]).
    pub fn eval_random_in_xi(&self, xi: f64) -> Result<f64> {
        let PotentialSpec::RandomBump(r) = self else {
            return Err(Error::Incompatible("eval_random_in_xi needs a RandomBump spec".into()));
        };
        if !(xi >= 1.0) {
            return Err(Error::domain(format!("xi = {xi} is below the transform region xi >= 1")));
        }
        Ok(r.eval_xi_unchecked(xi))
    }

    /// Structural identity: same variant and parameters; analytic samplers
    /// compare by pointer.
    pub fn same_as(&self, other: &PotentialSpec) -> bool {
        match (self, other) {
            (PotentialSpec::Zero, PotentialSpec::Zero) => true,
            (
                PotentialSpec::PowerDecay { amplitude: a1, exponent: e1 },
                PotentialSpec::PowerDecay { amplitude: a2, exponent: e2 },
            ) => a1 == a2 && e1 == e2,
            (PotentialSpec::Analytic(a), PotentialSpec::Analytic(b)) => Arc::ptr_eq(&a.value, &b.value),
            (
                PotentialSpec::WignerVonNeumannLike { c1: a1, c2: a2 },
                PotentialSpec::WignerVonNeumannLike { c1: b1, c2: b2 },
            ) => a1 == b1 && a2 == b2,
            (PotentialSpec::RandomBump(a), PotentialSpec::RandomBump(b)) => {
                a.seed == b.seed
                    && a.coupling == b.coupling
                    && a.bump == b.bump
                    && (Arc::ptr_eq(&a.phases, &b.phases) || a.phases == b.phases)
            }
            _ => false,
        }
    }

    /// Short human-readable tag.
    pub fn label(&self) -> String {
        match self {
            PotentialSpec::Zero => "zero".into(),
            PotentialSpec::PowerDecay { amplitude, exponent } => {
                format!("power_decay(C={amplitude},alpha={exponent})")
            }
            PotentialSpec::Analytic(a) => format!("analytic({})", a.name),
            PotentialSpec::WignerVonNeumannLike { c1, c2 } => format!("wvn_like(C1={c1},C2={c2})"),
            PotentialSpec::RandomBump(r) => format!("random_bump(seed={})", r.seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::x_of_xi;

    fn random(seed: u64) -> PotentialSpec {
        PotentialSpec::RandomBump(RandomBump::new(BumpFunction::default(), seed))
    }

    #[test]
    fn trivial_values() {
        assert_eq!(PotentialSpec::Zero.eval(5.0).unwrap(), 0.0);
        let p = PotentialSpec::power_decay(1.0, 0.3).unwrap();
        assert_eq!(p.eval(0.0).unwrap(), 1.0);
        assert!(PotentialSpec::Zero.eval(f64::NAN).is_err());
        assert!(random(1).eval(-1.0).is_err());
    }

    #[test]
    fn negative_exponent_rejected() {
        let err = PotentialSpec::power_decay(1.0, -1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "exponent", .. }));
    }

    #[test]
    fn random_vanishes_between_blocks() {
        let q = random(3);
        // √(x/c) = 5 exactly is a block edge
        let x = 25.0 * LIOUVILLE_C;
        assert_eq!(q.eval(x).unwrap(), 0.0);
        // below the first block
        assert_eq!(q.eval(0.5).unwrap(), 0.0);
    }

    #[test]
    fn xi_evaluation_matches_x_evaluation() {
        let q = random(42);
        for &xi in &[1.5, 9.7, 123.4, 2000.0, 5.0e4, 3.3e5] {
            let direct = q.eval_random_in_xi(xi).unwrap() * LIOUVILLE_C * xi.powf(2.0 / 3.0);
            let via_x = q.eval(x_of_xi(xi).unwrap()).unwrap();
            let scale = direct.abs().max(1e-3);
            assert!((direct - via_x).abs() < 1e-10 * scale.max(1.0), "xi={xi}: {direct} vs {via_x}");
        }
    }

    #[test]
    fn block_edges_are_zero_and_midpoints_are_not() {
        let q = random(7);
        assert_eq!(q.eval_random_in_xi(1000.0).unwrap(), 0.0);
        let mid = 10.5f64.powi(3);
        let v = q.eval_random_in_xi(mid).unwrap();
        // single active term, computed by hand
        let PotentialSpec::RandomBump(r) = &q else { unreachable!() };
        let f = r.bump().eval(0.5);
        let expected = mid.powf(-2.0 / 3.0) * f * (2.0 * mid + r.phase(10)).sin() / 10f64.sqrt();
        assert!((v - expected).abs() < 1e-15);
        assert!(v != 0.0);
    }

    #[test]
    fn random_xi_below_one_rejected() {
        assert!(random(1).eval_random_in_xi(0.5).is_err());
        assert!(PotentialSpec::Zero.eval_random_in_xi(5.0).is_err());
    }

    #[test]
    fn block_index() {
        assert_eq!(RandomBump::block_of_xi(0.9), None);
        assert_eq!(RandomBump::block_of_xi(1.0), Some(1));
        assert_eq!(RandomBump::block_of_xi(7.999), Some(1));
        assert_eq!(RandomBump::block_of_xi(8.0), Some(2));
        assert_eq!(RandomBump::block_of_xi(1_000_000.0), Some(100));
        assert_eq!(RandomBump::block_of_xi(999_999.999), Some(99));
    }

    #[test]
    fn phases_are_seeded() {
        assert_eq!(block_phase(5, 17).to_bits(), block_phase(5, 17).to_bits());
        assert_ne!(block_phase(5, 17), block_phase(6, 17));
        assert_ne!(block_phase(5, 17), block_phase(5, 18));
        let r = RandomBump::new(BumpFunction::default(), 9);
        assert_eq!(r.phase(3), block_phase(9, 3));
        assert_eq!(r.phase(10_000), block_phase(9, 10_000));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let specs = [PotentialSpec::power_decay(2.0, 0.3).unwrap(), PotentialSpec::wigner_von_neumann(), random(11)];
        for s in &specs {
            for &x in &[3.7, 25.2, 140.9] {
                let h = 1e-6;
                let fd = (s.eval(x + h).unwrap() - s.eval(x - h).unwrap()) / (2.0 * h);
                let d = s.derivative(x).unwrap();
                assert!((fd - d).abs() < 1e-5 * (1.0 + d.abs()), "{}: x={x} {fd} {d}", s.label());
            }
        }
        let r = RandomBump::new(BumpFunction::default(), 4);
        for &xi in &[8.9, 1200.5, 30_000.25] {
            let h = 1e-6;
            let fd = (r.eval_xi_unchecked(xi + h) - r.eval_xi_unchecked(xi - h)) / (2.0 * h);
            let d = r.derivative_xi_unchecked(xi);
            assert!((fd - d).abs() < 1e-6 * (1.0 + d.abs()), "xi={xi}");
        }
    }
}
