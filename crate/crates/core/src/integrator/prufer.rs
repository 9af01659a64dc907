use std::cell::Cell;
use std::rc::Rc;

use super::dopri::Dopri5;
use super::trajectory::{States, Trajectory};
use super::IntegrationConfig;
use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;
use crate::transforms::{
    effective_potential_derivative, effective_potential_unchecked, x_of_xi_unchecked, xi_of_x, ModifiedPruferState,
    PruferState, XI_MIN,
};
use crate::LIOUVILLE_C;

type Field<'a, const N: usize> = Box<dyn FnMut(f64, &[f64; N]) -> [f64; N] + 'a>;

/// Which samples of a run are kept.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Capture {
    /// Overrides the configured stride.
    pub stride: Option<f64>,
    /// ξ-intervals to keep; empty keeps everything.
    pub windows: Vec<(f64, f64)>,
}

impl Capture {
    pub fn every(stride: f64) -> Self {
        Capture { stride: Some(stride), windows: Vec::new() }
    }

    pub fn windows(windows: Vec<(f64, f64)>) -> Self {
        Capture { stride: None, windows }
    }
}

/// Walks the grid `origin + k·stride`, restricted to optional windows.
#[derive(Debug, Clone)]
struct Cursor {
    origin: f64,
    stride: f64,
    k: u64,
    windows: Vec<(f64, f64)>,
}

impl Cursor {
    fn new(origin: f64, stride: f64, mut windows: Vec<(f64, f64)>) -> Self {
        windows.sort_by(|a, b| a.0.total_cmp(&b.0));
        Cursor { origin, stride, k: 1, windows }
    }

    fn peek(&mut self) -> Option<f64> {
        loop {
            let p = self.origin + self.k as f64 * self.stride;
            if self.windows.is_empty() {
                return Some(p);
            }
            let w = self.windows.iter().find(|w| w.1 >= p)?;
            if p >= w.0 {
                return Some(p);
            }
            let k = ((w.0 - self.origin) / self.stride).ceil() as u64;
            self.k = k.max(self.k + 1);
        }
    }
}

/// An adaptive run that reports samples on a ξ-grid and at every target.
struct Stream<'a, const N: usize> {
    solver: Dopri5<N, Field<'a, N>>,
    cursor: Cursor,
    to_t: fn(f64) -> f64,
}

impl<'a, const N: usize> Stream<'a, N> {
    fn advance<O: FnMut(f64, f64, &[f64; N])>(&mut self, target_xi: f64, mut observer: O) -> Result<()> {
        let target_t = (self.to_t)(target_xi);
        let cursor = &mut self.cursor;
        let to_t = self.to_t;
        self.solver.advance(target_t, |step| {
            while let Some(p) = cursor.peek() {
                let tp = to_t(p);
                if tp > step.t1() || p >= target_xi {
                    break;
                }
                observer(p, tp, &step.eval(tp));
                cursor.k += 1;
            }
            Ok(())
        })?;
        while let Some(p) = self.cursor.peek() {
            if p > target_xi {
                break;
            }
            self.cursor.k += 1;
        }
        observer(target_xi, target_t, self.solver.y());
        Ok(())
    }
}

fn check_range(xi0: f64, xi1: f64) -> Result<()> {
    if !(xi0 >= XI_MIN) || !xi0.is_finite() {
        return Err(Error::domain(format!("integration must start at xi >= 1, got {xi0}")));
    }
    if !(xi1 > xi0) || !xi1.is_finite() {
        return Err(Error::domain(format!("empty integration range [{xi0}, {xi1}]")));
    }
    Ok(())
}

fn identity(t: f64) -> f64 {
    t
}

/// Free rotation `ξ + (3E/2c) ξ^{1/3}`, i.e. `θ′ = 1 + E/(2x)`. States store
/// the phase relative to it so that it stays O(1) for `E ≠ 0`.
#[inline]
pub(crate) fn reference_phase(energy: f64, xi: f64) -> f64 {
    xi + 1.5 * energy / LIOUVILLE_C * xi.cbrt()
}

/// Single Prüfer run with state `[logR, θ − ξ, ∫V sin 2θ]`.
pub struct PruferSolver<'a> {
    stream: Stream<'a, 3>,
    energy: f64,
}

impl<'a> PruferSolver<'a> {
    pub fn new(
        spec: &'a PotentialSpec,
        energy: f64,
        xi0: f64,
        init: PruferState,
        cfg: &IntegrationConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        check_range(xi0, f64::MAX)?;
        let field: Field<'a, 3> = Box::new(move |xi, y| {
            let v = effective_potential_unchecked(spec, xi, energy);
            let drift = 0.5 * energy / x_of_xi_unchecked(xi);
            let (s2, c2) = (2.0 * (reference_phase(energy, xi) + y[1])).sin_cos();
            [0.5 * v * s2, -0.5 * v * (1.0 - c2) - drift, v * s2]
        });
        let y0 = [init.log_r, init.theta - reference_phase(energy, xi0), 0.0];
        Ok(PruferSolver {
            stream: Stream {
                solver: Dopri5::new(field, xi0, y0, cfg.tolerances()),
                cursor: Cursor::new(xi0, cfg.stride, Vec::new()),
                to_t: identity,
            },
            energy,
        })
    }

    /// Advance to `xi`, calling `observer(ξ, state, keyint)` on the stride
    /// grid and at `xi` itself.
    pub fn advance<O: FnMut(f64, PruferState, f64)>(&mut self, xi: f64, mut observer: O) -> Result<()> {
        let e = self.energy;
        self.stream.advance(xi, |p, _, y| observer(p, state3(e, p, y), y[2]))
    }

    pub fn xi(&self) -> f64 {
        self.stream.solver.t()
    }

    pub fn state(&self) -> PruferState {
        state3(self.energy, self.xi(), self.stream.solver.y())
    }

    pub fn keyint(&self) -> f64 {
        self.stream.solver.y()[2]
    }

    pub fn steps(&self) -> u64 {
        self.stream.solver.steps()
    }
}

#[inline]
fn state3(energy: f64, xi: f64, y: &[f64; 3]) -> PruferState {
    PruferState { log_r: y[0], theta: reference_phase(energy, xi) + y[1] }
}

/// Both basis solutions `θ(ξ₀) = π/2` and `θ(ξ₀) = 0` at once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSample {
    pub xi: f64,
    pub states: [PruferState; 2],
}

pub struct PairSolver<'a> {
    stream: Stream<'a, 4>,
    energy: f64,
}

impl<'a> PairSolver<'a> {
    pub fn new(spec: &'a PotentialSpec, energy: f64, xi0: f64, cfg: &IntegrationConfig) -> Result<Self> {
        Self::with_states(
            spec,
            energy,
            xi0,
            [PruferState { log_r: 0.0, theta: std::f64::consts::FRAC_PI_2 }, PruferState { log_r: 0.0, theta: 0.0 }],
            cfg,
        )
    }

    pub fn with_states(
        spec: &'a PotentialSpec,
        energy: f64,
        xi0: f64,
        init: [PruferState; 2],
        cfg: &IntegrationConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        check_range(xi0, f64::MAX)?;
        let field: Field<'a, 4> = Box::new(move |xi, y| {
            let v = effective_potential_unchecked(spec, xi, energy);
            let drift = 0.5 * energy / x_of_xi_unchecked(xi);
            let r = reference_phase(energy, xi);
            let (s1, c1) = (2.0 * (r + y[1])).sin_cos();
            let (s2, c2) = (2.0 * (r + y[3])).sin_cos();
            [0.5 * v * s1, -0.5 * v * (1.0 - c1) - drift, 0.5 * v * s2, -0.5 * v * (1.0 - c2) - drift]
        });
        let r0 = reference_phase(energy, xi0);
        let y0 = [init[0].log_r, init[0].theta - r0, init[1].log_r, init[1].theta - r0];
        Ok(PairSolver {
            stream: Stream {
                solver: Dopri5::new(field, xi0, y0, cfg.tolerances()),
                cursor: Cursor::new(xi0, cfg.stride, Vec::new()),
                to_t: identity,
            },
            energy,
        })
    }

    pub fn advance<O: FnMut(&PairSample)>(&mut self, xi: f64, mut observer: O) -> Result<()> {
        let e = self.energy;
        self.stream.advance(xi, |p, _, y| observer(&pair(e, p, y)))
    }

    pub fn sample(&self) -> PairSample {
        pair(self.energy, self.stream.solver.t(), self.stream.solver.y())
    }

    pub fn steps(&self) -> u64 {
        self.stream.solver.steps()
    }
}

#[inline]
fn pair(energy: f64, xi: f64, y: &[f64; 4]) -> PairSample {
    let r = reference_phase(energy, xi);
    PairSample {
        xi,
        states: [PruferState { log_r: y[0], theta: r + y[1] }, PruferState { log_r: y[2], theta: r + y[3] }],
    }
}

fn capture_cursor(xi0: f64, cfg: &IntegrationConfig, capture: &Capture) -> Result<Cursor> {
    let stride = capture.stride.unwrap_or(cfg.stride);
    if !(stride > 0.0) {
        return Err(Error::InvalidParameter { field: "stride", reason: format!("must be positive, got {stride}") });
    }
    Ok(Cursor::new(xi0, stride, capture.windows.clone()))
}

/// Prüfer run with `θ(ξ₀) = β`, `logR(ξ₀) = 0`, captured every `cfg.stride`.
pub fn integrate_prufer(
    spec: &PotentialSpec,
    energy: f64,
    range: (f64, f64),
    beta: f64,
    cfg: &IntegrationConfig,
) -> Result<Trajectory> {
    integrate_prufer_capture(spec, energy, range, PruferState { log_r: 0.0, theta: beta }, cfg, &Capture::default())
}

pub fn integrate_prufer_capture(
    spec: &PotentialSpec,
    energy: f64,
    (xi0, xi1): (f64, f64),
    init: PruferState,
    cfg: &IntegrationConfig,
    capture: &Capture,
) -> Result<Trajectory> {
    check_range(xi0, xi1)?;
    let mut solver = PruferSolver::new(spec, energy, xi0, init, cfg)?;
    solver.stream.cursor = capture_cursor(xi0, cfg, capture)?;
    let mut xi = vec![xi0];
    let mut states = vec![init];
    let mut keyint = vec![0.0];
    solver.advance(xi1, |p, s, k| {
        xi.push(p);
        states.push(s);
        keyint.push(k);
    })?;
    if let Some(i) = states.iter().position(|s| !(s.log_r.is_finite() && s.theta.is_finite())) {
        return Err(Error::NonFinite { at: xi[i] });
    }
    let steps = solver.steps();
    Ok(Trajectory::new(spec.clone(), energy, Some(init.theta), xi, States::Prufer(states), Some(keyint), steps))
}

/// Modified Prüfer run with state `[log R̃, θ̃ − ξ, ∫V′/(1−V) cos 2θ̃]`.
pub struct ModifiedPruferSolver<'a> {
    stream: Stream<'a, 3>,
    spec: &'a PotentialSpec,
    energy: f64,
    invalid: Rc<Cell<Option<(f64, f64)>>>,
}

/// A step collapse this close to `V = 1` is the `1/(1 − V)` singularity.
const NEAR_UNIT_V: f64 = 0.99;

impl<'a> ModifiedPruferSolver<'a> {
    pub fn new(spec: &'a PotentialSpec, energy: f64, xi0: f64, beta: f64, cfg: &IntegrationConfig) -> Result<Self> {
        cfg.validate()?;
        check_range(xi0, f64::MAX)?;
        let invalid: Rc<Cell<Option<(f64, f64)>>> = Rc::new(Cell::new(None));
        let flag = Rc::clone(&invalid);
        let field: Field<'a, 3> = Box::new(move |xi, y| {
            let v = effective_potential_unchecked(spec, xi, energy);
            if !(v < 1.0) {
                if flag.get().is_none() {
                    flag.set(Some((xi, v)));
                }
                return [0.0; 3];
            }
            let dv = effective_potential_derivative(spec, xi, energy);
            let c2 = (2.0 * (reference_phase(energy, xi) + y[1])).cos();
            let k = dv / (4.0 * (1.0 - v));
            let drift = 1.0 + 0.5 * energy / x_of_xi_unchecked(xi);
            [-k * (1.0 - c2), (1.0 - v).sqrt() - drift - k * c2, dv / (1.0 - v) * c2]
        });
        Ok(ModifiedPruferSolver {
            stream: Stream {
                solver: Dopri5::new(field, xi0, [0.0, beta - reference_phase(energy, xi0), 0.0], cfg.tolerances()),
                cursor: Cursor::new(xi0, cfg.stride, Vec::new()),
                to_t: identity,
            },
            spec,
            energy,
            invalid,
        })
    }

    /// Advance to `xi`, calling `observer(ξ, state, keyint1)` on the stride
    /// grid and at `xi` itself.
    pub fn advance<O: FnMut(f64, ModifiedPruferState, f64)>(&mut self, xi: f64, mut observer: O) -> Result<()> {
        let e = self.energy;
        let run = self.stream.advance(xi, |p, _, y| {
            observer(p, ModifiedPruferState { log_r: y[0], theta: reference_phase(e, p) + y[1] }, y[2])
        });
        match (self.invalid.get(), run) {
            (Some((at, v)), _) => Err(Error::RepresentationInvalid { xi: at, v }),
            (None, Err(Error::Stiffness { at, step })) => {
                let v = effective_potential_unchecked(self.spec, at, e);
                if v >= NEAR_UNIT_V {
                    Err(Error::RepresentationInvalid { xi: at, v })
                } else {
                    Err(Error::Stiffness { at, step })
                }
            }
            (None, run) => run,
        }
    }

    pub fn xi(&self) -> f64 {
        self.stream.solver.t()
    }

    pub fn keyint(&self) -> f64 {
        self.stream.solver.y()[2]
    }

    pub fn steps(&self) -> u64 {
        self.stream.solver.steps()
    }
}

pub fn integrate_modified_prufer(
    spec: &PotentialSpec,
    energy: f64,
    (xi0, xi1): (f64, f64),
    beta: f64,
    cfg: &IntegrationConfig,
) -> Result<Trajectory> {
    check_range(xi0, xi1)?;
    let mut solver = ModifiedPruferSolver::new(spec, energy, xi0, beta, cfg)?;
    let mut xi = vec![xi0];
    let mut states = vec![ModifiedPruferState { log_r: 0.0, theta: beta }];
    let mut keyint = vec![0.0];
    solver.advance(xi1, |p, s, k| {
        xi.push(p);
        states.push(s);
        keyint.push(k);
    })?;
    let steps = solver.steps();
    Ok(Trajectory::new(spec.clone(), energy, Some(beta), xi, States::ModifiedPrufer(states), Some(keyint), steps))
}

/// Direct run of `u″ = (q − x − E) u` in `x`, captured on the ξ-grid
/// `ξ(x₀) + k·stride`.
pub fn integrate_direct(
    spec: &PotentialSpec,
    energy: f64,
    (x0, x1): (f64, f64),
    (u0, du0): (f64, f64),
    cfg: &IntegrationConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !(x0 > 0.0) || !(x1 > x0) || !x1.is_finite() {
        return Err(Error::domain(format!("direct integration needs 0 < x0 < x1, got [{x0}, {x1}]")));
    }
    if !(u0.is_finite() && du0.is_finite()) {
        return Err(Error::NonFinite { at: x0 });
    }
    let field: Field<'_, 2> = Box::new(move |x, y| [y[1], (spec.eval_unchecked(x) - x - energy) * y[0]]);
    let xi0 = xi_of_x(x0)?;
    let xi1 = xi_of_x(x1)?;
    let mut stream = Stream {
        solver: Dopri5::new(field, x0, [u0, du0], cfg.tolerances()),
        cursor: Cursor::new(xi0, cfg.stride, Vec::new()),
        to_t: x_of_xi_unchecked,
    };
    let mut xi = vec![xi0];
    let mut x = vec![x0];
    let mut states = vec![[u0, du0]];
    stream.advance(xi1, |p, t, y| {
        xi.push(p);
        x.push(t);
        states.push(*y);
    })?;
    if let Some(i) = states.iter().position(|s| !(s[0].is_finite() && s[1].is_finite())) {
        return Err(Error::NonFinite { at: x[i] });
    }
    let steps = stream.solver.steps();
    drop(stream);
    let mut t = Trajectory::new(spec.clone(), energy, None, xi, States::Direct(states), None, steps);
    t.set_x(x);
    Ok(t)
}
