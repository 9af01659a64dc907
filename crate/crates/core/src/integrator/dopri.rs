//! Dormand–Prince 5(4) with FSAL and fourth-order dense output.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Smallest admissible step before the run is declared stiff.
pub const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
}

type Vector<const N: usize> = [f64; N];

#[inline]
fn axpy<const N: usize>(y: &Vector<N>, h: f64, terms: &[(f64, &Vector<N>)]) -> Vector<N> {
    let mut out = *y;
    for (c, k) in terms {
        let hc = h * c;
        for i in 0..N {
            out[i] += hc * k[i];
        }
    }
    out
}

/// Interpolant over the last accepted step.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    r: [Vector<N>; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> Vector<N> {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let mut out = [0.0; N];
        for i in 0..N {
            let r = &self.r;
            out[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
        }
        out
    }
}

/// Adaptive integrator state; advance piecewise with [`Dopri5::advance`].
pub struct Dopri5<const N: usize, F> {
    f: F,
    tol: Tolerances,
    t: f64,
    y: Vector<N>,
    k1: Vector<N>,
    h: f64,
    steps: u64,
    rejected: u64,
    evaluations: u64,
}

impl<const N: usize, F: FnMut(f64, &Vector<N>) -> Vector<N>> Dopri5<N, F> {
    pub fn new(mut f: F, t0: f64, y0: Vector<N>, tol: Tolerances) -> Self {
        let k1 = f(t0, &y0);
        let mut s = Dopri5 { f, tol, t: t0, y: y0, k1, h: 0.0, steps: 0, rejected: 0, evaluations: 1 };
        s.h = s.initial_step();
        s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &Vector<N> {
        &self.y
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn rejected(&self) -> u64 {
        self.rejected
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.tol.atol + self.tol.rtol * a.abs().max(b.abs())
    }

    // Hairer–Nørsett–Wanner starting step heuristic.
    fn initial_step(&mut self) -> f64 {
        let (mut d0, mut d1) = (0.0, 0.0);
        for i in 0..N {
            let sc = self.scale(self.y[i], self.y[i]);
            d0 += (self.y[i] / sc).powi(2);
            d1 += (self.k1[i] / sc).powi(2);
        }
        let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(self.tol.max_step);
        let y1 = axpy(&self.y, h0, &[(1.0, &self.k1)]);
        let k2 = (self.f)(self.t + h0, &y1);
        self.evaluations += 1;
        let mut d2 = 0.0;
        for i in 0..N {
            let sc = self.scale(self.y[i], self.y[i]);
            d2 += ((k2[i] - self.k1[i]) / sc).powi(2);
        }
        let d2 = (d2 / N as f64).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1).min(self.tol.max_step)
    }

    /// Integrate to `t_end` (which is hit exactly), calling `on_step` with
    /// the interpolant of every accepted step.
    pub fn advance<O: FnMut(&DenseStep<N>) -> Result<()>>(&mut self, t_end: f64, mut on_step: O) -> Result<()> {
        while self.t < t_end {
            let step = self.step(t_end)?;
            on_step(&step)?;
        }
        Ok(())
    }

    fn step(&mut self, t_end: f64) -> Result<DenseStep<N>> {
        loop {
            let mut h = self.h.min(self.tol.max_step);
            let last = self.t + h >= t_end;
            if last {
                h = t_end - self.t;
            }
            if h < MIN_STEP && !last {
                return Err(Error::Stiffness { at: self.t, step: h });
            }
            let (t, y, k1) = (self.t, self.y, self.k1);
            let f = &mut self.f;
            let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(t + h, &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let t_new = if last { t_end } else { t + h };
            let k7 = f(t_new, &y_new);
            self.evaluations += 6;

            let mut err = 0.0;
            for i in 0..N {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.scale(y[i], y_new[i]);
                err += (e / sc).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                if h < MIN_STEP {
                    return Err(Error::NonFinite { at: t });
                }
                self.h = 0.2 * h;
                self.rejected += 1;
                continue;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                let mut r = [[0.0; N]; 5];
                for i in 0..N {
                    let dy = y_new[i] - y[i];
                    let bspl = h * k1[i] - dy;
                    r[0][i] = y[i];
                    r[1][i] = dy;
                    r[2][i] = bspl;
                    r[3][i] = dy - h * k7[i] - bspl;
                    r[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                self.t = t_new;
                self.y = y_new;
                self.k1 = k7;
                self.steps += 1;
                // keep the step the controller wanted, not the shortened final one
                if !last {
                    self.h = h * factor;
                }
                return Ok(DenseStep { t0: t, h, r });
            }
            self.rejected += 1;
            self.h = h * factor.min(1.0);
            if self.h < MIN_STEP {
                return Err(Error::Stiffness { at: t, step: self.h });
            }
        }
    }
}
