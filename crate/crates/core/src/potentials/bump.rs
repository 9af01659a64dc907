//! Compactly supported bump functions on `(0, 1)`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature;

/// Scale applied to the standard shape by [`BumpFunction::default`].
///
/// The bare shape `exp(-1/(t(1-t)))` has integral ≈ 7.03e-3, which makes the
/// random-family Lyapunov exponent ~1e-5 and invisible to any desk-scale
/// ensemble. The default rescales it to unit integral.
pub const DEFAULT_BUMP_SCALE: f64 = 1.0 / STANDARD_INTEGRAL;

/// `∫₀¹ exp(-1/(t(1-t))) dt`.
pub const STANDARD_INTEGRAL: f64 = 7.029_858_406_609_656e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum BumpShape {
    /// `exp(-1/(t(1-t)))` on `(0, 1)`.
    Standard,
    /// Linear interpolation of a sampled table.
    Table(Arc<SampledTable>),
}

/// A table of `(t, f(t))` pairs with strictly increasing `t` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTable {
    t: Vec<f64>,
    f: Vec<f64>,
}

impl SampledTable {
    pub fn new(t: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if t.len() != f.len() || t.len() < 3 {
            return Err(Error::InvalidParameter {
                field: "bump table",
                reason: format!("need at least 3 matching rows, got {} and {}", t.len(), f.len()),
            });
        }
        if t.windows(2).any(|w| !(w[0] < w[1])) || t[0] < 0.0 || t[t.len() - 1] > 1.0 {
            return Err(Error::InvalidParameter {
                field: "bump table",
                reason: "t must be strictly increasing inside [0, 1]".into(),
            });
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter { field: "bump table", reason: "non-finite sample".into() });
        }
        let peak = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ends = f[0].abs().max(f[f.len() - 1].abs());
        if ends > 1e-12 * peak.max(1e-300) {
            return Err(Error::InvalidParameter {
                field: "bump table",
                reason: "samples at the ends of the support must vanish".into(),
            });
        }
        Ok(SampledTable { t, f })
    }

    /// Parse whitespace/comma separated two-column text; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut t = Vec::new();
        let mut f = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> =
                line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::InvalidParameter {
                    field: "bump table",
                    reason: format!("line {}: {e}", lineno + 1),
                })
            };
            if cols.len() != 2 {
                return Err(Error::InvalidParameter {
                    field: "bump table",
                    reason: format!("line {}: expected 2 columns, got {}", lineno + 1, cols.len()),
                });
            }
            t.push(parse(cols[0])?);
            f.push(parse(cols[1])?);
        }
        SampledTable::new(t, f)
    }

    fn locate(&self, t: f64) -> Option<usize> {
        if t <= self.t[0] || t >= self.t[self.t.len() - 1] {
            return None;
        }
        let i = self.t.partition_point(|&s| s <= t);
        Some(i - 1)
    }

    fn eval(&self, t: f64) -> f64 {
        match self.locate(t) {
            None => 0.0,
            Some(i) => {
                let w = (t - self.t[i]) / (self.t[i + 1] - self.t[i]);
                self.f[i] * (1.0 - w) + self.f[i + 1] * w
            }
        }
    }

    fn slope(&self, t: f64) -> f64 {
        match self.locate(t) {
            None => 0.0,
            Some(i) => (self.f[i + 1] - self.f[i]) / (self.t[i + 1] - self.t[i]),
        }
    }

    /// Breakpoints, used to split quadratures at the kinks.
    pub fn knots(&self) -> &[f64] {
        &self.t
    }
}

/// `f(t) = scale · shape(t)`, supported in `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpFunction {
    shape: BumpShape,
    scale: f64,
    integral: f64,
    abs_integral: f64,
    sup: f64,
}

impl Default for BumpFunction {
    fn default() -> Self {
        BumpFunction::standard(DEFAULT_BUMP_SCALE).expect("default scale is valid")
    }
}

impl BumpFunction {
    /// `scale · exp(-1/(t(1-t)))`.
    pub fn standard(scale: f64) -> Result<Self> {
        Self::new(BumpShape::Standard, scale)
    }

    pub fn from_table(table: SampledTable, scale: f64) -> Result<Self> {
        Self::new(BumpShape::Table(Arc::new(table)), scale)
    }

    pub fn new(shape: BumpShape, scale: f64) -> Result<Self> {
        if !scale.is_finite() || scale == 0.0 {
            return Err(Error::InvalidParameter {
                field: "bump scale",
                reason: format!("must be finite and nonzero, got {scale}"),
            });
        }
        let mut bump = BumpFunction { shape, scale, integral: 0.0, abs_integral: 0.0, sup: 0.0 };
        bump.integral = bump.integrate(|t| bump.eval(t));
        bump.abs_integral = bump.integrate(|t| bump.eval(t).abs());
        bump.sup = match &bump.shape {
            BumpShape::Standard => scale.abs() * (-4.0f64).exp(),
            BumpShape::Table(tab) => scale.abs() * tab.f.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        };
        if bump.abs_integral == 0.0 {
            return Err(Error::InvalidParameter { field: "bump", reason: "bump function is identically zero".into() });
        }
        Ok(bump)
    }

    /// A copy normalised to unit integral (a mollifier).
    pub fn normalized(&self) -> Result<Self> {
        if self.integral.abs() < 1e-300 {
            return Err(Error::InvalidParameter { field: "bump", reason: "zero integral cannot be normalised".into() });
        }
        Self::new(self.shape.clone(), self.scale / self.integral)
    }

    pub fn shape(&self) -> &BumpShape {
        &self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        match &self.shape {
            BumpShape::Standard => self.scale * (-1.0 / (t * (1.0 - t))).exp(),
            BumpShape::Table(tab) => self.scale * tab.eval(t),
        }
    }

    /// `f'(t)`; piecewise slope for tables.
    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        match &self.shape {
            BumpShape::Standard => {
                let s = t * (1.0 - t);
                self.scale * (-1.0 / s).exp() * (1.0 - 2.0 * t) / (s * s)
            }
            BumpShape::Table(tab) => self.scale * tab.slope(t),
        }
    }

    /// `∫₀¹ f`.
    pub fn integral(&self) -> f64 {
        self.integral
    }

    /// `∫₀¹ |f|`.
    pub fn abs_integral(&self) -> f64 {
        self.abs_integral
    }

    /// `sup |f|`.
    pub fn sup(&self) -> f64 {
        self.sup
    }

    /// `∫₀¹ t f(t) dt`.
    pub fn first_moment(&self) -> f64 {
        self.integrate(|t| t * self.eval(t))
    }

    /// `f̂(k) = ∫ e^{ikt} f(t) dt`.
    pub fn fourier(&self, k: f64) -> Complex64 {
        let re = self.integrate(|t| (k * t).cos() * self.eval(t));
        let im = self.integrate(|t| (k * t).sin() * self.eval(t));
        Complex64::new(re, im)
    }

    fn integrate<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        match &self.shape {
            BumpShape::Standard => {
                quadrature::integrate(&mut g, 0.0, 0.5, 1e-15, 1e-13).value
                    + quadrature::integrate(&mut g, 0.5, 1.0, 1e-15, 1e-13).value
            }
            BumpShape::Table(tab) => {
                tab.knots().windows(2).map(|w| quadrature::integrate(&mut g, w[0], w[1], 1e-15, 1e-13).value).sum()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_and_integral() {
        let f = BumpFunction::standard(1.0).unwrap();
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(1.0), 0.0);
        assert_eq!(f.eval(-0.3), 0.0);
        assert_eq!(f.eval(1.7), 0.0);
        assert!((f.integral() - STANDARD_INTEGRAL).abs() < 1e-16);
        assert!((f.eval(0.5) - (-4.0f64).exp()).abs() < 1e-17);
    }

    #[test]
    fn default_bump_has_unit_integral() {
        let f = BumpFunction::default();
        assert!((f.integral() - 1.0).abs() < 1e-12);
        assert!((f.fourier(0.0).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_scale_rejected() {
        assert!(BumpFunction::standard(0.0).is_err());
        let t = SampledTable::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.0, 0.0]).unwrap();
        assert!(BumpFunction::from_table(t, 1.0).is_err());
    }

    #[test]
    fn fourier_at_one_matches_reference() {
        // reference from 30-digit quadrature of the bare shape
        let f = BumpFunction::standard(1.0).unwrap();
        let v = f.fourier(1.0);
        assert!((v.re - 0.006_110_517_274_965_13).abs() < 1e-14);
        assert!((v.im - 0.003_338_190_801_546_944).abs() < 1e-14);
    }

    #[test]
    fn symmetric_bump_has_even_modulus() {
        let f = BumpFunction::default();
        for k in [0.3, 1.0, 4.5, 17.0] {
            assert!((f.fourier(k).norm() - f.fourier(-k).norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let f = BumpFunction::default();
        for &t in &[0.1, 0.3, 0.5, 0.77, 0.95] {
            let h = 1e-6;
            let fd = (f.eval(t + h) - f.eval(t - h)) / (2.0 * h);
            assert!((fd - f.derivative(t)).abs() < 1e-6 * (1.0 + fd.abs()), "t = {t}");
        }
    }

    #[test]
    fn table_parses_and_interpolates() {
        let text = "# t f\n0 0\n0.25, 1\n0.5 2\n0.75 1\n1 0\n";
        let tab = SampledTable::parse(text).unwrap();
        let f = BumpFunction::from_table(tab, 1.0).unwrap();
        assert!((f.eval(0.375) - 1.5).abs() < 1e-15);
        assert!((f.integral() - 1.0).abs() < 1e-13);
        assert!((f.derivative(0.1) - 4.0).abs() < 1e-12);
        assert!(SampledTable::parse("0 0\n0.5 1 2\n1 0").is_err());
        assert!(SampledTable::parse("0 1\n0.5 1\n1 0").is_err());
    }
}
