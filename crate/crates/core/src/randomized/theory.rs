use std::f64::consts::PI;

use serde::Serialize;

use crate::potentials::BumpFunction;
use crate::LIOUVILLE_C;

/// Ratio between the measured mean block increment and the closed-form
/// `(9π/8n)|f̂|²` under the normalised uniform law for `aₙ`.
///
/// A single block acts on `α = aₙ − 2ψ` as a rotation with
/// `ΔlogR = −½ log(sin α_end / sin α_start)`; averaging over uniform `α`
/// gives `E[Iₙ] = log cosh G ≈ G²/2` with `G = (3/4)|f̂| n^{-1/2}`, that is
/// `9|f̂|²/(32n)`.
pub const KAPPA: f64 = 1.0 / (4.0 * PI);

/// Which constant divides `3E` in the Fourier argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reading {
    /// `3E/c` with `c = (3/2)^{2/3}`.
    Liouville,
    /// `3E/1`.
    Unit,
}

impl Reading {
    pub fn frequency(self, energy: f64) -> f64 {
        match self {
            Reading::Liouville => 3.0 * energy / LIOUVILLE_C,
            Reading::Unit => 3.0 * energy,
        }
    }
}

/// `Λ(E) = (3π/8) |f̂(3E/c)|²`.
pub fn lyapunov_theoretical(f: &BumpFunction, energy: f64) -> f64 {
    lyapunov_with_reading(f, energy, Reading::Liouville)
}

pub fn lyapunov_with_reading(f: &BumpFunction, energy: f64, reading: Reading) -> f64 {
    3.0 * PI / 8.0 * f.fourier(reading.frequency(energy)).norm_sqr()
}

/// Leading mean of `Iₙ`: `(9π/8n) |f̂(3E/c)|²`.
pub fn expected_increment(f: &BumpFunction, energy: f64, n: u64) -> f64 {
    9.0 * PI / (8.0 * n as f64) * f.fourier(Reading::Liouville.frequency(energy)).norm_sqr()
}

/// Bound on `|Iₙ|` from `|d logR/dξ| ≤ |V|/2` integrated over the block:
/// `(3/2)|coupling|·‖f‖₁ n^{-1/2} + 5/(72 n³) + 3|E|/(2c)`.
pub fn increment_envelope(f: &BumpFunction, coupling: f64, energy: f64, n: u64) -> f64 {
    let nf = n as f64;
    1.5 * coupling.abs() * f.abs_integral() / nf.sqrt() + 5.0 / (72.0 * nf.powi(3)) + 1.5 * energy.abs() / LIOUVILLE_C
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionReport {
    pub energies: Vec<f64>,
    pub lambda: Vec<f64>,
    /// `1 − 6Λ` where `Λ < 1/6`.
    pub dimension: Vec<Option<f64>>,
    /// `Λ > 1/6`.
    pub pure_point: Vec<bool>,
    /// `Λ = 1/6` to within `1e-12`.
    pub boundary: Vec<bool>,
    /// Factor applied to the closed-form `Λ`.
    pub normalization: f64,
}

pub fn dimension_report(f: &BumpFunction, energies: &[f64], normalization: f64) -> DimensionReport {
    let lambda: Vec<f64> = energies.iter().map(|&e| normalization * lyapunov_theoretical(f, e)).collect();
    from_lambda(energies.to_vec(), lambda, normalization)
}

pub(crate) fn from_lambda(energies: Vec<f64>, lambda: Vec<f64>, normalization: f64) -> DimensionReport {
    const EDGE: f64 = 1.0 / 6.0;
    let boundary: Vec<bool> = lambda.iter().map(|&l| (l - EDGE).abs() <= 1e-12).collect();
    let dimension =
        lambda.iter().zip(&boundary).map(|(&l, &b)| if !b && l < EDGE { Some(1.0 - 6.0 * l) } else { None }).collect();
    let pure_point = lambda.iter().zip(&boundary).map(|(&l, &b)| !b && l > EDGE).collect();
    DimensionReport { energies, lambda, dimension, pure_point, boundary, normalization }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lyapunov_at_zero_energy() {
        let f = BumpFunction::default();
        let l = lyapunov_theoretical(&f, 0.0);
        assert!((l - 3.0 * PI / 8.0 * f.integral().powi(2)).abs() < 1e-12);
        assert_eq!(l, lyapunov_with_reading(&f, 0.0, Reading::Unit));
    }

    #[test]
    fn lyapunov_at_unit_argument() {
        // f̂(1) of the bare shape, 30-digit quadrature
        let f = BumpFunction::standard(1.0).unwrap();
        let (re, im) = (0.006_110_517_274_965_13, 0.003_338_190_801_546_944);
        let expect = 3.0 * PI / 8.0 * (re * re + im * im);
        let got = lyapunov_theoretical(&f, LIOUVILLE_C / 3.0);
        assert!((got - expect).abs() < 1e-12 * expect.max(1e-300) + 1e-18);
    }

    #[test]
    fn expected_increment_scales_like_one_over_n() {
        let f = BumpFunction::default();
        for n in [3u64, 10, 77] {
            assert_eq!(expected_increment(&f, 0.4, 2 * n), expected_increment(&f, 0.4, n) / 2.0);
        }
    }

    #[test]
    fn harmonic_sum_matches_lyapunov() {
        let f = BumpFunction::default();
        let n = 1_000_000u64;
        let first = expected_increment(&f, 0.0, 1);
        let sum: f64 = (1..=n).map(|j| first / j as f64).sum();
        // Σ 1/j = log n + γ + …, so the ratio converges like 1/log n
        let ratio = sum / (3.0 * (n as f64).ln()) / lyapunov_theoretical(&f, 0.0);
        assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn dimension_cases() {
        let r = from_lambda(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0 / 12.0, 1.0 / 6.0, 0.3], 1.0);
        assert_eq!(r.dimension[0], Some(1.0));
        assert!((r.dimension[1].unwrap() - 0.5).abs() < 1e-15);
        assert_eq!((r.dimension[2], r.pure_point[2], r.boundary[2]), (None, false, true));
        assert_eq!((r.dimension[3], r.pure_point[3]), (None, true));
    }
}
