//! Liouville change of variables and the two Prüfer representations.
//!
//! With `ξ = (2/3)x^{3/2}` and `φ(ξ) = x^{1/4} u(x)`, the Stark equation
//! `−u″ − xu + qu = Eu` becomes `−φ″ + V(ξ, E) φ = φ` with
//! `V = −5/(36ξ²) + (q(x) − E)/x`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;
use crate::LIOUVILLE_C;

/// Left edge of the transform region in ξ.
pub const XI_MIN: f64 = 1.0;

pub fn xi_of_x(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("xi_of_x needs finite x >= 0, got {x}")));
    }
    Ok(2.0 / 3.0 * x * x.sqrt())
}

pub fn x_of_xi(xi: f64) -> Result<f64> {
    if !(xi >= 0.0) || !xi.is_finite() {
        return Err(Error::domain(format!("x_of_xi needs finite xi >= 0, got {xi}")));
    }
    Ok(x_of_xi_unchecked(xi))
}

#[inline]
pub(crate) fn x_of_xi_unchecked(xi: f64) -> f64 {
    let r = xi.cbrt();
    LIOUVILLE_C * r * r
}

/// `φ = x^{1/4} u`.
pub fn phi_of_u(x: f64, u: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("phi_of_u needs x > 0, got {x}")));
    }
    Ok(x.sqrt().sqrt() * u)
}

/// `u = x(ξ)^{-1/4} φ`.
pub fn u_of_phi(xi: f64, phi: f64) -> Result<f64> {
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(Error::domain(format!("u_of_phi needs xi > 0, got {xi}")));
    }
    Ok(phi / x_of_xi_unchecked(xi).sqrt().sqrt())
}

/// `(φ, dφ/dξ)` from `(u, du/dx)` at `x`.
pub fn phi_pair_of_u(x: f64, u: f64, du: f64) -> (f64, f64) {
    let q = x.sqrt().sqrt();
    (q * u, du / q + 0.25 * u / (q * x))
}

/// `(u, du/dx)` from `(φ, dφ/dξ)` at `x`.
pub fn u_pair_of_phi(x: f64, phi: f64, dphi: f64) -> (f64, f64) {
    let q = x.sqrt().sqrt();
    let u = phi / q;
    (u, q * dphi - 0.25 * u / x)
}

/// A point given in both coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiouvillePoint {
    pub x: f64,
    pub xi: f64,
}

impl LiouvillePoint {
    pub fn from_x(x: f64) -> Result<Self> {
        Ok(LiouvillePoint { x, xi: xi_of_x(x)? })
    }

    pub fn from_xi(xi: f64) -> Result<Self> {
        Ok(LiouvillePoint { x: x_of_xi(xi)?, xi })
    }
}

/// `V(ξ, E) = −5/(36ξ²) + (q(cξ^{2/3}) − E)/(cξ^{2/3})`.
pub fn effective_potential(spec: &PotentialSpec, xi: f64, energy: f64) -> Result<f64> {
    if !(xi >= XI_MIN) || !xi.is_finite() {
        return Err(Error::domain(format!("effective potential needs xi >= 1, got {xi}")));
    }
    Ok(effective_potential_unchecked(spec, xi, energy))
}

#[inline]
pub(crate) fn effective_potential_unchecked(spec: &PotentialSpec, xi: f64, energy: f64) -> f64 {
    let x = x_of_xi_unchecked(xi);
    let centrifugal = -5.0 / (36.0 * xi * xi);
    match spec {
        PotentialSpec::RandomBump(r) => centrifugal + r.eval_xi_unchecked(xi) - energy / x,
        _ => centrifugal + (spec.eval_unchecked(x) - energy) / x,
    }
}

/// `∂V/∂ξ`, analytic where `q'` has a closed form, otherwise a central
/// difference with step `1e-4 · max(1, ξ^{1/3})`.
pub fn effective_potential_derivative(spec: &PotentialSpec, xi: f64, energy: f64) -> f64 {
    let x = x_of_xi_unchecked(xi);
    let centrifugal = 10.0 / (36.0 * xi * xi * xi);
    if let PotentialSpec::RandomBump(r) = spec {
        return centrifugal + r.derivative_xi_unchecked(xi) + 2.0 / 3.0 * energy / (xi * x);
    }
    match spec.derivative(x) {
        Some(dq) => {
            let q = spec.eval_unchecked(x);
            centrifugal + 2.0 / 3.0 * (dq - (q - energy) / x) / xi
        }
        None => {
            let h = 1e-4 * xi.cbrt().max(1.0);
            let lo = (xi - h).max(XI_MIN);
            let hi = xi + h;
            (effective_potential_unchecked(spec, hi, energy) - effective_potential_unchecked(spec, lo, energy))
                / (hi - lo)
        }
    }
}

/// `(d logR/dξ, dθ/dξ)` for `φ = R sin θ`, `φ′ = R cos θ`.
#[inline]
pub fn prufer_rhs(theta: f64, v: f64) -> (f64, f64) {
    let (s2, c2) = (2.0 * theta).sin_cos();
    (0.5 * v * s2, 1.0 - 0.5 * v * (1.0 - c2))
}

/// `(d logR̃/dξ, dθ̃/dξ)` for `√(1−V) φ = R̃ sin θ̃`, `φ′ = R̃ cos θ̃`.
pub fn modified_prufer_rhs(theta: f64, v: f64, dv: f64) -> Result<(f64, f64)> {
    if !(v < 1.0) {
        return Err(Error::RepresentationInvalid { xi: f64::NAN, v });
    }
    let (_, c2) = (2.0 * theta).sin_cos();
    let k = dv / (4.0 * (1.0 - v));
    Ok((-k * (1.0 - c2), (1.0 - v).sqrt() - k * c2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PruferState {
    pub log_r: f64,
    /// Unwrapped phase.
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModifiedPruferState {
    pub log_r: f64,
    pub theta: f64,
}

pub fn prufer_from_phi(phi: f64, dphi: f64) -> Result<PruferState> {
    if phi == 0.0 && dphi == 0.0 {
        return Err(Error::DegenerateState);
    }
    if !(phi.is_finite() && dphi.is_finite()) {
        return Err(Error::NonFinite { at: f64::NAN });
    }
    Ok(PruferState { log_r: phi.hypot(dphi).ln(), theta: phi.atan2(dphi) })
}

pub fn phi_from_prufer(s: PruferState) -> (f64, f64) {
    let r = s.log_r.exp();
    let (sn, cs) = s.theta.sin_cos();
    (r * sn, r * cs)
}

/// Modified Prüfer state of `(φ, φ′)` at a point where `V < 1`.
pub fn modified_prufer_from_phi(phi: f64, dphi: f64, v: f64) -> Result<ModifiedPruferState> {
    if !(v < 1.0) {
        return Err(Error::RepresentationInvalid { xi: f64::NAN, v });
    }
    let s = prufer_from_phi((1.0 - v).sqrt() * phi, dphi)?;
    Ok(ModifiedPruferState { log_r: s.log_r, theta: s.theta })
}

pub fn phi_from_modified_prufer(s: ModifiedPruferState, v: f64) -> Result<(f64, f64)> {
    if !(v < 1.0) {
        return Err(Error::RepresentationInvalid { xi: f64::NAN, v });
    }
    let (a, b) = phi_from_prufer(PruferState { log_r: s.log_r, theta: s.theta });
    Ok((a / (1.0 - v).sqrt(), b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2};

    #[test]
    fn coordinate_values() {
        assert_eq!(xi_of_x(0.0).unwrap(), 0.0);
        assert!((xi_of_x(1.0).unwrap() - 2.0 / 3.0).abs() < 1e-16);
        assert!((x_of_xi(xi_of_x(7.3).unwrap()).unwrap() - 7.3).abs() < 1e-12);
        assert!(xi_of_x(-1.0).is_err());
        assert!(x_of_xi(-1e-9).is_err());
        assert!((LIOUVILLE_C - 1.5f64.powf(2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi_of_u(1.0, 1.0).unwrap(), 1.0);
        assert!((phi_of_u(16.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
        let x = x_of_xi(100.0).unwrap();
        let phi = 0.37;
        let back = phi_of_u(x, u_of_phi(100.0, phi).unwrap()).unwrap();
        assert!((back - phi).abs() < 1e-12);
        assert!(phi_of_u(0.0, 1.0).is_err());
        assert!(u_of_phi(-2.0, 1.0).is_err());
    }

    #[test]
    fn derivative_pairs_invert() {
        let (p, dp) = phi_pair_of_u(3.7, 0.4, -1.1);
        let (u, du) = u_pair_of_phi(3.7, p, dp);
        assert!((u - 0.4).abs() < 1e-15);
        assert!((du + 1.1).abs() < 1e-14);
    }

    #[test]
    fn effective_potential_values() {
        let z = PotentialSpec::Zero;
        assert!((effective_potential(&z, 1.0, 0.0).unwrap() + 5.0 / 36.0).abs() < 1e-16);
        // −5/36 − 1/c, 30-digit reference
        let v = effective_potential(&z, 1.0, 1.0).unwrap();
        assert!((v - -0.902_031_717_257_776_801).abs() < 1e-15);
        for e in [-10.0, -3.0, 0.0, 10.0] {
            assert!(effective_potential(&z, 1e6, e).unwrap().abs() < 1e-3);
        }
        assert!(effective_potential(&z, 0.5, 0.0).is_err());
    }

    #[test]
    fn effective_potential_is_linear_in_energy() {
        let q = PotentialSpec::power_decay(1.0, 0.3).unwrap();
        for xi in [1.0, 7.5, 300.0] {
            let d = 1e-3;
            let slope = (effective_potential(&q, xi, 0.5 + d).unwrap() - effective_potential(&q, xi, 0.5 - d).unwrap())
                / (2.0 * d);
            let expect = -1.0 / x_of_xi(xi).unwrap();
            assert!((slope - expect).abs() < 1e-10, "xi = {xi}");
        }
    }

    #[test]
    fn derivative_of_effective_potential() {
        let specs =
            [PotentialSpec::Zero, PotentialSpec::power_decay(2.0, 0.3).unwrap(), PotentialSpec::wigner_von_neumann()];
        for q in &specs {
            for xi in [1.5, 12.0, 250.0] {
                let h = 1e-5;
                let fd = (effective_potential(q, xi + h, 0.7).unwrap() - effective_potential(q, xi - h, 0.7).unwrap())
                    / (2.0 * h);
                let an = effective_potential_derivative(q, xi, 0.7);
                assert!((fd - an).abs() < 1e-6 * (1.0 + an.abs()), "{} at {xi}", q.label());
            }
        }
    }

    #[test]
    fn rhs_values() {
        assert_eq!(prufer_rhs(0.3, 0.0), (0.0, 1.0));
        let (a, b) = prufer_rhs(0.0, 0.7);
        assert_eq!((a, b), (0.0, 1.0));
        let (a, b) = prufer_rhs(FRAC_PI_2, 0.1);
        assert!(a.abs() < 1e-16 && (b - 0.9).abs() < 1e-15);

        assert_eq!(modified_prufer_rhs(0.2, 0.0, 0.0).unwrap(), (0.0, 1.0));
        let (a, b) = modified_prufer_rhs(0.2, 0.19, 0.0).unwrap();
        assert!(a.abs() < 1e-16 && (b - 0.9).abs() < 1e-15);
        let (a, b) = modified_prufer_rhs(FRAC_PI_4, 0.0, 0.4).unwrap();
        assert!((a + 0.1).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
        assert!(modified_prufer_rhs(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn prufer_state_values() {
        let s = prufer_from_phi(0.0, 1.0).unwrap();
        assert_eq!((s.log_r, s.theta), (0.0, 0.0));
        let s = prufer_from_phi(1.0, 0.0).unwrap();
        assert!(s.log_r.abs() < 1e-16 && (s.theta - FRAC_PI_2).abs() < 1e-16);
        let s = prufer_from_phi(1.0, 1.0).unwrap();
        assert!((s.log_r - 0.5 * LN_2).abs() < 1e-16 && (s.theta - FRAC_PI_4).abs() < 1e-16);
        assert!(matches!(prufer_from_phi(0.0, 0.0), Err(Error::DegenerateState)));
    }

    #[test]
    fn modified_roundtrip() {
        let s = modified_prufer_from_phi(0.3, -0.8, 0.25).unwrap();
        let (p, dp) = phi_from_modified_prufer(s, 0.25).unwrap();
        assert!((p - 0.3).abs() < 1e-15 && (dp + 0.8).abs() < 1e-15);
        assert!(modified_prufer_from_phi(1.0, 1.0, 1.5).is_err());
    }
}
