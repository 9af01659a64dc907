//! Airy functions on the negative real axis.
//!
//! `u(x) = Ai(-x)` and `v(x) = Bi(-x)` solve `u'' = -x u`, which is the Stark
//! eigenfunction equation with `q = 0`, `E = 0`. Small arguments use the
//! Maclaurin series, large arguments the Poincaré expansion truncated at its
//! smallest term.

use std::f64::consts::{FRAC_PI_4, PI};

/// Ai(0)
const AI0: f64 = 0.355_028_053_887_817_239_26;
/// -Ai'(0)
const AIP0: f64 = 0.258_819_403_792_806_798_41;
const SQRT3: f64 = 1.732_050_807_568_877_293_5;

/// Where [`airy_neg`] switches from the series to the expansion.
pub const CROSSOVER: f64 = 7.0;

/// Values of Ai, Ai', Bi, Bi' at some real argument `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryValues {
    pub ai: f64,
    pub aip: f64,
    pub bi: f64,
    pub bip: f64,
}

impl AiryValues {
    /// sqrt(Ai² + Bi²), the modulus used to measure relative errors near zeros.
    pub fn modulus(&self) -> f64 {
        self.ai.hypot(self.bi)
    }

    /// Wronskian Ai·Bi' − Ai'·Bi; equals 1/π identically.
    pub fn wronskian(&self) -> f64 {
        self.ai * self.bip - self.aip * self.bi
    }
}

/// Maclaurin series at any real `z`. Accurate while the terms stay well
/// below 1/eps, i.e. roughly |z| ≤ 8.
pub fn airy_series(z: f64) -> AiryValues {
    let z3 = z * z * z;
    // f = Σ t_k,   t_{k+1} = t_k z³ / ((3k+2)(3k+3)),  t_0 = 1
    // g = Σ s_k,   s_{k+1} = s_k z³ / ((3k+3)(3k+4)),  s_0 = z
    // f' and g' are accumulated from the same terms with exponent weights.
    let (mut f, mut fp, mut g, mut gp) = (0.0, 0.0, 0.0, 0.0);
    let mut t = 1.0;
    let mut s = z;
    // derivative terms carried separately so z = 0 needs no special case:
    // d/dz t_k = 3k z^{3k-1} a_k;  tp_{k+1} = t_k z² (3k+3) / ((3k+2)(3k+3))
    let mut tp = 0.0;
    let mut sp = 1.0;
    for k in 0..200 {
        let kf = k as f64;
        f += t;
        fp += tp;
        g += s;
        gp += sp;
        let next_t = t * z3 / ((3.0 * kf + 2.0) * (3.0 * kf + 3.0));
        let next_tp = t * z * z / (3.0 * kf + 2.0);
        let next_s = s * z3 / ((3.0 * kf + 3.0) * (3.0 * kf + 4.0));
        let next_sp = s * z * z / (3.0 * kf + 3.0);
        t = next_t;
        tp = next_tp;
        s = next_s;
        sp = next_sp;
        let scale = f.abs() + g.abs() + fp.abs() + gp.abs() + 1e-300;
        if k > 3 && (t.abs() + tp.abs() + s.abs() + sp.abs()) < 1e-18 * scale {
            break;
        }
    }
    AiryValues {
        ai: AI0 * f - AIP0 * g,
        aip: AI0 * fp - AIP0 * gp,
        bi: SQRT3 * (AI0 * f + AIP0 * g),
        bip: SQRT3 * (AI0 * fp + AIP0 * gp),
    }
}

/// Large-argument expansion of Ai(−x), Ai'(−x), Bi(−x), Bi'(−x) for x > 0.
/// Returned values are the functions evaluated at −x (not derivatives in x).
pub fn airy_asymptotic_neg(x: f64) -> AiryValues {
    assert!(x > 0.0, "asymptotic expansion needs x > 0");
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    // u_k = (2k+1)(2k+3)···(6k−1) / (216^k k!),  v_k = −(6k+1)/(6k−1) u_k
    let mut u = vec![1.0f64];
    let mut v = vec![1.0f64];
    let (mut p, mut q, mut r, mut s) = (1.0, 0.0, 1.0, 0.0);
    let mut zpow = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60usize {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let vk = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk;
        u.push(uk);
        v.push(vk);
        zpow /= zeta;
        let term_u = uk * zpow;
        let term_v = vk * zpow;
        let size = term_u.abs().max(term_v.abs());
        if size > last {
            break;
        }
        last = size;
        // (-1)^j u_{2j} / ζ^{2j} into P, (-1)^j u_{2j+1}/ζ^{2j+1} into Q
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term_u;
            r += sign * term_v;
        } else {
            q += sign * term_u;
            s += sign * term_v;
        }
        if size < 1e-18 {
            break;
        }
    }
    let phase = zeta - FRAC_PI_4;
    let (sn, cs) = phase.sin_cos();
    let pre = 1.0 / PI.sqrt();
    let x14 = x.powf(0.25);
    AiryValues {
        ai: pre / x14 * (cs * p + sn * q),
        aip: pre * x14 * (sn * r - cs * s),
        bi: pre / x14 * (-sn * p + cs * q),
        bip: pre * x14 * (cs * r + sn * s),
    }
}

/// Ai, Ai', Bi, Bi' at −x for x ≥ 0, choosing the method by [`CROSSOVER`].
pub fn airy_neg(x: f64) -> AiryValues {
    if x < CROSSOVER {
        airy_series(-x)
    } else {
        airy_asymptotic_neg(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_zero() {
        let a = airy_series(0.0);
        assert!((a.ai - AI0).abs() < 1e-16);
        assert!((a.aip + AIP0).abs() < 1e-16);
        assert!((a.bi - 0.614_926_627_446_000_735_15).abs() < 1e-15);
        assert!((a.bip - 0.448_288_357_353_826_357_91).abs() < 1e-15);
    }

    #[test]
    fn known_values() {
        // Ai(1), Bi(1), Ai(-1), Bi(-1) from tables.
        let p = airy_series(1.0);
        assert!((p.ai - 0.135_292_416_312_881_415_5).abs() < 1e-15);
        assert!((p.bi - 1.207_423_594_952_871_259_4).abs() < 1e-14);
        let m = airy_series(-1.0);
        assert!((m.ai - 0.535_560_883_292_352_079_3).abs() < 1e-15);
        assert!((m.bi - 0.103_997_389_496_944_594_1).abs() < 1e-15);
    }

    #[test]
    fn wronskian_is_one_over_pi() {
        for &x in &[0.0, 0.5, 2.0, 5.0, 6.9, 7.0, 20.0, 300.0, 1e4] {
            let a = airy_neg(x);
            let scale = a.modulus() * a.aip.hypot(a.bip);
            assert!((a.wronskian() - 1.0 / PI).abs() < 1e-11 * scale.max(1.0), "x = {x}: {}", a.wronskian());
        }
    }

    #[test]
    fn series_and_expansion_agree_in_overlap() {
        let mut x = 6.5;
        while x <= 7.5 {
            let s = airy_series(-x);
            let a = airy_asymptotic_neg(x);
            let m = s.modulus();
            let mp = s.aip.hypot(s.bip);
            assert!((s.ai - a.ai).abs() < 1e-10 * m, "Ai at {x}");
            assert!((s.bi - a.bi).abs() < 1e-10 * m, "Bi at {x}");
            assert!((s.aip - a.aip).abs() < 1e-10 * mp, "Ai' at {x}");
            assert!((s.bip - a.bip).abs() < 1e-10 * mp, "Bi' at {x}");
            x += 0.01;
        }
    }
}
