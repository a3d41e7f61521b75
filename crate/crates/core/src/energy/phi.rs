use serde::{Deserialize, Serialize};

use super::constants::ConstantSet;
use super::EnergySnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiVariant {
    Critical,
    CriticalTilde,
    Sub,
    SubTilde,
    Toy,
    ToyTilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiFamily {
    Critical,
    Sub,
    Toy,
}

impl PhiFamily {
    /// Exponent `q` of the window `[0, ν^{-q}]` on which the time-weighted form is used.
    pub fn window_exponent(self) -> f64 {
        match self {
            PhiFamily::Critical => 3.0 / 5.0,
            PhiFamily::Sub => 3.0 / 7.0,
            PhiFamily::Toy => 2.0 / 3.0,
        }
    }

    pub fn variants(self) -> (PhiVariant, PhiVariant) {
        match self {
            PhiFamily::Critical => (PhiVariant::Critical, PhiVariant::CriticalTilde),
            PhiFamily::Sub => (PhiVariant::Sub, PhiVariant::SubTilde),
            PhiFamily::Toy => (PhiVariant::Toy, PhiVariant::ToyTilde),
        }
    }

    /// Time-weighted form before the window end, frozen weights after it.
    pub fn eval(self, snap: &EnergySnapshot, consts: &ConstantSet, nu: f64) -> (f64, PhiVariant) {
        let (early, late) = self.variants();
        if snap.t <= window_end(self, nu) {
            let v = match self {
                PhiFamily::Critical => phi_critical(snap, consts, nu),
                PhiFamily::Sub => phi_sub(snap, consts, nu),
                PhiFamily::Toy => phi_toy(snap, consts.alpha, nu),
            };
            (v, early)
        } else {
            let v = match self {
                PhiFamily::Critical => phi_tilde_critical(snap, consts, nu),
                PhiFamily::Sub => phi_tilde_sub(snap, consts, nu),
                PhiFamily::Toy => phi_tilde_toy(snap, consts.alpha, nu),
            };
            (v, late)
        }
    }
}

pub fn window_end(family: PhiFamily, nu: f64) -> f64 {
    nu.powf(-family.window_exponent())
}

fn combine(s: &EnergySnapshot, a: [f64; 3], w: [f64; 3]) -> f64 {
    s.e0 + a[0] * w[0] * s.e1 + a[1] * w[1] * s.cal_e1 + a[2] * w[2] * s.cal_e2
}

/// `E0 + a1 ν²t² E1 + a2 ν²t³ 𝓔1 + a3 ν²t⁴ 𝓔2`.
pub fn phi_critical(s: &EnergySnapshot, c: &ConstantSet, nu: f64) -> f64 {
    let t = s.t;
    let n2 = nu * nu;
    combine(s, [c.a1, c.a2, c.a3], [n2 * t * t, n2 * t.powi(3), n2 * t.powi(4)])
}

/// `E0 + a1 ν^{4/5} E1 + a2 ν^{1/5} 𝓔1 + a3 ν^{-2/5} 𝓔2`.
pub fn phi_tilde_critical(s: &EnergySnapshot, c: &ConstantSet, nu: f64) -> f64 {
    combine(s, [c.a1, c.a2, c.a3], [nu.powf(0.8), nu.powf(0.2), nu.powf(-0.4)])
}

/// `E0 + a1 νt E1 + a2 νt² 𝓔1 + a3 νt³ 𝓔2`.
pub fn phi_sub(s: &EnergySnapshot, c: &ConstantSet, nu: f64) -> f64 {
    let t = s.t;
    let sub = c.sub_coefficients();
    combine(s, sub, [nu * t, nu * t * t, nu * t.powi(3)])
}

/// `E0 + a1 ν^{4/7} E1 + a2 ν^{1/7} 𝓔1 + a3 ν^{-2/7} 𝓔2`.
pub fn phi_tilde_sub(s: &EnergySnapshot, c: &ConstantSet, nu: f64) -> f64 {
    let sub = c.sub_coefficients();
    combine(s, sub, [nu.powf(4.0 / 7.0), nu.powf(1.0 / 7.0), nu.powf(-2.0 / 7.0)])
}

/// Explicit toy coefficients `(2^{-20}|α|^{-1}, 2^{-32}|α|^{-1/2}, 2^{-40})`.
pub fn toy_coefficients(alpha: f64) -> [f64; 3] {
    let a = alpha.abs();
    [2f64.powi(-20) / a, 2f64.powi(-32) / a.sqrt(), 2f64.powi(-40)]
}

/// `E0 + a1 ν²t² E1 + a2 ν²t³ 𝓔1 + a3 ν²t⁴ 𝓔2` with the explicit toy coefficients.
pub fn phi_toy(s: &EnergySnapshot, alpha: f64, nu: f64) -> f64 {
    let t = s.t;
    let n2 = nu * nu;
    combine(s, toy_coefficients(alpha), [n2 * t * t, n2 * t.powi(3), n2 * t.powi(4)])
}

/// `E0 + a1 ν^{2/3} E1 + a2 𝓔1 + a3 ν^{-2/3} 𝓔2` with the explicit toy coefficients.
pub fn phi_tilde_toy(s: &EnergySnapshot, alpha: f64, nu: f64) -> f64 {
    combine(s, toy_coefficients(alpha), [nu.powf(2.0 / 3.0), 1.0, nu.powf(-2.0 / 3.0)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(t: f64) -> EnergySnapshot {
        EnergySnapshot {
            t,
            e0: 1.5,
            e_half: 2.0,
            e1: 3.0,
            e_3half: 4.0,
            e2_sub: 5.0,
            cal_e1: 0.7,
            cal_e2: 0.9,
            phi: 0.0,
            phi_variant: None,
        }
    }

    fn consts() -> ConstantSet {
        ConstantSet::from_c(2.0, 1.3, 2.0, 0.25, 0.9)
    }

    #[test]
    fn all_forms_reduce_to_e0_at_t_zero() {
        let c = consts();
        assert_eq!(phi_critical(&snap(0.0), &c, 1e-2), 1.5);
        assert_eq!(phi_sub(&snap(0.0), &c, 1e-2), 1.5);
        assert_eq!(phi_toy(&snap(0.0), 2.0, 1e-2), 1.5);
    }

    #[test]
    fn handoff_is_continuous() {
        let c = consts();
        for nu in [1e-2, 3e-4] {
            let t = window_end(PhiFamily::Critical, nu);
            let (a, b) = (phi_critical(&snap(t), &c, nu), phi_tilde_critical(&snap(t), &c, nu));
            assert!((a - b).abs() <= 1e-12 * a.abs());
            let t = window_end(PhiFamily::Sub, nu);
            let (a, b) = (phi_sub(&snap(t), &c, nu), phi_tilde_sub(&snap(t), &c, nu));
            assert!((a - b).abs() <= 1e-12 * a.abs());
            let t = window_end(PhiFamily::Toy, nu);
            let (a, b) = (phi_toy(&snap(t), 2.0, nu), phi_tilde_toy(&snap(t), 2.0, nu));
            assert!((a - b).abs() <= 1e-12 * a.abs());
        }
    }

    #[test]
    fn toy_coefficients_are_exact_powers_of_two() {
        let [a1, a2, a3] = toy_coefficients(-4.0);
        assert_eq!(a1, 2f64.powi(-22));
        assert_eq!(a2, 2f64.powi(-33));
        assert_eq!(a3, 2f64.powi(-40));
    }
}
