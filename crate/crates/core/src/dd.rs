//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64`s,
//! giving roughly 32 significant digits.
//!
//! Only what the finite-difference gradient oracle needs is provided. A
//! central difference divides a loss difference by `2ε`, so plain `f64`
//! rounding in the loss (about `1e-16` relative) becomes an absolute
//! gradient error of order `1e-11`, which swamps genuinely small gradients.
//! Evaluating the loss in double-double pushes that floor far below the
//! truncation error of the difference itself.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.3190468138462996e-17,
};

/// Halvings applied before the exponential series.
const EXP_HALVINGS: i32 = 10;
/// Series terms: with |r| ≤ ln2/2 / 2^10 the 14th term is below 1e-60.
const EXP_TERMS: u32 = 13;

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd {
        hi: s,
        lo: b - (s - a),
    }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl Dd {
    pub(crate) const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub(crate) const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub(crate) fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn scale(self, factor: f64) -> Dd {
        // Exact for powers of two away from overflow and underflow.
        Dd {
            hi: self.hi * factor,
            lo: self.lo * factor,
        }
    }

    /// `e^x`, by reducing `x = k·ln2 + r`, halving `r` and squaring back.
    pub(crate) fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::from(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * Dd::from(k)).scale(0.5f64.powi(EXP_HALVINGS));
        // expm1(r) by Horner: r(1 + r/2(1 + r/3(1 + ...))).
        let mut p = Dd::ONE;
        for n in (2..=EXP_TERMS).rev() {
            p = Dd::ONE + r * p / Dd::from(f64::from(n));
        }
        let mut m = r * p;
        // expm1(2r) = expm1(r)·(2 + expm1(r)).
        for _ in 0..EXP_HALVINGS {
            m = m * (Dd::from(2.0) + m);
        }
        (Dd::ONE + m).scale(2f64.powi(k as i32))
    }

    /// `tanh(x/2)`, the network activation.
    pub(crate) fn activation(self) -> Dd {
        let e = (-self.abs()).exp();
        let y = (Dd::ONE - e) / (Dd::ONE + e);
        if self.hi < 0.0 {
            -y
        } else {
            y
        }
    }
}

impl From<f64> for Dd {
    fn from(hi: f64) -> Self {
        Dd { hi, lo: 0.0 }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, rhs: Dd) -> Dd {
        let s = two_sum(self.hi, rhs.hi);
        let t = two_sum(self.lo, rhs.lo);
        let u = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(u.hi, u.lo + t.lo)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, rhs: Dd) -> Dd {
        self + -rhs
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, rhs: Dd) -> Dd {
        let p = two_prod(self.hi, rhs.hi);
        quick_two_sum(p.hi, p.lo + (self.hi * rhs.lo + self.lo * rhs.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Dd::from(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Dd::from(q2);
        let q3 = r.hi / rhs.hi;
        let q = quick_two_sum(q1, q2);
        q + Dd::from(q3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(got: Dd, hi: f64, lo: f64) {
        let want = Dd { hi, lo };
        let err = (got - want).abs().to_f64();
        assert!(
            err <= 1e-30 * hi.abs(),
            "got {got:?}, want {want:?}, err {err:e}"
        );
    }

    #[test]
    fn arithmetic_keeps_the_low_word() {
        close(
            Dd::ONE / Dd::from(3.0),
            0.3333333333333333,
            1.850371707708594e-17,
        );
        let tiny = Dd::from(1e-20);
        assert_eq!((Dd::ONE + tiny - Dd::ONE).to_f64(), 1e-20);
        assert_eq!(
            (Dd::from(1.0 + f64::EPSILON) * Dd::from(1.0 - f64::EPSILON)).lo,
            -f64::EPSILON * f64::EPSILON
        );
    }

    #[test]
    fn exp_matches_reference() {
        close(
            Dd::from(1.0).exp(),
            std::f64::consts::E,
            1.4456468917292502e-16,
        );
        close(
            Dd::from(-1.0).exp(),
            0.36787944117144233,
            -1.2428753672788363e-17,
        );
        close(
            Dd::from(0.5).exp(),
            1.6487212707001282,
            -4.731568479435833e-17,
        );
        close(
            Dd::from(20.0).exp(),
            485165195.4097903,
            4.880277289790406e-10,
        );
        close(
            Dd::from(-30.5).exp(),
            5.675685232632723e-14,
            -2.744021414416088e-30,
        );
        close(
            Dd::from(1e-3).exp(),
            1.0010005001667084,
            -4.290842058948394e-17,
        );
        assert_eq!(Dd::ZERO.exp(), Dd::ONE);
    }

    #[test]
    fn activation_matches_reference() {
        close(
            Dd::from(0.7).activation(),
            0.3363755443363322,
            -1.725697682685358e-17,
        );
        close(
            Dd::from(-2.0).activation(),
            -0.7615941559557649,
            -3.7090214482164924e-17,
        );
        close(
            Dd::from(12.0).activation(),
            0.9999877116507956,
            -1.486308258098996e-17,
        );
        let small = Dd::from(1e-6).activation();
        let want = Dd {
            hi: 4.999999999999583e-7,
            lo: 4.9705985611797357e-23,
        };
        assert!((small - want).abs().to_f64() < 1e-31);
        assert_eq!(Dd::ZERO.activation(), Dd::ZERO);
    }
}
