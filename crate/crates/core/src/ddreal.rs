//! Double-double arithmetic, used as a high-precision reference when checking
//! kernel identities that cancel catastrophically in plain `f64`.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// An unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdReal {
    pub hi: f64,
    pub lo: f64,
}

const LN2: DdReal = DdReal {
    hi: 0.693_147_180_559_945_3,
    lo: 2.319_046_813_846_299_6e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DdReal {
    pub const ZERO: DdReal = DdReal { hi: 0.0, lo: 0.0 };
    pub const ONE: DdReal = DdReal { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        DdReal { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn recip(self) -> Self {
        DdReal::ONE / self
    }

    fn mul_pow2(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        DdReal {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    /// `e^{-x}` for `x >= 0`.
    pub fn exp_neg(x: DdReal) -> DdReal {
        assert!(x.hi >= 0.0, "exp_neg expects a non-negative argument");
        if x.hi > 745.0 {
            return DdReal::ZERO;
        }
        let k = (x.hi / LN2.hi).round();
        // -x = -k ln2 + w with |w| <= ln2 / 2
        let w = LN2 * DdReal::new(k) - x;
        // e^w = (e^{w / 2^10})^{2^10}
        const SQUARINGS: i32 = 10;
        let small = w.mul_pow2(-SQUARINGS);
        let mut term = DdReal::ONE;
        let mut sum = DdReal::ONE;
        for j in 1..=12 {
            term = term * small / DdReal::new(j as f64);
            sum = sum + term;
        }
        for _ in 0..SQUARINGS {
            sum = sum * sum;
        }
        sum.mul_pow2(-(k as i32))
    }
}

impl From<f64> for DdReal {
    fn from(x: f64) -> Self {
        DdReal::new(x)
    }
}

impl Neg for DdReal {
    type Output = DdReal;
    fn neg(self) -> DdReal {
        DdReal {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DdReal {
    type Output = DdReal;
    fn add(self, rhs: DdReal) -> DdReal {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DdReal { hi, lo }
    }
}

impl Sub for DdReal {
    type Output = DdReal;
    fn sub(self, rhs: DdReal) -> DdReal {
        self + (-rhs)
    }
}

impl Mul for DdReal {
    type Output = DdReal;
    fn mul(self, rhs: DdReal) -> DdReal {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DdReal { hi, lo }
    }
}

impl Div for DdReal {
    type Output = DdReal;
    fn div(self, rhs: DdReal) -> DdReal {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * DdReal::new(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * DdReal::new(q2);
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DdReal { hi, lo } + DdReal::new(q3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // e^{-x} to 40 digits, split into (hi, lo)
    const REFERENCE: [(f64, f64, f64); 6] = [
        (9.5367431640625e-07, 0.9999990463261383, -1.4456025519888164e-19),
        (0.375, 0.6872892787909722, -3.7088003061371396e-17),
        (1.0, 0.36787944117144233, -1.2428753672788363e-17),
        (3.0, 0.049787068367863944, -1.4831389691394365e-18),
        (20.0, 2.061153622438558e-09, -4.19755767595054e-26),
        (100.0, 3.720075976020836e-44, -1.5705024907732008e-60),
    ];

    #[test]
    fn exp_neg_matches_multiprecision_reference() {
        for &(x, hi, lo) in &REFERENCE {
            let e = DdReal::exp_neg(DdReal::new(x));
            let err = ((e.hi - hi) + (e.lo - lo)).abs() / hi;
            assert!(err < 1e-29, "x = {x}: relative error {err:e}");
        }
    }

    #[test]
    fn division_round_trips() {
        let a = DdReal::new(1.0) / DdReal::new(3.0);
        let back = a * DdReal::new(3.0) - DdReal::ONE;
        assert!(back.to_f64().abs() < 1e-31);
    }
}
