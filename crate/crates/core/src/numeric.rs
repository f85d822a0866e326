//! Small numerical helpers: double-double accumulation and fixed quadrature.

use std::ops::{Add, Mul, Neg, Sub};

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`, giving roughly 32
/// significant digits.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TwoFloat {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
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

impl TwoFloat {
    pub const ZERO: TwoFloat = TwoFloat { hi: 0.0, lo: 0.0 };
    pub const ONE: TwoFloat = TwoFloat { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        TwoFloat { hi: x, lo: 0.0 }
    }

    /// Exact product of two doubles.
    pub fn product(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        TwoFloat { hi, lo }
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add_f64(self, b: f64) -> Self {
        let (s, e) = two_sum(self.hi, b);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        TwoFloat { hi, lo }
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        TwoFloat { hi, lo }
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.hi;
        // one Newton step: r + r (1 - x r)
        let err = TwoFloat::ONE - self.mul_f64(r);
        TwoFloat::new(r) + err.mul_f64(r)
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl From<f64> for TwoFloat {
    fn from(x: f64) -> Self {
        TwoFloat::new(x)
    }
}

impl Add for TwoFloat {
    type Output = TwoFloat;
    fn add(self, b: TwoFloat) -> TwoFloat {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        TwoFloat { hi, lo }
    }
}

impl Neg for TwoFloat {
    type Output = TwoFloat;
    fn neg(self) -> TwoFloat {
        TwoFloat {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for TwoFloat {
    type Output = TwoFloat;
    fn sub(self, b: TwoFloat) -> TwoFloat {
        self + (-b)
    }
}

impl Mul for TwoFloat {
    type Output = TwoFloat;
    fn mul(self, b: TwoFloat) -> TwoFloat {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        TwoFloat { hi, lo }
    }
}

impl std::iter::Sum for TwoFloat {
    fn sum<I: Iterator<Item = TwoFloat>>(iter: I) -> TwoFloat {
        iter.fold(TwoFloat::ZERO, |a, b| a + b)
    }
}

/// Sum of doubles accumulated in double-double.
pub fn accurate_sum<I: IntoIterator<Item = f64>>(values: I) -> TwoFloat {
    values
        .into_iter()
        .fold(TwoFloat::ZERO, |acc, x| acc.add_f64(x))
}

/// Dot product accumulated in double-double (Ogita–Rump–Oishi `Dot2`).
pub fn accurate_dot(a: &[f64], b: &[f64]) -> TwoFloat {
    a.iter()
        .zip(b)
        .fold(TwoFloat::ZERO, |acc, (&x, &y)| acc + TwoFloat::product(x, y))
}

/// 8-point Gauss–Legendre nodes and weights on [-1, 1].
pub const GAUSS_LEGENDRE_8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_48),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_48),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Average of `f` over `[a, b]` by 8-point Gauss–Legendre.
pub fn cell_average<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    0.5 * GAUSS_LEGENDRE_8
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
