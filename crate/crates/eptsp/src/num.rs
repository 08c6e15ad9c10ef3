//! Exact rational scalars.
//!
//! All cell corners, portal positions, and side crossings produced by the
//! pipeline are rationals with small denominators (powers of two times n²),
//! so a reduced `i128/i128` fraction covers every value exactly. Keeping
//! these exact is what lets tests compare positions with `==` instead of
//! tolerances, and keeps the dynamic program's position matching free of
//! rounding drift.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Reduced fraction `num/den` with `den > 0`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rat {
    num: i128,
    den: i128,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

// Floor division for i128 (rounds toward negative infinity).
fn floor_div(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    let q = a / b;
    if a % b < 0 {
        q - 1
    } else {
        q
    }
}

impl Rat {
    pub fn new(num: i128, den: i128) -> Rat {
        assert!(den != 0, "rational with zero denominator");
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd(num.unsigned_abs(), den as u128) as i128;
        if g <= 1 {
            Rat { num, den }
        } else {
            Rat { num: num / g, den: den / g }
        }
    }

    pub fn int(v: i128) -> Rat {
        Rat { num: v, den: 1 }
    }

    /// `v/2`; cell corners live on the half-integer grid.
    pub fn half(v: i128) -> Rat {
        Rat::new(v, 2)
    }

    pub fn zero() -> Rat {
        Rat { num: 0, den: 1 }
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn den(&self) -> i128 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn floor(&self) -> i128 {
        floor_div(self.num, self.den)
    }

    /// Nearest multiple of `1/step_den`, ties rounded up.
    pub fn round_to(&self, step_den: i128) -> Rat {
        assert!(step_den > 0);
        let scaled_num = 2 * self.num * step_den + self.den;
        let k = floor_div(scaled_num, 2 * self.den);
        Rat::new(k, step_den)
    }

    pub fn min(self, other: Rat) -> Rat {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Rat) -> Rat {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Add for Rat {
    type Output = Rat;
    fn add(self, rhs: Rat) -> Rat {
        Rat::new(self.num * rhs.den + rhs.num * self.den, self.den * rhs.den)
    }
}

impl Sub for Rat {
    type Output = Rat;
    fn sub(self, rhs: Rat) -> Rat {
        Rat::new(self.num * rhs.den - rhs.num * self.den, self.den * rhs.den)
    }
}

impl Mul for Rat {
    type Output = Rat;
    fn mul(self, rhs: Rat) -> Rat {
        // Reduce across the diagonal first so intermediate products stay small.
        let g1 = gcd(self.num.unsigned_abs(), rhs.den as u128) as i128;
        let g2 = gcd(rhs.num.unsigned_abs(), self.den as u128) as i128;
        Rat::new((self.num / g1) * (rhs.num / g2), (self.den / g2) * (rhs.den / g1))
    }
}

impl Div for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        assert!(rhs.num != 0, "division by zero rational");
        Rat::new(self.num * rhs.den, self.den * rhs.num)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat { num: -self.num, den: self.den }
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Rat) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Rat) -> Ordering {
        // Denominators are positive, so cross-multiplication preserves order.
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Floor of `x` under the restricted machine model: the argument must fit in
/// `bits` bits, so the operation is implementable with word-size integer
/// arithmetic. Callers pass the bound they can prove about `x`.
pub fn bounded_floor(x: f64, bits: u32) -> i64 {
    assert!(bits <= 62, "floor bound exceeds word size");
    let bound = (1u64 << bits) as f64;
    assert!(
        x.is_finite() && x.abs() < bound,
        "floor argument {x} outside 2^{bits} range"
    );
    x.floor() as i64
}
