#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// `L_n^α(x) = Σ_k (-1)^k C(n+α, n-k) x^k / k!` in exact rational arithmetic.
pub fn laguerre_series_exact(n: u32, alpha: &BigRational, x: &BigRational) -> BigRational {
    let mut sum = BigRational::zero();
    for k in 0..=n {
        let mut term = BigRational::one();
        for j in 1..=(n - k) {
            term *= (alpha + BigRational::from_integer(BigInt::from(k + j))) / BigRational::from_integer(BigInt::from(j));
        }
        for j in 1..=k {
            term *= x / BigRational::from_integer(BigInt::from(j));
        }
        if k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
    }
    sum
}

/// Same series for integer `α` and `x = q/d`, summed over the common
/// denominator `n!·dⁿ` in integers.
pub fn laguerre_series_int(n: u32, alpha: u32, q: i64, d: i64) -> f64 {
    let binom = |top: u32, k: u32| -> BigInt {
        let mut c = BigInt::one();
        for j in 0..k {
            c = c * BigInt::from(top - j) / BigInt::from(j + 1);
        }
        c
    };
    let fact = |m: u32| (1..=m).fold(BigInt::one(), |acc, j| acc * BigInt::from(j));
    let mut num = BigInt::zero();
    for k in 0..=n {
        let falling: BigInt = ((k + 1)..=n).fold(BigInt::one(), |acc, j| acc * BigInt::from(j));
        let term = binom(n + alpha, n - k) * falling * BigInt::from(q).pow(k) * BigInt::from(d).pow(n - k);
        if k % 2 == 1 {
            num -= term;
        } else {
            num += term;
        }
    }
    let den = fact(n) * BigInt::from(d).pow(n);
    to_f64(&BigRational::new(num, den))
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite rational")
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}
