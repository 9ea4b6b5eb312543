//! Associated Laguerre polynomials and the orthonormal Laguerre functions
//! built on them.

use crate::error::{domain, Result};

/// Associated Laguerre polynomial `L_n^alpha(x)` by the forward three-term
/// recurrence `k L_k = (2k-1+alpha-x) L_{k-1} - (k-1+alpha) L_{k-2}`.
pub fn laguerre(n: u32, alpha: f64, x: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > -1.0) {
        return Err(domain("laguerre", format!("alpha must be > -1, got {alpha}")));
    }
    if !x.is_finite() {
        return Err(domain("laguerre", format!("x must be finite, got {x}")));
    }
    Ok(laguerre_unchecked(n, alpha, x))
}

pub(crate) fn laguerre_unchecked(n: u32, alpha: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    // double-double keeps the relative error small next to the zeros
    let mut prev = Dd::from(1.0);
    let mut cur = Dd::sum(1.0 + alpha, -x).add(Dd::err(1.0, alpha));
    for k in 2..=n {
        let k = f64::from(k);
        let a = Dd::sum(2.0 * k - 1.0, alpha).add(Dd::from(-x));
        let b = Dd::sum(k - 1.0, alpha);
        let next = a.mul(cur).add(b.mul(prev).neg()).div_f64(k);
        prev = cur;
        cur = next;
    }
    cur.hi + cur.lo
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(hi: f64) -> Self {
        Dd { hi, lo: 0.0 }
    }
}

impl Dd {
    fn sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Dd {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    /// Rounding error of `a + b` alone.
    fn err(a: f64, b: f64) -> Self {
        Dd::from(Dd::sum(a, b).lo)
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Dd { hi: s, lo: lo - (s - hi) }
    }

    fn add(self, o: Dd) -> Self {
        let s = Dd::sum(self.hi, o.hi);
        Dd::renorm(s.hi, s.lo + self.lo + o.lo)
    }

    fn neg(self) -> Self {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn mul(self, o: Dd) -> Self {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Dd::renorm(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    fn div_f64(self, d: f64) -> Self {
        let q = self.hi / d;
        let r = Dd::from(q).mul(Dd::from(d));
        let rem = self.add(r.neg());
        Dd::renorm(q, (rem.hi + rem.lo) / d)
    }
}

/// `ln(n!)` for the small integer arguments that show up as |l|.
pub(crate) fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| f64::from(k).ln()).sum()
}

const RESCALE: f64 = 1e200;

/// Evaluates the orthonormal Laguerre functions
///
/// `phi_p(x) = sqrt(p!/(p+a)!) x^(a/2) e^(-x/2) L_p^a(x)`,  `p = 0..=pmax`,
///
/// calling `sink(p, phi_p(x))` for each `p` in order. The recurrence runs on a
/// rescaled mantissa with a separately tracked log-scale, so it stays exact
/// where `e^(-x/2)` alone would underflow (large `x` near the turning point
/// of a high-order function).
pub(crate) fn for_each_laguerre_function(a: u32, x: f64, pmax: usize, mut sink: impl FnMut(usize, f64)) {
    let af = f64::from(a);
    let mut log_scale = -0.5 * x - 0.5 * ln_factorial(a);
    if a > 0 {
        if x == 0.0 {
            for p in 0..=pmax {
                sink(p, 0.0);
            }
            return;
        }
        log_scale += 0.5 * af * x.ln();
    }
    let mut prev = 1.0_f64;
    sink(0, log_scale.exp());
    if pmax == 0 {
        return;
    }
    let mut cur = (1.0 + af - x) / (1.0 + af).sqrt();
    sink(1, cur * log_scale.exp());
    for p in 2..=pmax {
        let pf = p as f64;
        let norm = (pf * (pf + af)).sqrt();
        let next = (2.0 * pf - 1.0 + af - x) / norm * cur
            - ((pf - 1.0) * (pf - 1.0 + af)).sqrt() / norm * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
        }
        sink(p, cur * log_scale.exp());
    }
}

/// Single orthonormal Laguerre function value; see [`for_each_laguerre_function`].
pub(crate) fn laguerre_function(p: u32, a: u32, x: f64) -> f64 {
    let mut out = 0.0;
    for_each_laguerre_function(a, x, p as usize, |k, v| {
        if k == p as usize {
            out = v;
        }
    });
    out
}

/// Positive zeros of `L_n^a(x)` in increasing order.
///
/// All `n` zeros lie in `(0, 4n + 2a + 2)`. Brackets come from a grid that is
/// quadratic in `x` (zeros crowd toward the origin) and are refined by
/// bisection to full precision.
pub fn laguerre_zeros(n: u32, a: u32) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let alpha = f64::from(a);
    let upper = 4.0 * f64::from(n) + 2.0 * alpha + 2.0;
    let steps = 256 * (n as usize + 1);
    let mut zeros = Vec::with_capacity(n as usize);
    let at = |x: f64| laguerre_unchecked(n, alpha, x);
    let mut x0 = 0.0;
    let mut f0 = at(x0);
    for k in 1..=steps {
        let t = k as f64 / steps as f64;
        let x1 = upper * t * t;
        let f1 = at(x1);
        if f1 == 0.0 {
            zeros.push(x1);
        } else if f0 != 0.0 && f0.signum() != f1.signum() {
            let (mut lo, mut hi, mut flo) = (x0, x1, f0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = at(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    zeros
}
