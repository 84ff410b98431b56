//! Bessel function of the first kind, order zero, and its positive zeros.
//!
//! Three evaluation regimes cover the real line:
//! * `|x| ≤ 8`: power series with compensated summation,
//! * `8 < |x| ≤ 30`: Miller backward recurrence normalized by 1 = J₀ + 2ΣJ₂ₖ,
//! * `|x| > 30`: Hankel asymptotic expansion truncated at its smallest term.
//!
//! J₁ is evaluated alongside J₀ in each regime; it is only used as the
//! derivative J₀' = −J₁ for root polishing.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{CdtError, Result};

const SERIES_LIMIT: f64 = 8.0;
const RECURRENCE_LIMIT: f64 = 30.0;
pub const MAX_ROOT_INDEX: usize = 30;

/// J₀(x).
pub fn bessel_j0(x: f64) -> f64 {
    j0_j1(x).0
}

/// (J₀(x), J₁(x)).
pub(crate) fn j0_j1(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (j0, j1) = if ax <= SERIES_LIMIT {
        series(ax)
    } else if ax <= RECURRENCE_LIMIT {
        miller(ax)
    } else {
        hankel(ax)
    };
    // J₀ is even, J₁ odd.
    (j0, if x < 0.0 { -j1 } else { j1 })
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.comp += (self.sum - t) + term;
        } else {
            self.comp += (term - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let mut s0 = KahanSum::default();
    let mut s1 = KahanSum::default();
    // t0_k = (−q)^k/(k!)², t1_k = (−q)^k/(k!(k+1)!)
    let mut t0: f64 = 1.0;
    let mut t1: f64 = 1.0;
    for k in 0..60 {
        s0.add(t0);
        s1.add(t1);
        let kf = (k + 1) as f64;
        t0 *= -q / (kf * kf);
        t1 *= -q / (kf * (kf + 1.0));
        if t0.abs() < 1e-18 * s0.value().abs().max(1e-300) && t1.abs() < 1e-18 {
            break;
        }
    }
    (s0.value(), 0.5 * x * s1.value())
}

fn miller(x: f64) -> (f64, f64) {
    // Even start order well above x so the seeded tail has decayed to noise.
    let start = 2 * (((x + 40.0 + 6.0 * x.cbrt()) / 2.0).ceil() as usize);
    let mut next = 0.0; // J_{n+1}
    let mut cur = 1e-300; // J_n
    let mut norm = KahanSum::default();
    let mut j0 = 0.0;
    let mut j1 = 0.0;
    for n in (1..=start).rev() {
        let prev = 2.0 * n as f64 / x * cur - next; // J_{n-1}
        next = cur;
        cur = prev;
        let order = n - 1;
        if order == 1 {
            j1 = cur;
        }
        if order == 0 {
            j0 = cur;
        }
        if order > 0 && order % 2 == 0 {
            norm.add(2.0 * cur);
        }
        if cur.abs() > 1e250 {
            let s = 1e-250;
            cur *= s;
            next *= s;
            norm = KahanSum {
                sum: norm.sum * s,
                comp: norm.comp * s,
            };
            j1 *= s;
        }
    }
    norm.add(j0);
    let scale = norm.value();
    (j0 / scale, j1 / scale)
}

fn hankel(x: f64) -> (f64, f64) {
    let (p0, q0) = hankel_pq(0.0, x);
    let (p1, q1) = hankel_pq(4.0, x);
    let amp = (2.0 / (PI * x)).sqrt();
    // cos/sin of x − π/4 and x − 3π/4 via angle addition to keep x exact.
    let (s, c) = x.sin_cos();
    let (s4, c4) = FRAC_PI_4.sin_cos();
    let cos_a = c * c4 + s * s4;
    let sin_a = s * c4 - c * s4;
    // x − 3π/4 = (x − π/4) − π/2
    let cos_b = sin_a;
    let sin_b = -cos_a;
    (
        amp * (p0 * cos_a - q0 * sin_a),
        amp * (p1 * cos_b - q1 * sin_b),
    )
}

/// P and Q series of the Hankel expansion with μ = 4ν², summed until the
/// terms stop decreasing.
fn hankel_pq(mu: f64, x: f64) -> (f64, f64) {
    let mut p = KahanSum::default();
    let mut q = KahanSum::default();
    let mut term: f64 = 1.0; // a_k(ν) / x^k
    let mut last = f64::INFINITY;
    for k in 0..200usize {
        if term.abs() > last || term.abs() < 1e-20 {
            break;
        }
        last = term.abs();
        // P takes even k with sign (−1)^{k/2}, Q odd k with sign (−1)^{(k−1)/2}.
        match k % 4 {
            0 => p.add(term),
            1 => q.add(term),
            2 => p.add(-term),
            _ => q.add(-term),
        }
        let odd = (2 * k + 1) as f64;
        term *= (mu - odd * odd) / ((k + 1) as f64 * 8.0 * x);
    }
    (p.value(), q.value())
}

/// k-th positive zero of J₀, for 1 ≤ k ≤ 30.
pub fn j0_root(k: usize) -> Result<f64> {
    if !(1..=MAX_ROOT_INDEX).contains(&k) {
        return Err(CdtError::RootIndexOutOfRange(k));
    }
    // McMahon's leading estimate sits within 0.05 of every zero; consecutive
    // zeros are ≈ π apart, so ±0.5 brackets exactly one.
    let guess = (k as f64 - 0.25) * PI;
    let (mut lo, mut hi) = (guess - 0.5, guess + 0.5);
    let mut f_lo = bessel_j0(lo);
    debug_assert!(f_lo * bessel_j0(hi) < 0.0);
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        let f_mid = bessel_j0(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..20 {
        let (j0, j1) = j0_j1(x);
        let step = j0 / j1;
        x += step;
        if step.abs() <= 1e-16 * x {
            break;
        }
    }
    Ok(x)
}
