//! Bessel functions of the first kind for integer orders.
//!
//! Evaluation strategy:
//! * x <= 9: power series with compensated summation (alternating-series
//!   cancellation stays below ~700x the result there, keeping the relative
//!   error under ~2e-13);
//! * 9 < x <= 25: backward recurrence normalized by the series sum
//!   identity J_0 + 2 J_2 + 2 J_4 + ... = 1, which is cancellation free
//!   where the plain series is not (the Hankel expansion truncates above
//!   1e-12 in this window);
//! * x > 25: Hankel asymptotic expansions seed J_0 and J_1; higher orders
//!   follow by forward recurrence while the order stays safely below x, and
//!   by backward recurrence normalized against the asymptotic seeds
//!   otherwise.
//!
//! Target accuracy is 1e-12 relative away from zeros, checked against
//! high-precision reference values in the tests. Arguments outside the
//! trusted range are rejected rather than silently degraded: beyond
//! x ~ 1e4 the argument reduction in the asymptotic phase loses too many
//! digits.

use crate::scalar::{cast, cast_usize, Real};

/// Largest argument the evaluation path is trusted for.
pub const MAX_ARGUMENT: f64 = 1.0e4;
const SERIES_LIMIT: f64 = 9.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

#[derive(Debug, thiserror::Error)]
pub enum BesselError {
    #[error("argument {x} outside the reliable evaluation range (0, {MAX_ARGUMENT}]")]
    OutOfRange { x: f64 },
    #[error("order {k} too large (max {max})")]
    OrderTooLarge { k: usize, max: usize },
}

const MAX_ORDER: usize = 60;

/// J_0(x) .. J_kmax(x) in one call.
pub fn bessel_j_array<T: Real>(kmax: usize, x: T) -> Result<Vec<T>, BesselError> {
    let xf = x.to_f64().unwrap_or(f64::NAN);
    if !(xf >= 0.0) || xf > MAX_ARGUMENT {
        return Err(BesselError::OutOfRange { x: xf });
    }
    if kmax > MAX_ORDER {
        return Err(BesselError::OrderTooLarge { k: kmax, max: MAX_ORDER });
    }
    if xf == 0.0 {
        let mut out = vec![T::zero(); kmax + 1];
        out[0] = T::one();
        return Ok(out);
    }
    if xf <= SERIES_LIMIT {
        return Ok((0..=kmax).map(|k| series(k, x)).collect());
    }
    if xf <= ASYMPTOTIC_LIMIT {
        return Ok(miller_sum_normalized(kmax, x));
    }
    let j0 = hankel(0, x);
    let j1 = hankel(1, x);
    if (kmax as f64) + 2.0 <= xf {
        // forward recurrence is stable while the order stays below x
        let mut out = Vec::with_capacity(kmax + 1);
        out.push(j0);
        if kmax >= 1 {
            out.push(j1);
        }
        for k in 1..kmax {
            let next = cast::<T>(2.0) * cast_usize::<T>(k) / x * out[k] - out[k - 1];
            out.push(next);
        }
        Ok(out)
    } else {
        Ok(miller(kmax, x, j0, j1))
    }
}

pub fn bessel_j<T: Real>(k: usize, x: T) -> Result<T, BesselError> {
    Ok(bessel_j_array(k, x)?[k])
}

/// J_k'(x) = (J_{k-1} - J_{k+1}) / 2, with J_0' = -J_1.
pub fn bessel_j_derivative<T: Real>(k: usize, x: T) -> Result<T, BesselError> {
    if k == 0 {
        Ok(-bessel_j(1, x)?)
    } else {
        let j = bessel_j_array(k + 1, x)?;
        Ok((j[k - 1] - j[k + 1]) / cast::<T>(2.0))
    }
}

/// Power series sum_m (-1)^m (x/2)^(2m+k) / (m! (m+k)!), Kahan-compensated.
fn series<T: Real>(k: usize, x: T) -> T {
    let half_x = x / cast::<T>(2.0);
    let q = half_x * half_x;
    // leading term (x/2)^k / k!
    let mut term = T::one();
    for m in 1..=k {
        term = term * half_x / cast_usize::<T>(m);
    }
    let mut sum = term;
    let mut comp = T::zero();
    for m in 1..200 {
        term = -term * q / (cast_usize::<T>(m) * cast_usize::<T>(m + k));
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term.abs() < cast::<T>(1e-18) * sum.abs().max(cast::<T>(1e-30)) {
            break;
        }
    }
    sum
}

/// Hankel asymptotic expansion for k in {0, 1}, x > 12.
fn hankel<T: Real>(k: usize, x: T) -> T {
    let mu = cast::<T>((4 * k * k) as f64);
    let inv8x = T::one() / (cast::<T>(8.0) * x);
    // P: even chi-terms, Q: odd
    let mut p = T::one();
    let mut q = T::zero();
    let mut term = T::one();
    let mut prev_mag = T::infinity();
    for j in 1..20 {
        let a = cast::<T>((2 * j - 1) as f64);
        term = term * (mu - a * a) / cast_usize::<T>(j) * inv8x;
        let mag = term.abs();
        if mag >= prev_mag {
            break; // asymptotic series started diverging
        }
        prev_mag = mag;
        match j % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if mag < cast::<T>(1e-18) {
            break;
        }
    }
    let chi = x - (cast::<T>((2 * k + 1) as f64)) * T::PI() / cast::<T>(4.0);
    let amp = (cast::<T>(2.0) / (T::PI() * x)).sqrt();
    amp * (p * chi.cos() - q * chi.sin())
}

/// Raw backward recurrence down from a start order well above both the
/// requested order and x; `raw` then holds an unnormalized minimal solution.
fn miller_raw<T: Real>(kmax: usize, x: T) -> Vec<T> {
    let xf = x.to_f64().unwrap();
    // the guard band above max(order, x) controls how completely the
    // dominant solution dies out before order 0 is reached
    let guard = 30 + (xf / 2.0) as usize;
    let start = kmax.max(xf.ceil() as usize) + guard;
    let start = start + (start % 2); // even, convenient for the sum identity
    let mut jp = T::zero();
    let mut jc = cast::<T>(1e-30);
    let mut raw = vec![T::zero(); start + 1];
    raw[start] = jc;
    for k in (1..=start).rev() {
        let jm = cast::<T>(2.0) * cast_usize::<T>(k) / x * jc - jp;
        jp = jc;
        jc = jm;
        raw[k - 1] = jc;
        // rescale to avoid overflow
        if jc.abs() > cast::<T>(1e200) {
            let s = T::one() / jc.abs();
            for v in raw.iter_mut().skip(k - 1) {
                *v = *v * s;
            }
            jc = raw[k - 1];
            jp = raw[k];
        }
    }
    raw
}

/// Backward recurrence normalized by J_0 + 2 sum_m J_{2m} = 1.
fn miller_sum_normalized<T: Real>(kmax: usize, x: T) -> Vec<T> {
    let raw = miller_raw(kmax, x);
    let mut norm = raw[0];
    let mut m = 2;
    while m < raw.len() {
        norm += raw[m] + raw[m];
        m += 2;
    }
    (0..=kmax).map(|k| raw[k] / norm).collect()
}

/// Backward recurrence normalized against the asymptotic J_0 or J_1,
/// whichever is larger in magnitude.
fn miller<T: Real>(kmax: usize, x: T, j0: T, j1: T) -> Vec<T> {
    let raw = miller_raw(kmax, x);
    let scale = if j0.abs() >= j1.abs() { j0 / raw[0] } else { j1 / raw[1] };
    (0..=kmax).map(|k| raw[k] * scale).collect()
}
