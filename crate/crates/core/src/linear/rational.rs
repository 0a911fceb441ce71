use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// Nearest continued-fraction convergent of `v` with denominator at most
/// `max_den`, if it lies within `tol` (relative) of `v`.
pub fn rationalize_f64(v: f64, max_den: i64, tol: f64) -> Option<BigRational> {
    if !v.is_finite() {
        return None;
    }
    if v == 0.0 {
        return Some(BigRational::zero());
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut x = v;
    let mut best: Option<(i128, i128)> = None;
    for _ in 0..64 {
        let a = x.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i128;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > max_den as i128 {
            break;
        }
        best = Some((h2, k2));
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = x - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    let (h, k) = best?;
    let approx = h as f64 / k as f64;
    ((approx - v).abs() <= tol * v.abs()).then(|| BigRational::new(BigInt::from(h), BigInt::from(k)))
}

/// Exact binary value of a double.
pub fn exact_f64(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap_or_else(BigRational::zero)
}
