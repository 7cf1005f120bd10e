//! Small helpers on top of `num_complex` that the rest of the crate leans on.

use crate::{Complex, Error, Result};

pub const I: Complex = Complex::new(0.0, 1.0);
pub const TWO_PI_I: Complex = Complex::new(0.0, std::f64::consts::TAU);

#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

#[inline]
pub fn is_finite(z: Complex) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub fn ensure_finite(z: Complex, what: &'static str) -> Result<Complex> {
    if is_finite(z) {
        Ok(z)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Principal logarithm, rejecting the closed cut `]-inf, 0]`.
pub fn principal_log(w: Complex) -> Result<Complex> {
    if w.im == 0.0 && w.re <= 0.0 {
        return Err(Error::BranchCut { value: w });
    }
    Ok(w.ln())
}

/// `Log(1 + w)` accurate for small `w`.
pub fn log1p(w: Complex) -> Result<Complex> {
    let one_plus = Complex::new(1.0 + w.re, w.im);
    if w.im == 0.0 && one_plus.re <= 0.0 {
        return Err(Error::BranchCut { value: one_plus });
    }
    if w.norm() > 0.5 {
        return Ok(one_plus.ln());
    }
    // |1+w|^2 = 1 + (2 re w + |w|^2)
    let re = 0.5 * (2.0 * w.re + w.norm_sqr()).ln_1p();
    let im = w.im.atan2(1.0 + w.re);
    Ok(Complex::new(re, im))
}

/// `Log(1 + w) / w`, equal to 1 at `w = 0`.
pub fn log1p_over(w: Complex) -> Result<Complex> {
    let r = w.norm();
    if r < 1e-4 {
        // 1 - w/2 + w^2/3 - w^3/4
        let w2 = w * w;
        return Ok(Complex::new(1.0, 0.0) - w * 0.5 + w2 / 3.0 - w2 * w * 0.25);
    }
    Ok(log1p(w)? / w)
}

/// Distance from `p` to the segment `[a, b]`.
pub fn segment_distance(p: Complex, a: Complex, b: Complex) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * ab.conj()).re / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Argument mapped into `[0, 2pi)`.
pub fn arg_positive(z: Complex) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// Distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}
