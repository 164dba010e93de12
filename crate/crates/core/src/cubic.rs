//! Roots of the monic cubic λ³ + aλ² + bλ + c with real coefficients.
//!
//! Cardano/trigonometric closed forms seeded into a complex Newton
//! polish. The closed forms alone lose digits near repeated roots
//! (exactly the bifurcation points the dispersion analysis cares
//! about), so every root is refined until the residual satisfies
//! |p(λ)| < 1e-8 · max(1, |a|, |b|, |c|).

use crate::math;
use alloc::vec::Vec;
use num_complex::Complex64;

const TWO_PI: f64 = core::f64::consts::TAU;

/// Residual bound scale for accepted roots.
pub fn residual_scale(a: f64, b: f64, c: f64) -> f64 {
    1.0f64.max(math::fabs(a)).max(math::fabs(b)).max(math::fabs(c))
}

fn eval(a: f64, b: f64, c: f64, z: Complex64) -> Complex64 {
    ((z + a) * z + b) * z + c
}

fn eval_deriv(a: f64, b: f64, z: Complex64) -> Complex64 {
    (3.0 * z + 2.0 * a) * z + b
}

fn newton_polish(a: f64, b: f64, c: f64, mut z: Complex64) -> Complex64 {
    for _ in 0..20 {
        let p = eval(a, b, c, z);
        let dp = eval_deriv(a, b, z);
        if dp.norm_sqr() == 0.0 {
            break;
        }
        let step = p / dp;
        let next = z - step;
        if !next.re.is_finite() || !next.im.is_finite() {
            break;
        }
        z = next;
        if step.norm_sqr() <= (1e-32) * z.norm_sqr().max(1.0) {
            break;
        }
    }
    // collapse numerically-real roots
    if math::fabs(z.im) <= 1e-12 * math::fabs(z.re).max(1.0) {
        let re_only = Complex64::new(z.re, 0.0);
        if eval(a, b, c, re_only).norm_sqr() <= eval(a, b, c, z).norm_sqr() * (1.0 + 1e-9) {
            z = re_only;
        }
    }
    z
}

/// The three roots, sorted by descending real part (ties by descending
/// imaginary part). Complex roots come out in conjugate pairs.
pub fn roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    // depressed form t³ + pt + q with λ = t − a/3
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = (2.0 * a * a * a / 27.0) - a * b / 3.0 + c;

    let mut out: Vec<Complex64> = Vec::with_capacity(3);
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
    if p == 0.0 && q == 0.0 {
        out.extend([Complex64::new(-shift, 0.0); 3]);
    } else if disc > 0.0 {
        // one real root, one conjugate pair
        let sd = math::sqrt(disc);
        let u = math::cbrt(-q / 2.0 + sd);
        let v = math::cbrt(-q / 2.0 - sd);
        let real_t = u + v;
        let re_pair = -real_t / 2.0;
        let im_pair = math::sqrt(3.0) / 2.0 * (u - v);
        out.push(Complex64::new(real_t - shift, 0.0));
        out.push(Complex64::new(re_pair - shift, math::fabs(im_pair)));
        out.push(Complex64::new(re_pair - shift, -math::fabs(im_pair)));
    } else {
        // three real roots via the trigonometric form
        let r = math::sqrt(-p / 3.0);
        let arg = if r == 0.0 { 0.0 } else { (3.0 * q) / (2.0 * p * r) };
        let theta = math::acos(arg.clamp(-1.0, 1.0));
        for k in 0..3 {
            let t = 2.0 * r * math::cos((theta - TWO_PI * k as f64) / 3.0);
            out.push(Complex64::new(t - shift, 0.0));
        }
    }

    let mut polished: Vec<Complex64> = out.into_iter().map(|z| newton_polish(a, b, c, z)).collect();

    // re-pair conjugates so rounding cannot leave an unmatched imaginary part
    for z in polished.iter_mut() {
        if math::fabs(z.im) > 0.0 && math::fabs(z.im) < 1e-10 * residual_scale(a, b, c) {
            z.im = 0.0;
        }
    }
    if let Some(i) = polished.iter().position(|z| z.im > 0.0) {
        if let Some(j) = polished.iter().position(|z| z.im < 0.0) {
            polished[j] = polished[i].conj();
        }
    }

    polished.sort_by(|x, y| {
        y.re.partial_cmp(&x.re)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(y.im.partial_cmp(&x.im).unwrap_or(core::cmp::Ordering::Equal))
    });
    [polished[0], polished[1], polished[2]]
}

/// Max residual |p(λ)| over the three returned roots.
pub fn max_residual(a: f64, b: f64, c: f64, rts: &[Complex64; 3]) -> f64 {
    rts.iter()
        .map(|&z| math::sqrt(eval(a, b, c, z).norm_sqr()))
        .fold(0.0, f64::max)
}
