//! Special functions: the modified Bessel function K₁ and the standard normal law.

use std::f64::consts::{FRAC_1_SQRT_2, PI};



const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function, accurate in both tails.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Modified Bessel function of the second kind, order one.
pub fn bessel_k1(x: f64) -> f64 {
    if x <= 2.0 {
        k1_series(x)
    } else {
        bessel_k1_scaled(x) * (-x).exp()
    }
}

/// `e^x · K₁(x)`, which stays representable for large arguments.
pub fn bessel_k1_scaled(x: f64) -> f64 {
    assert!(x > 0.0, "K1 requires a positive argument");
    if x <= 2.0 {
        k1_series(x) * x.exp()
    } else {
        k1_steed_scaled(x)
    }
}

/// `ln K₁(x)` without overflow or underflow.
pub fn ln_bessel_k1(x: f64) -> f64 {
    if x <= 2.0 {
        k1_series(x).ln()
    } else {
        k1_steed_scaled(x).ln() - x
    }
}

// Ascending series, used on (0, 2].
fn k1_series(x: f64) -> f64 {
    assert!(x > 0.0, "K1 requires a positive argument");
    let y = 0.25 * x * x;
    // I1 and the digamma-weighted companion series share the same powers of y.
    let mut term = 0.5 * x; // (x/2)^{2k+1} / (k! (k+1)!)
    let mut i1 = 0.0;
    let mut tail = 0.0;
    let mut psi_k1 = -EULER_GAMMA; // ψ(k+1)
    let mut psi_k2 = 1.0 - EULER_GAMMA; // ψ(k+2)
    for k in 0..60 {
        i1 += term;
        tail += (psi_k1 + psi_k2) * term;
        let kf = k as f64;
        term *= y / ((kf + 1.0) * (kf + 2.0));
        psi_k1 += 1.0 / (kf + 1.0);
        psi_k2 += 1.0 / (kf + 2.0);
        if term < 1e-18 * i1 {
            break;
        }
    }
    1.0 / x + (0.5 * x).ln() * i1 - 0.5 * tail
}

// Steed's continued fraction (Temme's CF2) for x > 2, scaled by e^x.
fn k1_steed_scaled(x: f64) -> f64 {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    k0 * (x + 0.5 - h) / x
}
