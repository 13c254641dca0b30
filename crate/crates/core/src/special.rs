//! Special functions used by the correlation kernels and the dipole coupling
//! model: spherical and cylindrical Bessel functions of order zero, and the
//! sine/cosine integrals.

use num_complex::Complex64;
use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, FRAC_PI_4};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Spherical Bessel function of the first kind, order zero: `sin(x)/x`.
pub fn spherical_j0(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // sin(x)/x = 1 - x^2/6 + x^4/120 - ...
        let z = x * x;
        return 1.0 - z / 6.0 + z * z / 120.0;
    }
    x.sin() / x
}

// Zeros of J0 squared: (2.404825...)^2 and (5.520078...)^2.
const DR1: f64 = 5.783185962946784;
const DR2: f64 = 30.471262343662087;

/// Bessel function of the first kind, order zero.
///
/// On `[0, 5]` a rational approximation in `w = x^2` that carries the first
/// two zeros explicitly is used; above 5 the Hankel asymptotic form with two
/// rational correction terms. Absolute error is below 1e-15 on `|x| <= 100`.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 5.0 {
        let z = x * x;
        if x < 1e-5 {
            return 1.0 - z / 4.0;
        }
        let p = (z - DR1) * (z - DR2);
        return p * polevl(z, &RP) / p1evl(z, &RQ);
    }

    let w = 5.0 / x;
    let q = 25.0 / (x * x);
    let p = polevl(q, &PP) / polevl(q, &PQ);
    let q = polevl(q, &QP) / p1evl(q, &QQ);
    let xn = x - FRAC_PI_4;
    let p = p * xn.cos() - w * q * xn.sin();
    p * FRAC_2_PI.sqrt() / x.sqrt()
}

/// Horner evaluation, coefficients from highest degree down.
fn polevl(x: f64, coeffs: &[f64]) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// Same as [`polevl`] with an implicit leading coefficient of 1.
fn p1evl(x: f64, coeffs: &[f64]) -> f64 {
    coeffs.iter().fold(1.0, |acc, &c| acc * x + c)
}

static RP: [f64; 4] = [
    -4.794432209782018e9,
    1.9561749194655657e12,
    -2.4924834436096772e14,
    9.708622510473064e15,
];
static RQ: [f64; 8] = [
    4.99563147152651e2,
    1.737854016763747e5,
    4.844096583399621e7,
    1.1185553704535683e10,
    2.112775201154892e12,
    3.1051822985742256e14,
    3.1812195594320496e16,
    1.7108629408104315e18,
];
static PP: [f64; 7] = [
    7.969367292973471e-4,
    8.283523921074408e-2,
    1.239533716464143,
    5.447250030587687,
    8.74716500199817,
    5.303240382353949,
    1.0,
];
static PQ: [f64; 7] = [
    9.244088105588637e-4,
    8.562884743544745e-2,
    1.2535274390105895,
    5.470977403304171,
    8.761908832370695,
    5.306052882353947,
    1.0,
];
static QP: [f64; 8] = [
    -1.1366383889846916e-2,
    -1.2825271867050931,
    -1.9553954425773597e1,
    -9.320601521237683e1,
    -1.7768116798048806e2,
    -1.4707750515495118e2,
    -5.141053267665993e1,
    -6.050143506007285,
];
static QQ: [f64; 7] = [
    6.43178256118178e1,
    8.564300259769806e2,
    3.8824018360540163e3,
    7.240467741956525e3,
    5.930727011873169e3,
    2.0620933166032783e3,
    2.420057402402914e2,
];

/// Sine and cosine integrals `(Si(x), Ci(x))` for `x > 0`.
///
/// Power series below `x = 2`; above, the continued fraction for the
/// exponential integral `E1(ix)` evaluated with the modified Lentz method.
/// Both branches are accurate to a few ulps.
pub fn sine_cosine_integrals(x: f64) -> (f64, f64) {
    assert!(x > 0.0, "Si/Ci evaluated at non-positive argument {x}");
    if x <= 2.0 {
        return series_si_ci(x);
    }

    const TINY: f64 = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 2..10_000u32 {
        let a = -f64::from((i - 1) * (i - 1));
        b += Complex64::new(2.0, 0.0);
        d = (d * a + b).inv();
        c = b + c.inv() * a;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
            break;
        }
    }
    h *= Complex64::new(x.cos(), -x.sin());
    (FRAC_PI_2 + h.im, -h.re)
}

fn series_si_ci(x: f64) -> (f64, f64) {
    // Si = sum_k (-1)^k x^(2k+1) / ((2k+1)(2k+1)!)
    // Ci = gamma + ln x + sum_{k>=1} (-1)^k x^(2k) / (2k (2k)!)
    let mut si = 0.0;
    let mut ci = 0.0;
    let mut odd = x;
    let mut n = 1.0;
    while odd.abs() > 1e-18 {
        si += odd / n;
        let even = -odd * x / (n + 1.0);
        ci += even / (n + 1.0);
        odd = even * x / (n + 2.0);
        n += 2.0;
    }
    (si, EULER_GAMMA + x.ln() + ci)
}
