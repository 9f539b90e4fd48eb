//! Shared helpers for the integration tests.
//!
//! The quadrature here is an independent verification path: it is written
//! against the plain Gauss-Kronrod 15(7) rule and deliberately shares no
//! code with the crate's Runge-Kutta integrator, so hazard integrals can be
//! cross-checked without circularity.
#![allow(dead_code)]

/// Kronrod abscissae (positive half) for the 15-point rule; the 7-point
/// Gauss nodes are the entries at odd indices.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 15(7) panel; returns the Kronrod estimate and the
/// absolute difference to the embedded Gauss estimate as an error bound.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let hc = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    let fc = f(c);
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    for (j, (&x, &wk)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = hc * x;
        let fsum = f(c - dx) + f(c + dx);
        resk += wk * fsum;
        if j % 2 == 1 {
            resg += WG[(j - 1) / 2] * fsum;
        }
    }
    (resk * hc, (resk - resg).abs() * hc.abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (est, err) = gk15(f, a, b);
    if err <= tol || (b - a).abs() <= 4.0 * f64::EPSILON * (a.abs().max(b.abs()) + 1.0) {
        return est;
    }
    assert!(depth < 60, "quadrature failed to converge on [{a}, {b}] (err {err:e})");
    let m = 0.5 * (a + b);
    adaptive(f, a, m, 0.5 * tol, depth + 1) + adaptive(f, m, b, 0.5 * tol, depth + 1)
}

/// Adaptive quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    assert!(a.is_finite() && b.is_finite() && b >= a, "bad interval [{a}, {b}]");
    assert!(tol > 0.0, "tol must be positive");
    adaptive(&f, a, b, tol, 0)
}
