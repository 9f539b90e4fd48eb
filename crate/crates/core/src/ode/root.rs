//! Event location on dense output.

use super::dense::DenseSolution;
use super::OdeError;

const MAX_BRENT_ITERS: u32 = 200;

/// Locates the leftmost sign change of `g(y(t), t)` inside `[t_lo, t_hi]`.
///
/// The bracket is scanned segment by segment over the accepted steps; on the
/// first sign change between consecutive scan points the root is refined
/// with Brent's method (bisection plus inverse quadratic interpolation) on
/// the interpolant. Crossings that enter and leave within a single accepted
/// step are invisible to the scan; step placement is owned entirely by the
/// integrator's error control.
///
/// The returned time is accurate to `max(1e-14, 1e-12 * |integrated span|)`.
pub fn find_root<G>(sol: &DenseSolution, g: G, t_lo: f64, t_hi: f64) -> Result<f64, OdeError>
where
    G: Fn(&[f64], f64) -> f64,
{
    let span_lo = sol.t_start();
    let span_hi = sol.t_reached();
    let slack = 8.0 * f64::EPSILON * span_lo.abs().max(span_hi.abs()).max(1.0);
    if !t_lo.is_finite() || !t_hi.is_finite() || t_lo >= t_hi || t_lo < span_lo - slack || t_hi > span_hi + slack {
        return Err(OdeError::BracketInvalid { t_lo, t_hi });
    }
    let t_lo = t_lo.clamp(span_lo, span_hi);
    let t_hi = t_hi.clamp(span_lo, span_hi);

    let tol = 1e-14f64.max(1e-12 * (span_hi - span_lo).abs());
    let mut buf = vec![0.0; sol.endpoint_state().len()];
    let mut eval = |t: f64| -> Result<f64, OdeError> {
        sol.interpolate_into(t, &mut buf)?;
        Ok(g(&buf, t))
    };

    let mut points: Vec<f64> = vec![t_lo];
    for t in sol.step_times() {
        if t > t_lo && t < t_hi {
            points.push(t);
        }
    }
    points.push(t_hi);

    let mut prev_t = points[0];
    let mut prev_g = eval(prev_t)?;
    if prev_g == 0.0 {
        return Ok(prev_t);
    }
    for &t in &points[1..] {
        let cur_g = eval(t)?;
        if cur_g == 0.0 {
            return Ok(t);
        }
        if prev_g.signum() != cur_g.signum() {
            return brent(&mut eval, prev_t, t, prev_g, cur_g, tol);
        }
        prev_t = t;
        prev_g = cur_g;
    }
    Err(OdeError::NoSignChange { t_lo, t_hi })
}

/// Classic Brent root refinement on a bracketing interval.
fn brent<E>(eval: &mut E, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, tol: f64) -> Result<f64, OdeError>
where
    E: FnMut(f64) -> Result<f64, OdeError>,
{
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..MAX_BRENT_ITERS {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 0.5 * tol + 2.0 * f64::EPSILON * b.abs();
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                // Secant step.
                (2.0 * xm * s, 1.0 - s)
            } else {
                // Inverse quadratic interpolation.
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = eval(b)?;
    }
    Ok(b)
}
