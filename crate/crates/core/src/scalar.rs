//! One-dimensional root finding, minimization and sequence acceleration.

use crate::error::{Error, Result};

/// Brent's method for a root of `f` in `[a, b]`, given `f(a)` and `f(b)` of opposite sign.
pub fn brent_root(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, fa: f64, fb: f64, tol: f64, max_iter: usize) -> Result<f64> {
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NotBracketed { lo: a, hi: b, f_lo: fa, f_hi: fb });
    }
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
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
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
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
        fb = f(b)?;
    }
    Ok(b)
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
/// Returns `(argmin, min)`.
pub fn golden_section(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, tol: f64, max_iter: usize) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Wynn's epsilon algorithm. Returns the even-column estimate whose last two
/// entries agree best, which guards against round-off blowing up the deep columns.
pub fn wynn_epsilon(seq: &[f64]) -> Option<f64> {
    let last = *seq.last()?;
    let mut best = (if seq.len() > 1 { (last - seq[seq.len() - 2]).abs() } else { f64::INFINITY }, last);
    let mut prev = vec![0.0; seq.len() + 1];
    let mut cur: Vec<f64> = seq.to_vec();
    let mut column = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff == 0.0 {
                if column % 2 == 0 && i + 1 == cur.len() - 1 {
                    return Some(cur[i + 1]);
                }
                return Some(best.1);
            }
            next.push(prev[i + 1] + 1.0 / diff);
        }
        prev = cur;
        cur = next;
        column += 1;
        if column % 2 == 0 && cur.len() >= 2 {
            let (a, b) = (cur[cur.len() - 2], cur[cur.len() - 1]);
            if a.is_finite() && b.is_finite() && (b - a).abs() < best.0 {
                best = ((b - a).abs(), b);
            }
        }
    }
    Some(best.1)
}

/// Richardson extrapolation of values `a(m) = L + c/m + O(1/m^2)` at
/// increasing `ms`, eliminating one power of `1/m` per stage.
pub fn richardson(ms: &[f64], values: &[f64]) -> f64 {
    let mut table: Vec<f64> = values.to_vec();
    let n = table.len();
    for stage in 1..n {
        for i in (stage..n).rev() {
            let (m_hi, m_lo) = (ms[i], ms[i - stage]);
            table[i] = (m_hi * table[i] - m_lo * table[i - 1]) / (m_hi - m_lo);
        }
    }
    table[n - 1]
}
