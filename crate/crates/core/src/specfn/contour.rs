//! Placement of the vertical contours.
//!
//! The admissible abscissas form the polytope on which every numerator
//! gamma argument has positive real part. Inside it we pick the point that
//! minimises the real-axis log-magnitude of the numerator product times the
//! argument power; the integrand is then smallest at the real axis crossing,
//! which limits cancellation along the contour.

use super::lgamma::{digamma, ln_gamma_real, trigamma};
use super::mellin::Factor;
use super::SpecFnError;

/// Minimum real part of any numerator argument on an accepted contour.
pub const MIN_SLACK: f64 = 1e-6;

/// Preferred clearance from the nearest pole, measured along the contour
/// variables, when the polytope allows it.
const PREFERRED_SLACK: f64 = 0.05;

const BOX: f64 = 1e4;

fn arg(f: &Factor, c: &[f64; 2]) -> f64 {
    f.offset + f.ds * c[0] + f.dt * c[1]
}

fn constraints(factors: &[Factor]) -> impl Iterator<Item = &Factor> {
    factors
        .iter()
        .filter(|f| f.numerator && (f.ds != 0.0 || f.dt != 0.0))
}

/// Smallest numerator argument at `c`.
pub fn min_slack(factors: &[Factor], c: &[f64; 2]) -> f64 {
    constraints(factors)
        .map(|f| arg(f, c))
        .fold(f64::INFINITY, f64::min)
}

/// Smallest distance, in the `(s, t)` plane, from `c` to a pole hyperplane.
fn scaled_slack(factors: &[Factor], c: &[f64; 2]) -> f64 {
    constraints(factors)
        .map(|f| arg(f, c) / f.ds.hypot(f.dt))
        .fold(f64::INFINITY, f64::min)
}

pub fn check(factors: &[Factor], c: &[f64; 2]) -> Result<(), SpecFnError> {
    let s = min_slack(factors, c);
    if s >= MIN_SLACK {
        Ok(())
    } else {
        Err(SpecFnError::ContourInfeasible(format!(
            "abscissa {c:?} leaves a numerator argument at {s:e}"
        )))
    }
}

fn check_constants(factors: &[Factor]) -> Result<(), SpecFnError> {
    for f in factors.iter().filter(|f| f.numerator && f.ds == 0.0 && f.dt == 0.0) {
        if f.offset <= 0.0 && (f.offset - f.offset.round()).abs() < 1e-14 {
            return Err(SpecFnError::GammaPole {
                re: f.offset,
                im: 0.0,
            });
        }
    }
    Ok(())
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in 0..n {
            if row != col {
                let k = a[row][col] / a[col][col];
                for cc in col..n {
                    a[row][cc] -= k * a[col][cc];
                }
                b[row] -= k * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Point farthest from every pole hyperplane (the Chebyshev centre), found
/// by enumerating the vertices of the lifted LP.
fn centre(factors: &[Factor], dim: usize) -> ([f64; 2], f64) {
    let mut rows: Vec<(f64, [f64; 2])> = constraints(factors)
        .map(|f| {
            let n = f.ds.hypot(f.dt);
            (f.offset / n, [f.ds / n, f.dt / n])
        })
        .collect();
    for k in 0..dim {
        let mut d = [0.0; 2];
        d[k] = 1.0;
        rows.push((BOX, [-d[0], -d[1]]));
        rows.push((BOX, d));
    }
    let feasible = |c: &[f64; 2], z: f64| {
        rows.iter()
            .all(|(o, d)| o + d[0] * c[0] + d[1] * c[1] >= z - 1e-9 * (1.0 + z.abs()))
    };
    let mut best = ([0.0; 2], f64::NEG_INFINITY);
    let k = dim + 1;
    let n = rows.len();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        // o_j + d_j · c = z  for the chosen rows
        let a: Vec<Vec<f64>> = idx
            .iter()
            .map(|&j| {
                let (_, d) = rows[j];
                let mut r: Vec<f64> = d[..dim].to_vec();
                r.push(-1.0);
                r
            })
            .collect();
        let b: Vec<f64> = idx.iter().map(|&j| -rows[j].0).collect();
        if let Some(x) = solve(a, b) {
            let mut c = [0.0; 2];
            c[..dim].copy_from_slice(&x[..dim]);
            let z = x[dim];
            if z > best.1 && feasible(&c, z) {
                best = (c, z);
            }
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 && idx[0] == n - k {
                return best;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn objective(factors: &[Factor], ln_args: [f64; 2], c: &[f64; 2]) -> f64 {
    let mut v = -(c[0] * ln_args[0] + c[1] * ln_args[1]);
    for f in constraints(factors) {
        v += ln_gamma_real(arg(f, c)).map(|(l, _)| l).unwrap_or(f64::INFINITY);
    }
    v
}

fn gradient(factors: &[Factor], ln_args: [f64; 2], c: &[f64; 2]) -> ([f64; 2], [[f64; 3]; 1]) {
    let mut g = [-ln_args[0], -ln_args[1]];
    let mut h = [0.0; 3];
    for f in constraints(factors) {
        let x = arg(f, c);
        let p = digamma(x);
        let q = trigamma(x);
        g[0] += f.ds * p;
        g[1] += f.dt * p;
        h[0] += f.ds * f.ds * q;
        h[1] += f.ds * f.dt * q;
        h[2] += f.dt * f.dt * q;
    }
    (g, [h])
}

pub fn select(factors: &[Factor], ln_args: [f64; 2], dim: usize) -> Result<[f64; 2], SpecFnError> {
    check_constants(factors)?;
    if constraints(factors).next().is_none() {
        return Ok([0.0; 2]);
    }
    let (start, zmax) = centre(factors, dim);
    if !(zmax > 2.0 * MIN_SLACK && min_slack(factors, &start) > 2.0 * MIN_SLACK) {
        return Err(SpecFnError::ContourInfeasible(format!(
            "largest attainable clearance {zmax:e} from the pole families"
        )));
    }
    let delta = PREFERRED_SLACK.min(0.5 * zmax);
    let c = if dim == 1 {
        minimise_1d(factors, ln_args[0], start[0], delta)
    } else {
        minimise_2d(factors, ln_args, start, delta)
    };
    check(factors, &c)?;
    Ok(c)
}

/// Admissible interval `{c : arg_j(c) >= delta |ds_j|}` for a univariate instance.
fn interval_1d(factors: &[Factor], delta: f64) -> (f64, f64) {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for f in constraints(factors) {
        let bound = (delta * f.ds.abs() - f.offset) / f.ds;
        if f.ds > 0.0 {
            lo = lo.max(bound);
        } else {
            hi = hi.min(bound);
        }
    }
    (lo, hi)
}

fn minimise_1d(factors: &[Factor], ln_x: f64, start: f64, delta: f64) -> [f64; 2] {
    let (mut lo, mut hi) = interval_1d(factors, delta);
    let dphi = |c: f64| gradient(factors, [ln_x, 0.0], &[c, 0.0]).0[0];
    // derivative is increasing; bracket its root within [lo, hi]
    if !lo.is_finite() {
        let mut step = 1.0;
        lo = start.min(hi) - step;
        while dphi(lo) > 0.0 && step < 1e8 {
            step *= 2.0;
            lo = start.min(hi) - step;
        }
    }
    if !hi.is_finite() {
        let mut step = 1.0;
        hi = start.max(lo) + step;
        while dphi(hi) < 0.0 && step < 1e8 {
            step *= 2.0;
            hi = start.max(lo) + step;
        }
    }
    if dphi(lo) >= 0.0 {
        return [lo, 0.0];
    }
    if dphi(hi) <= 0.0 {
        return [hi, 0.0];
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dphi(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-12 * (1.0 + mid.abs()) {
            break;
        }
    }
    [0.5 * (lo + hi), 0.0]
}

fn minimise_2d(factors: &[Factor], ln_args: [f64; 2], start: [f64; 2], delta: f64) -> [f64; 2] {
    let admissible = |c: &[f64; 2]| scaled_slack(factors, c) >= delta;
    let mut c = start;
    if !admissible(&c) {
        return c;
    }
    let mut val = objective(factors, ln_args, &c);
    for _ in 0..100 {
        let (g, [h]) = gradient(factors, ln_args, &c);
        let reg = 1e-10 * (h[0].abs() + h[2].abs() + 1e-300);
        let (a, b, d) = (h[0] + reg, h[1], h[2] + reg);
        let det = a * d - b * b;
        let mut step = if det > 0.0 {
            [-(d * g[0] - b * g[1]) / det, -(a * g[1] - b * g[0]) / det]
        } else {
            [-g[0], -g[1]]
        };
        let mut improved = false;
        for _ in 0..60 {
            let trial = [c[0] + step[0], c[1] + step[1]];
            if admissible(&trial) {
                let tv = objective(factors, ln_args, &trial);
                if tv < val {
                    c = trial;
                    val = tv;
                    improved = true;
                    break;
                }
            }
            step = [0.5 * step[0], 0.5 * step[1]];
        }
        let gnorm = g[0].hypot(g[1]);
        if !improved || gnorm < 1e-10 {
            break;
        }
    }
    c
}
