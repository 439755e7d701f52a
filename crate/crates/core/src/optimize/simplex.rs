//! Box-constrained Nelder–Mead in two dimensions, finished by a compass
//! search.
//!
//! Trial points are clamped onto the box before evaluation, which keeps
//! every vertex feasible and lets the simplex collapse onto a face or a
//! corner when the maximum sits on the boundary. A collapsed simplex can
//! also stall short of the constrained maximum, so its best vertex is
//! polished by polling `±h` along each axis (moving on any improvement,
//! halving `h` otherwise), which on a box does reach a stationary point.

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOutcome {
    pub x: [f64; 2],
    pub value: f64,
    /// `max − min` of the objective over the final simplex, or over the
    /// final compass poll.
    pub spread: f64,
    /// Final simplex diameter, or the final compass step.
    pub diameter: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Simplex iterations without improvement of the best vertex after which a
/// (typically degenerate, cycling) simplex hands over to the compass search.
pub const STAGNATION: usize = 200;

fn clamp(x: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> [f64; 2] {
    [x[0].clamp(lo[0], hi[0]), x[1].clamp(lo[1], hi[1])]
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Maximizes `f` over the box `[lo, hi]` starting from `start` with an
/// initial simplex of edge lengths `step`. The simplex stops when its
/// diameter drops below `tol`; the compass search then starts from `step`
/// and stops when its step drops below `tol`. `max_iter` bounds the simplex
/// iterations and, separately, the compass polls; the simplex also hands
/// over after [`STAGNATION`] iterations without a better best vertex.
pub fn maximize<F>(
    mut f: F,
    start: [f64; 2],
    step: [f64; 2],
    lo: [f64; 2],
    hi: [f64; 2],
    tol: f64,
    max_iter: usize,
) -> Result<SimplexOutcome>
where
    F: FnMut([f64; 2]) -> Result<f64>,
{
    let out = nelder_mead(&mut f, start, step, lo, hi, tol, max_iter)?;
    compass(&mut f, out, step, lo, hi, tol, out.iterations + max_iter)
}

fn compass<F>(
    f: &mut F,
    from: SimplexOutcome,
    step: [f64; 2],
    lo: [f64; 2],
    hi: [f64; 2],
    tol: f64,
    max_iter: usize,
) -> Result<SimplexOutcome>
where
    F: FnMut([f64; 2]) -> Result<f64>,
{
    let (mut x, mut fx, mut iterations) = (from.x, from.value, from.iterations);
    let mut scale = 1.0;
    let mut spread = from.spread;
    while scale * step[0].max(step[1]) >= tol {
        if iterations >= max_iter {
            return Ok(SimplexOutcome {
                x,
                value: fx,
                spread,
                diameter: scale * step[0].max(step[1]),
                iterations,
                converged: false,
            });
        }
        iterations += 1;
        let mut lowest = fx;
        let mut moved = false;
        'poll: for k in 0..2 {
            for sign in [1.0, -1.0] {
                let mut y = x;
                y[k] += sign * scale * step[k];
                let y = clamp(y, lo, hi);
                if y == x {
                    continue;
                }
                let fy = f(y)?;
                lowest = lowest.min(fy);
                if fy > fx {
                    (x, fx, moved) = (y, fy, true);
                    break 'poll;
                }
            }
        }
        if !moved {
            spread = fx - lowest;
            scale *= 0.5;
        }
    }
    Ok(SimplexOutcome { x, value: fx, spread, diameter: scale * step[0].max(step[1]), iterations, converged: true })
}

fn nelder_mead<F>(
    f: &mut F,
    start: [f64; 2],
    step: [f64; 2],
    lo: [f64; 2],
    hi: [f64; 2],
    tol: f64,
    max_iter: usize,
) -> Result<SimplexOutcome>
where
    F: FnMut([f64; 2]) -> Result<f64>,
{
    // Work on g = −f so the textbook minimization steps apply unchanged.
    let mut g = |x: [f64; 2]| f(x).map(|v| -v);
    let x0 = clamp(start, lo, hi);
    let mut pts = [x0, x0, x0];
    for (k, p) in pts.iter_mut().skip(1).enumerate() {
        // Step inward when the start lies on the upper face.
        let dir = if x0[k] + step[k] <= hi[k] { 1.0 } else { -1.0 };
        p[k] = x0[k] + dir * step[k];
        *p = clamp(*p, lo, hi);
    }
    let mut vals = [g(pts[0])?, g(pts[1])?, g(pts[2])?];

    let mut iterations = 0;
    let mut converged = false;
    let (mut best_seen, mut since_best) = (f64::INFINITY, 0);
    while iterations < max_iter && since_best < STAGNATION {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.map(|i| pts[i]);
        vals = order.map(|i| vals[i]);

        let diameter = dist(pts[0], pts[1]).max(dist(pts[0], pts[2]));
        if diameter < tol {
            converged = true;
            break;
        }
        iterations += 1;
        if vals[0] < best_seen {
            (best_seen, since_best) = (vals[0], 0);
        } else {
            since_best += 1;
        }

        let centroid = lerp(pts[0], pts[1], 0.5);
        let reflected = clamp(lerp(centroid, pts[2], -1.0), lo, hi);
        let fr = g(reflected)?;
        if fr < vals[0] {
            let expanded = clamp(lerp(centroid, pts[2], -2.0), lo, hi);
            let fe = g(expanded)?;
            if fe < fr {
                pts[2] = expanded;
                vals[2] = fe;
            } else {
                pts[2] = reflected;
                vals[2] = fr;
            }
            continue;
        }
        if fr < vals[1] {
            pts[2] = reflected;
            vals[2] = fr;
            continue;
        }
        // Contraction: outside if the reflection beat the worst vertex.
        let (contracted, fc) = if fr < vals[2] {
            let c = clamp(lerp(centroid, reflected, 0.5), lo, hi);
            (c, g(c)?)
        } else {
            let c = lerp(centroid, pts[2], 0.5);
            (c, g(c)?)
        };
        if fc < vals[2].min(fr) {
            pts[2] = contracted;
            vals[2] = fc;
            continue;
        }
        // Shrink toward the best vertex.
        for k in 1..3 {
            pts[k] = lerp(pts[0], pts[k], 0.5);
            vals[k] = g(pts[k])?;
        }
    }

    let best = (0..3).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    let worst = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let diameter = (0..3).map(|k| dist(pts[best], pts[k])).fold(0.0, f64::max);
    let out = SimplexOutcome {
        x: pts[best],
        value: -vals[best],
        spread: worst - vals[best],
        diameter,
        iterations,
        converged,
    };
    Ok(out)
}
