//! Reference implementations that share no code with `infogeo`.
//!
//! Everything here is deliberately slow and simple: interior-point Newton for
//! the max-det problem, brute-force sampling for distances and containment,
//! and Dijkstra on a visibility graph for polygonal shortest paths.

use nalgebra::{DMatrix, DVector, Vector2};

/// Largest-determinant `Q` with `Q ⪯ a` and `Q ⪯ b`, found by a log-barrier
/// Newton method on the symmetric entries of `Q`.
pub fn maxdet_oracle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.nrows();
    let idx: Vec<(usize, usize)> = (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect();
    let m = idx.len();
    let basis = |k: usize| {
        let (i, j) = idx[k];
        let mut e = DMatrix::zeros(d, d);
        e[(i, j)] = 1.0;
        e[(j, i)] = 1.0;
        e
    };
    let bases: Vec<DMatrix<f64>> = (0..m).map(basis).collect();
    let lmin = a
        .clone()
        .symmetric_eigenvalues()
        .min()
        .min(b.clone().symmetric_eigenvalues().min());
    let mut q = DMatrix::identity(d, d) * (0.5 * lmin);

    let logdet = |x: &DMatrix<f64>| -> Option<f64> { x.clone().cholesky().map(|c| 2.0 * c.l().diagonal().map(f64::ln).sum()) };
    let objective = |q: &DMatrix<f64>, mu: f64| -> Option<f64> {
        let lq = logdet(q)?;
        let la = logdet(&(a - q))?;
        let lb = logdet(&(b - q))?;
        Some(-lq - mu * (la + lb))
    };

    let mut mu = 1.0;
    'outer: while mu > 1e-8 {
        for _ in 0..200 {
            let (Some(qi), Some(ai), Some(bi)) = (
                q.clone().try_inverse(),
                (a - &q).try_inverse(),
                (b - &q).try_inverse(),
            ) else {
                break 'outer;
            };
            let grad_m = -&qi + (&ai + &bi) * mu;
            let mut g = DVector::zeros(m);
            let mut h = DMatrix::zeros(m, m);
            for k in 0..m {
                g[k] = (&grad_m * &bases[k]).trace();
                let hk = &qi * &bases[k] * &qi + (&ai * &bases[k] * &ai + &bi * &bases[k] * &bi) * mu;
                for l in 0..m {
                    h[(l, k)] = (&hk * &bases[l]).trace();
                }
            }
            let step = match h.clone().cholesky() {
                Some(c) => c.solve(&(-&g)),
                None => -&g,
            };
            let decrement = -g.dot(&step);
            if decrement < 1e-12 {
                break;
            }
            let mut dq = DMatrix::zeros(d, d);
            for k in 0..m {
                let (i, j) = idx[k];
                dq[(i, j)] = step[k];
                dq[(j, i)] = step[k];
            }
            let Some(f0) = objective(&q, mu) else {
                break 'outer;
            };
            let mut t = 1.0;
            loop {
                let cand = &q + &dq * t;
                if let Some(f) = objective(&cand, mu) {
                    if f <= f0 - 0.25 * t * decrement {
                        q = cand;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-12 {
                    break;
                }
            }
            // stalled on rounding noise
            if t < 1e-6 {
                break;
            }
        }
        mu *= 0.1;
    }
    q
}

/// `½ ln det(prior) − ½ ln det(oracle projection)`.
pub fn info_oracle(prior: &DMatrix<f64>, post: &DMatrix<f64>) -> f64 {
    let q = maxdet_oracle(prior, post);
    0.5 * (prior.determinant().ln() - q.determinant().ln())
}

/// Whether `p` is inside the convex polygon with counter-clockwise or
/// clockwise vertices `poly`, boundary included.
pub fn point_in_polygon(p: Vector2<f64>, poly: &[Vector2<f64>]) -> bool {
    let n = poly.len();
    let mut sign = 0.0f64;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let c = (b - a).perp(&(p - a));
        if c.abs() < 1e-14 {
            continue;
        }
        if sign == 0.0 {
            sign = c.signum();
        } else if c.signum() != sign {
            return false;
        }
    }
    true
}

/// Exact Mahalanobis distance from `c` to a convex polygon, by minimising
/// over each edge independently.
pub fn polygon_mahalanobis(c: Vector2<f64>, cov: &DMatrix<f64>, poly: &[Vector2<f64>]) -> f64 {
    if point_in_polygon(c, poly) {
        return 0.0;
    }
    let inv = cov.clone().try_inverse().unwrap();
    let m = nalgebra::Matrix2::new(inv[(0, 0)], inv[(0, 1)], inv[(1, 0)], inv[(1, 1)]);
    let mut best = f64::INFINITY;
    for i in 0..poly.len() {
        let a = poly[i];
        let e = poly[(i + 1) % poly.len()] - a;
        let r = c - a;
        let den = e.dot(&(m * e));
        let t = if den > 0.0 { (e.dot(&(m * r)) / den).clamp(0.0, 1.0) } else { 0.0 };
        let v = r - e * t;
        best = best.min(v.dot(&(m * v)));
    }
    best.max(0.0).sqrt()
}

/// Mahalanobis distance from `c` to the polygon boundary, sampled at
/// `samples` evenly spaced points along the perimeter plus the vertices.
/// Zero inside.
pub fn sampled_polygon_mahalanobis(c: Vector2<f64>, cov: &DMatrix<f64>, poly: &[Vector2<f64>], samples: usize) -> f64 {
    if point_in_polygon(c, poly) {
        return 0.0;
    }
    let inv = cov.clone().try_inverse().unwrap();
    let m = nalgebra::Matrix2::new(inv[(0, 0)], inv[(0, 1)], inv[(1, 0)], inv[(1, 1)]);
    let n = poly.len();
    let lens: Vec<f64> = (0..n).map(|i| (poly[(i + 1) % n] - poly[i]).norm()).collect();
    let perim: f64 = lens.iter().sum();
    let mut best = poly.iter().map(|p| (c - p).dot(&(m * (c - p)))).fold(f64::INFINITY, f64::min);
    for k in 0..samples {
        let mut s = perim * k as f64 / samples as f64;
        let mut i = 0;
        while i + 1 < n && s > lens[i] {
            s -= lens[i];
            i += 1;
        }
        let a = poly[i];
        let e = poly[(i + 1) % n] - a;
        let p = a + e * (s / lens[i]).min(1.0);
        let v = c - p;
        best = best.min(v.dot(&(m * v)));
    }
    best.sqrt()
}

/// Whether the `chi2` ellipsoid of `inner` lies within that of `outer`,
/// checked on `samples` boundary points (2-D only).
pub fn sampled_containment(
    inner: (&DVector<f64>, &DMatrix<f64>),
    outer: (&DVector<f64>, &DMatrix<f64>),
    chi2: f64,
    samples: usize,
    slack: f64,
) -> bool {
    let l = inner.1.clone().cholesky().unwrap().l();
    let oinv = outer.1.clone().try_inverse().unwrap();
    let r = chi2.sqrt();
    (0..samples).all(|k| {
        let th = std::f64::consts::TAU * k as f64 / samples as f64;
        let u = DVector::from_vec(vec![th.cos(), th.sin()]);
        let p = inner.0 + &l * u * r;
        let v = p - outer.0;
        v.dot(&(&oinv * &v)) <= chi2 * (1.0 + slack)
    })
}

/// Clearance of a straight move checked on a dense grid of `steps + 1`
/// points, with covariance `p0 + λ·len·W` at fraction `λ`.
pub fn grid_segment_clear(
    from: Vector2<f64>,
    to: Vector2<f64>,
    p0: &DMatrix<f64>,
    w: &DMatrix<f64>,
    polys: &[Vec<Vector2<f64>>],
    chi2: f64,
    steps: usize,
) -> bool {
    let len = (to - from).norm();
    let thresh = chi2.sqrt();
    (0..=steps).all(|k| {
        let lam = k as f64 / steps as f64;
        let c = from + (to - from) * lam;
        let cov = p0 + w * (lam * len);
        polys.iter().all(|poly| polygon_mahalanobis(c, &cov, poly) > thresh)
    })
}

/// Whether the open segment `a → b` passes through the interior of a convex
/// polygon. Grazing an edge or vertex is allowed.
pub fn segment_hits_polygon(a: Vector2<f64>, b: Vector2<f64>, poly: &[Vector2<f64>]) -> bool {
    let n = poly.len();
    let ccw = {
        let mut area = 0.0;
        for i in 0..n {
            area += poly[i].perp(&poly[(i + 1) % n]);
        }
        area > 0.0
    };
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let d = b - a;
    for i in 0..n {
        let p = poly[i];
        let e = poly[(i + 1) % n] - p;
        // inward normal
        let nrm = if ccw { Vector2::new(-e.y, e.x) } else { Vector2::new(e.y, -e.x) };
        let num = nrm.dot(&(a - p));
        let den = nrm.dot(&d);
        if den.abs() < 1e-15 {
            if num <= 1e-12 {
                return false;
            }
            continue;
        }
        let t = -num / den;
        if den > 0.0 {
            t0 = t0.max(t);
        } else {
            t1 = t1.min(t);
        }
        if t0 >= t1 {
            return false;
        }
    }
    let mid = a + d * (0.5 * (t0 + t1));
    let depth = (0..n)
        .map(|i| {
            let p = poly[i];
            let e = (poly[(i + 1) % n] - p).normalize();
            let nrm = if ccw { Vector2::new(-e.y, e.x) } else { Vector2::new(e.y, -e.x) };
            nrm.dot(&(mid - p))
        })
        .fold(f64::INFINITY, f64::min);
    (t1 - t0) * d.norm() > 1e-9 && depth > 1e-9
}

/// Length of the shortest obstacle-avoiding path from `start` to the
/// axis-aligned box `[lo, hi]`, on the visibility graph of polygon vertices.
pub fn visibility_shortest_path(
    start: Vector2<f64>,
    lo: Vector2<f64>,
    hi: Vector2<f64>,
    polys: &[Vec<Vector2<f64>>],
) -> f64 {
    let mut pts = vec![start];
    for poly in polys {
        pts.extend(poly.iter().copied());
    }
    let visible = |a: Vector2<f64>, b: Vector2<f64>| polys.iter().all(|p| !segment_hits_polygon(a, b, p));
    let n = pts.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[0] = 0.0;
    let mut best = f64::INFINITY;
    for _ in 0..n {
        let Some(u) = (0..n).filter(|&i| !done[i] && dist[i].is_finite()).min_by(|&i, &j| dist[i].total_cmp(&dist[j])) else {
            break;
        };
        done[u] = true;
        let proj = Vector2::new(pts[u].x.clamp(lo.x, hi.x), pts[u].y.clamp(lo.y, hi.y));
        if visible(pts[u], proj) {
            best = best.min(dist[u] + (proj - pts[u]).norm());
        }
        for v in 0..n {
            if !done[v] && visible(pts[u], pts[v]) {
                let nd = dist[u] + (pts[v] - pts[u]).norm();
                if nd < dist[v] {
                    dist[v] = nd;
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn maxdet_diagonal() {
        let a = dmatrix![2.0, 0.0; 0.0, 1.0];
        let b = dmatrix![1.0, 0.0; 0.0, 3.0];
        let q = maxdet_oracle(&a, &b);
        assert!((q - dmatrix![1.0, 0.0; 0.0, 1.0]).abs().max() < 1e-8);
    }

    #[test]
    fn polygon_distances_agree() {
        let sq = vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(0.0, 1.0),
        ];
        let cov = dmatrix![0.25, 0.0; 0.0, 1.0];
        let c = Vector2::new(2.0, 0.5);
        assert!((polygon_mahalanobis(c, &cov, &sq) - 2.0).abs() < 1e-12);
        assert!((sampled_polygon_mahalanobis(c, &cov, &sq, 4000) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn visibility_around_block() {
        let block = vec![
            Vector2::new(0.4, -0.8),
            Vector2::new(0.6, -0.8),
            Vector2::new(0.6, 0.6),
            Vector2::new(0.4, 0.6),
        ];
        let d = visibility_shortest_path(
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(1.0, 0.0),
            &[block],
        );
        let expected = 2.0 * (0.4f64.powi(2) + 0.36).sqrt() + 0.2;
        assert!((d - expected).abs() < 1e-12);
    }
}
