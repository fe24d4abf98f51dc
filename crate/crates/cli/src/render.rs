//! SVG rendering of environments, trees, paths and χ² ellipses. Drawing is
//! done in workspace coordinates, so one SVG user unit is one workspace unit.

use std::fmt::Write;

use crate::schema::{BeliefSpec, EnvSpec};

/// What to draw on top of the environment.
#[derive(Clone, Debug, Default)]
pub struct Scene {
    /// Tree edges as (from, to) points.
    pub edges: Vec<([f64; 2], [f64; 2])>,
    /// Polyline through the path means.
    pub path: Vec<[f64; 2]>,
    /// Beliefs whose χ² ellipses are drawn.
    pub ellipses: Vec<BeliefSpec>,
}

/// Semi-axes and rotation (degrees) of the χ² ellipse of a 2×2 covariance.
pub fn ellipse_axes(cov: &[Vec<f64>], chi2: f64) -> (f64, f64, f64) {
    let (a, b, d) = (cov[0][0], 0.5 * (cov[0][1] + cov[1][0]), cov[1][1]);
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let (l1, l2) = (mid + rad, (mid - rad).max(0.0));
    let angle = 0.5 * (2.0 * b).atan2(a - d);
    ((chi2 * l1).sqrt(), (chi2 * l2).sqrt(), angle.to_degrees())
}

fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn point(p: &[f64]) -> [f64; 2] {
    [p[0], p[1]]
}

pub fn render_svg(env: &EnvSpec, chi2: f64, scene: &Scene) -> Result<String, String> {
    if env.dim != 2 {
        return Err(format!("rendering is 2-D only; input has dimension {}", env.dim));
    }
    let (lo, hi) = (point(&env.bounds.min), point(&env.bounds.max));
    let (w, h) = (hi[0] - lo[0], hi[1] - lo[1]);
    let m = 0.02 * w.max(h);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="800" height="{}">"#,
        num(lo[0] - m),
        num(lo[1] - m),
        num(w + 2.0 * m),
        num(h + 2.0 * m),
        (800.0 * (h + 2.0 * m) / (w + 2.0 * m)).round() as i64,
    );
    // flip so that y grows upwards
    let _ = writeln!(s, r#"<g transform="translate(0 {}) scale(1 -1)">"#, num(lo[1] + hi[1]));
    let _ = writeln!(
        s,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#ffffff" stroke="#000000" stroke-width="1" vector-effect="non-scaling-stroke"/>"##,
        num(lo[0]),
        num(lo[1]),
        num(w),
        num(h)
    );
    if let Some(map) = &env.sensor_map {
        for r in &map.regions {
            let (a, b) = (point(&r.region.min), point(&r.region.max));
            let fill = if r.sensor.is_some() { "#fff7d6" } else { "#d0d0d0" };
            let _ = writeln!(
                s,
                r##"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}" stroke="#c9a227" stroke-dasharray="4 2" stroke-width="1" vector-effect="non-scaling-stroke"/>"##,
                num(a[0]),
                num(a[1]),
                num(b[0] - a[0]),
                num(b[1] - a[1])
            );
        }
    }
    let (ga, gb) = (point(&env.goal.region.min), point(&env.goal.region.max));
    let _ = writeln!(
        s,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#7fc97f" fill-opacity="0.5" stroke="#2e7d32" stroke-width="1" vector-effect="non-scaling-stroke"/>"##,
        num(ga[0]),
        num(ga[1]),
        num(gb[0] - ga[0]),
        num(gb[1] - ga[1])
    );
    for o in &env.obstacles {
        let pts: Vec<String> = o.vertices.iter().map(|v| format!("{},{}", num(v[0]), num(v[1]))).collect();
        let _ = writeln!(s, r##"<polygon points="{}" fill="#555555"/>"##, pts.join(" "));
    }
    if !scene.edges.is_empty() {
        let mut d = String::new();
        for (a, b) in &scene.edges {
            let _ = write!(d, "M{} {}L{} {}", num(a[0]), num(a[1]), num(b[0]), num(b[1]));
        }
        let _ = writeln!(
            s,
            r##"<path d="{d}" fill="none" stroke="#8fa8c8" stroke-width="0.5" vector-effect="non-scaling-stroke"/>"##
        );
    }
    for b in &scene.ellipses {
        let (rx, ry, deg) = ellipse_axes(&b.cov, chi2);
        let (cx, cy) = (num(b.mean[0]), num(b.mean[1]));
        let _ = writeln!(
            s,
            r##"<ellipse cx="{cx}" cy="{cy}" rx="{}" ry="{}" transform="rotate({} {cx} {cy})" fill="#1f77b4" fill-opacity="0.15" stroke="#1f77b4" stroke-width="1" vector-effect="non-scaling-stroke"/>"##,
            num(rx),
            num(ry),
            num(deg)
        );
    }
    if scene.path.len() > 1 {
        let pts: Vec<String> = scene.path.iter().map(|p| format!("{},{}", num(p[0]), num(p[1]))).collect();
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="2" vector-effect="non-scaling-stroke"/>"##,
            pts.join(" ")
        );
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}
