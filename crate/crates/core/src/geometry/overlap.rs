//! Exact intersection measures of axis-aligned boxes and balls, and of pairs of balls.

use std::f64::consts::PI;

use crate::quad;

/// `∫ sqrt(R^2 - u^2) du` antiderivative on `[-R, R]`.
fn circ_antideriv(u: f64, r: f64) -> f64 {
    let u = u.clamp(-r, r);
    0.5 * (u * (r * r - u * u).max(0.0).sqrt() + r * r * (u / r).asin())
}

/// Area of `[x0, x1] x [y0, y1]` inside the disk of radius `r` centred at the origin.
pub fn rect_disk_area(x0: f64, x1: f64, y0: f64, y1: f64, r: f64) -> f64 {
    if r <= 0.0 || x1 <= x0 || y1 <= y0 {
        return 0.0;
    }
    let a = x0.max(-r);
    let b = x1.min(r);
    if b <= a {
        return 0.0;
    }
    // breakpoints where the half chord w(u) crosses |y0| or |y1|
    let mut pts = vec![a, b];
    for y in [y0, y1] {
        if y.abs() < r {
            let u = (r * r - y * y).sqrt();
            for v in [-u, u] {
                if v > a && v < b {
                    pts.push(v);
                }
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    let mut area = 0.0;
    for w in pts.windows(2) {
        let (u0, u1) = (w[0], w[1]);
        if u1 <= u0 {
            continue;
        }
        let um = 0.5 * (u0 + u1);
        let half = (r * r - um * um).max(0.0).sqrt();
        let top_is_line = y1 < half;
        let bot_is_line = y0 > -half;
        let upper = if top_is_line { y1 } else { half };
        let lower = if bot_is_line { y0 } else { -half };
        if upper <= lower {
            continue;
        }
        let arc = circ_antideriv(u1, r) - circ_antideriv(u0, r);
        let du = u1 - u0;
        let up = if top_is_line { y1 * du } else { arc };
        let lo = if bot_is_line { y0 * du } else { -arc };
        area += up - lo;
    }
    area
}

/// Volume of the box `[lo, hi]` inside the ball of radius `r` centred at the origin (3-D).
pub fn box_ball_volume(lo: [f64; 3], hi: [f64; 3], r: f64) -> f64 {
    let z0 = lo[2].max(-r);
    let z1 = hi[2].min(r);
    if z1 <= z0 {
        return 0.0;
    }
    // slice radius sqrt(r^2 - z^2) crosses the corner/edge distances of the rectangle
    let mut dists = Vec::with_capacity(8);
    for &x in &[lo[0], hi[0]] {
        dists.push(x.abs());
        for &y in &[lo[1], hi[1]] {
            dists.push(x.hypot(y));
        }
    }
    for &y in &[lo[1], hi[1]] {
        dists.push(y.abs());
    }
    let mut pts = vec![z0, z1, 0.0];
    for d in dists {
        if d < r {
            let z = (r * r - d * d).sqrt();
            pts.push(z);
            pts.push(-z);
        }
    }
    pts.retain(|&z| z >= z0 && z <= z1);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let gl = quad::gauss_legendre(12);
    let mut vol = 0.0;
    for w in pts.windows(2) {
        if w[1] > w[0] {
            vol += gl.integrate(w[0], w[1], |z| {
                let rz = (r * r - z * z).max(0.0).sqrt();
                rect_disk_area(lo[0], hi[0], lo[1], hi[1], rz)
            });
        }
    }
    vol
}

/// Measure of the axis-aligned box `[lo, hi]` inside the ball `B_r(center)`, dimensions 1 to 3.
pub fn box_ball_measure(lo: &[f64], hi: &[f64], center: &[f64], r: f64) -> f64 {
    let d = lo.len();
    // quick accept / reject from nearest and farthest points
    let mut near2 = 0.0;
    let mut far2 = 0.0;
    for k in 0..d {
        let a = lo[k] - center[k];
        let b = hi[k] - center[k];
        let nearest = if a > 0.0 {
            a
        } else if b < 0.0 {
            b
        } else {
            0.0
        };
        near2 += nearest * nearest;
        far2 += a.abs().max(b.abs()).powi(2);
    }
    if near2 >= r * r {
        return 0.0;
    }
    if far2 <= r * r {
        return (0..d).map(|k| hi[k] - lo[k]).product();
    }
    match d {
        1 => (hi[0].min(center[0] + r) - lo[0].max(center[0] - r)).max(0.0),
        2 => rect_disk_area(lo[0] - center[0], hi[0] - center[0], lo[1] - center[1], hi[1] - center[1], r),
        3 => box_ball_volume(
            [lo[0] - center[0], lo[1] - center[1], lo[2] - center[2]],
            [hi[0] - center[0], hi[1] - center[1], hi[2] - center[2]],
            r,
        ),
        _ => panic!("box/ball overlap supports dimensions 1 to 3, got {d}"),
    }
}

/// Measure of `B_{r1}(0) ∩ B_{r2}(d e_1)` in `R^k` for `k` in 1..=3.
pub fn ball_overlap(k: usize, r1: f64, r2: f64, d: f64) -> f64 {
    let d = d.abs();
    if r1 <= 0.0 || r2 <= 0.0 || d >= r1 + r2 {
        return 0.0;
    }
    let rmin = r1.min(r2);
    if d <= (r1 - r2).abs() {
        return super::omega(k) * rmin.powi(k as i32);
    }
    match k {
        1 => r1 + r2 - d,
        2 => {
            let c1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0);
            let c2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0);
            let tri = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0).sqrt();
            r1 * r1 * c1.acos() + r2 * r2 * c2.acos() - 0.5 * tri
        }
        3 => {
            let s = r1 + r2 - d;
            PI * s * s * (d * d + 2.0 * d * (r1 + r2) - 3.0 * (r1 - r2).powi(2)) / (12.0 * d)
        }
        _ => panic!("ball overlap supports dimensions 1 to 3, got {k}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rect_disk_whole_and_quarter() {
        assert_relative_eq!(rect_disk_area(-2.0, 2.0, -2.0, 2.0, 1.0), PI, max_relative = 1e-14);
        assert_relative_eq!(rect_disk_area(0.0, 2.0, 0.0, 2.0, 1.0), PI / 4.0, max_relative = 1e-14);
        assert_relative_eq!(rect_disk_area(-0.5, 0.5, -0.5, 0.5, 1.0), 1.0, max_relative = 1e-14);
        // half-disk above the chord y = 0.5 is the circular segment
        let seg = PI / 3.0 - 3f64.sqrt() / 4.0;
        assert_relative_eq!(rect_disk_area(-1.0, 1.0, 0.5, 1.0, 1.0), seg, max_relative = 1e-13);
    }

    #[test]
    fn rect_disk_against_monte_carlo_free_grid() {
        // fine midpoint sum as an independent check
        let (x0, x1, y0, y1, r) = (0.3, 1.1, -0.2, 0.9, 1.0);
        let m = 2000;
        let mut acc = 0.0;
        for i in 0..m {
            let x = x0 + (x1 - x0) * (i as f64 + 0.5) / m as f64;
            for j in 0..m {
                let y = y0 + (y1 - y0) * (j as f64 + 0.5) / m as f64;
                if x * x + y * y < r * r {
                    acc += 1.0;
                }
            }
        }
        let approx = acc * (x1 - x0) * (y1 - y0) / (m * m) as f64;
        assert!((rect_disk_area(x0, x1, y0, y1, r) - approx).abs() < 1e-3);
    }

    #[test]
    fn box_ball_whole_and_octant() {
        let v = box_ball_volume([-2.0; 3], [2.0; 3], 1.0);
        assert_relative_eq!(v, 4.0 * PI / 3.0, max_relative = 1e-9);
        let v = box_ball_volume([0.0; 3], [2.0; 3], 1.0);
        assert_relative_eq!(v, PI / 6.0, max_relative = 1e-9);
        // spherical cap above z = 0.5: pi h^2 (3r - h) / 3 with h = 0.5
        let v = box_ball_volume([-1.0, -1.0, 0.5], [1.0, 1.0, 1.0], 1.0);
        assert_relative_eq!(v, PI * 0.25 * 2.5 / 3.0, max_relative = 1e-9);
    }

    #[test]
    fn overlap_of_balls() {
        assert_relative_eq!(ball_overlap(1, 1.0, 1.0, 0.5), 1.5);
        assert_relative_eq!(ball_overlap(2, 1.0, 1.0, 0.0), PI);
        // two unit disks at distance 1: 2 pi / 3 - sqrt(3) / 2
        assert_relative_eq!(ball_overlap(2, 1.0, 1.0, 1.0), 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0, max_relative = 1e-13);
        // two unit balls at distance 1: 5 pi / 12
        assert_relative_eq!(ball_overlap(3, 1.0, 1.0, 1.0), 5.0 * PI / 12.0, max_relative = 1e-13);
        assert_eq!(ball_overlap(3, 1.0, 1.0, 2.5), 0.0);
    }
}
