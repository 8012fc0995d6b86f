//! Base-orbifold chart atlases.
//!
//! Weighted sphere: two disk charts centered at the singular orbits plus an
//! annulus chart, in the invariant coordinates `h = |z₂|²`,
//! `ψ = p·arg z₂ − q·arg z₁`.  Chart 0 sits over the order-`p` pole
//! (`z₂ = 0`): its uniformizing coordinate is the slice value
//! `ζ = z₂ e^{-i q·arg(z₁)/p}`, defined up to the `Z_p` deck rotations, with
//! `h = |ζ|²`, `arg ζ = ψ/p`.  In polar coordinates `(u, χ)`, `u = |ζ|`:
//!
//! ```text
//! g̃ = du²/(1-u²) + u²(1-u²)p²/D dχ²,  D = (1-u²)p² + u²q²,
//! σ̄_Z = p²q/(π D²) dX∧dY .
//! ```
//!
//! Chart 1 is the mirror at the order-`q` pole (swap `p ↔ q`,
//! `h ↔ 1-h`, `σ̄ = pq²/(πD²) dX'∧dY'`), chart 2 the annulus in `(h, ψ)`
//! with `σ̄ = pq/(2πD²) dh∧dψ`.  For `p = q = 1` these are charts of the
//! round `S²(1/2)` with constant `σ̄ = (1/π)·dA` (total flux 1); in general
//! the flux is `1/(pq)`.
//!
//! Exact product: four translated square charts of the flat unit torus with
//! identity metric and `σ̄ = B cos(2πx) dX∧dY`.

use super::{BundleModel, ExactProduct, WeightedSphere};

pub type ChartId = usize;

/// Disk-chart radius bound squared; the two disks already cover the base.
const DISK_H_MAX: f64 = 0.64;
const ANNULUS_H: (f64, f64) = (0.2, 0.8);
/// Half-width of the square torus charts.
const TORUS_HALF: f64 = 0.3;

fn wrap_half(x: f64) -> f64 {
    x - x.round()
}

fn wrap_pi(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut y = x.rem_euclid(two_pi);
    if y > std::f64::consts::PI {
        y -= two_pi;
    }
    y
}

pub fn weighted_chart_map(m: &WeightedSphere, chart: ChartId, q: &[f64]) -> Option<[f64; 2]> {
    let r1sq = q[0] * q[0] + q[1] * q[1];
    let r2sq = q[2] * q[2] + q[3] * q[3];
    let norm = r1sq + r2sq;
    let h = r2sq / norm;
    match chart {
        0 => {
            if h > DISK_H_MAX || r1sq < 1e-30 {
                return None;
            }
            let alpha = q[1].atan2(q[0]);
            let rot = -(m.q as f64) * alpha / m.p as f64;
            let (c, s) = (rot.cos(), rot.sin());
            let scale = 1.0 / norm.sqrt();
            Some([
                scale * (c * q[2] - s * q[3]),
                scale * (s * q[2] + c * q[3]),
            ])
        }
        1 => {
            if 1.0 - h > DISK_H_MAX || r2sq < 1e-30 {
                return None;
            }
            let beta = q[3].atan2(q[2]);
            let rot = -(m.p as f64) * beta / m.q as f64;
            let (c, s) = (rot.cos(), rot.sin());
            let scale = 1.0 / norm.sqrt();
            Some([
                scale * (c * q[0] - s * q[1]),
                scale * (s * q[0] + c * q[1]),
            ])
        }
        2 => {
            if !(ANNULUS_H.0..=ANNULUS_H.1).contains(&h) {
                return None;
            }
            let alpha = q[1].atan2(q[0]);
            let beta = q[3].atan2(q[2]);
            Some([h, wrap_pi(m.p as f64 * beta - m.q as f64 * alpha)])
        }
        _ => None,
    }
}

pub fn weighted_chart_select(m: &WeightedSphere, q: &[f64]) -> Option<(ChartId, [f64; 2])> {
    let r2sq = q[2] * q[2] + q[3] * q[3];
    let h = r2sq / (q[0] * q[0] + q[1] * q[1] + r2sq);
    let chart = if h <= 0.5 { 0 } else { 1 };
    weighted_chart_map(m, chart, q).map(|w| (chart, w))
}

pub fn weighted_chart_metric(m: &WeightedSphere, chart: ChartId, w: [f64; 2]) -> [[f64; 2]; 2] {
    let (p2, q2) = ((m.p * m.p) as f64, (m.q * m.q) as f64);
    match chart {
        0 | 1 => {
            let usq = w[0] * w[0] + w[1] * w[1];
            let (a, btilde) = if chart == 0 {
                let d = (1.0 - usq) * p2 + usq * q2;
                (1.0 / (1.0 - usq), (1.0 - usq) * p2 / d)
            } else {
                let d = usq * p2 + (1.0 - usq) * q2;
                (1.0 / (1.0 - usq), (1.0 - usq) * q2 / d)
            };
            if usq < 1e-30 {
                return [[1.0, 0.0], [0.0, 1.0]];
            }
            let mut g = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    let rad = w[i] * w[j] / usq;
                    g[i][j] = btilde * if i == j { 1.0 } else { 0.0 } + (a - btilde) * rad;
                }
            }
            g
        }
        2 => {
            let h = w[0];
            let d = p2 * (1.0 - h) + q2 * h;
            [[1.0 / (4.0 * h * (1.0 - h)), 0.0], [0.0, h * (1.0 - h) / d]]
        }
        _ => panic!("unknown chart"),
    }
}

pub fn weighted_chart_sigma(m: &WeightedSphere, chart: ChartId, w: [f64; 2]) -> f64 {
    let (pf, qf) = (m.p as f64, m.q as f64);
    let (p2, q2) = (pf * pf, qf * qf);
    match chart {
        0 => {
            let usq = w[0] * w[0] + w[1] * w[1];
            let d = (1.0 - usq) * p2 + usq * q2;
            p2 * qf / (std::f64::consts::PI * d * d)
        }
        1 => {
            let usq = w[0] * w[0] + w[1] * w[1];
            let d = usq * p2 + (1.0 - usq) * q2;
            pf * q2 / (std::f64::consts::PI * d * d)
        }
        2 => {
            let h = w[0];
            let d = p2 * (1.0 - h) + q2 * h;
            pf * qf / (2.0 * std::f64::consts::PI * d * d)
        }
        _ => panic!("unknown chart"),
    }
}

pub fn weighted_chart_deck(m: &WeightedSphere, chart: ChartId, w: [f64; 2]) -> Vec<[f64; 2]> {
    match chart {
        0 | 1 => {
            let order = if chart == 0 { m.p } else { m.q };
            (0..order)
                .map(|k| {
                    let ang = 2.0 * std::f64::consts::PI * k as f64 / order as f64;
                    let (c, s) = (ang.cos(), ang.sin());
                    [c * w[0] - s * w[1], s * w[0] + c * w[1]]
                })
                .collect()
        }
        2 => {
            let two_pi = 2.0 * std::f64::consts::PI;
            vec![w, [w[0], w[1] + two_pi], [w[0], w[1] - two_pi]]
        }
        _ => vec![w],
    }
}

pub fn product_chart_map(m: &ExactProduct, chart: ChartId, q: &[f64]) -> Option<[f64; 2]> {
    let centers = [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)];
    let (cx, cy) = *centers.get(chart)?;
    let ang = m.angles(q);
    let x = wrap_half(ang[0] - cx);
    let y = wrap_half(ang[1] - cy);
    if x.abs() <= TORUS_HALF && y.abs() <= TORUS_HALF {
        Some([x, y])
    } else {
        None
    }
}

pub fn product_chart_select(m: &ExactProduct, q: &[f64]) -> Option<(ChartId, [f64; 2])> {
    let mut best: Option<(ChartId, [f64; 2], f64)> = None;
    for chart in 0..4 {
        let centers = [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)];
        let (cx, cy) = centers[chart];
        let ang = m.angles(q);
        let x = wrap_half(ang[0] - cx);
        let y = wrap_half(ang[1] - cy);
        let score = x.abs().max(y.abs());
        if best.map_or(true, |(_, _, s)| score < s) {
            best = Some((chart, [x, y], score));
        }
    }
    best.map(|(c, w, _)| (c, w))
}

pub fn product_chart_metric(_m: &ExactProduct, _chart: ChartId, _w: [f64; 2]) -> [[f64; 2]; 2] {
    [[1.0, 0.0], [0.0, 1.0]]
}

pub fn product_chart_sigma(m: &ExactProduct, chart: ChartId, w: [f64; 2]) -> f64 {
    let centers = [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)];
    let (cx, _) = centers[chart];
    m.b * (2.0 * std::f64::consts::PI * (cx + w[0])).cos()
}

/// Deck representative of `w` closest to `reference`.
pub fn nearest_deck(
    model: &BundleModel,
    chart: ChartId,
    w: [f64; 2],
    reference: [f64; 2],
) -> [f64; 2] {
    let mut best = w;
    let mut best_d = f64::INFINITY;
    for cand in model.chart_deck(chart, w) {
        let d = (cand[0] - reference[0]).powi(2) + (cand[1] - reference[1]).powi(2);
        if d < best_d {
            best_d = d;
            best = cand;
        }
    }
    best
}

/// Christoffel symbols of a chart metric by central differences.
pub fn chart_christoffel(model: &BundleModel, chart: ChartId, w: [f64; 2]) -> [[[f64; 2]; 2]; 2] {
    let h = 1e-6;
    let mut dg = [[[0.0; 2]; 2]; 2];
    for k in 0..2 {
        let mut wp = w;
        let mut wm = w;
        wp[k] += h;
        wm[k] -= h;
        let gp = model.chart_metric(chart, wp);
        let gm = model.chart_metric(chart, wm);
        for i in 0..2 {
            for j in 0..2 {
                dg[k][i][j] = (gp[i][j] - gm[i][j]) / (2.0 * h);
            }
        }
    }
    let g = model.chart_metric(chart, w);
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let ginv = [
        [g[1][1] / det, -g[0][1] / det],
        [-g[1][0] / det, g[0][0] / det],
    ];
    let mut out = [[[0.0; 2]; 2]; 2];
    for l in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = 0.0;
                for k in 0..2 {
                    acc += 0.5 * ginv[l][k] * (dg[i][k][j] + dg[j][k][i] - dg[k][i][j]);
                }
                out[l][i][j] = acc;
            }
        }
    }
    out
}
