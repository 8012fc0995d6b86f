//! Trivial circle bundle over the flat torus with a prescribed exact
//! curvature form.
//!
//! `Q = T² × S¹` embedded in `R⁶` as three circles of radius `1/(2π)`, so
//! unit euclidean speed along a factor is unit angle speed and the flat
//! torus has unit side.  The circle acts by rotating the last factor.  The
//! connection is `θ = η + dt` with the primitive `η = (B/2π) sin(2πx) dy`;
//! its curvature is the exact form `dη = B cos(2πx) dx∧dy`.  The metric is
//! the horizontal lift of the flat base metric:
//! `g_Q(u,v) = dx(u)dx(v) + dy(u)dy(v) + θ(u)θ(v)`
//! (plus constraint-normal padding to stay nondegenerate in the ambient
//! space; the padding vanishes on tangent vectors).

use crate::liegroup::GroupModel;
use crate::scalar::Scalar;
use rand::Rng;

pub const FACTOR_RADIUS: f64 = 1.0 / (2.0 * std::f64::consts::PI);

#[derive(Debug, Clone)]
pub struct ExactProduct {
    /// Field strength: the magnetic form downstairs is `B cos(2πx) dx∧dy`.
    pub b: f64,
    pub group: GroupModel,
}

impl ExactProduct {
    pub fn new(b: f64) -> Self {
        Self {
            b,
            group: GroupModel::circle(1),
        }
    }

    pub fn constraint_residual(&self, q: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..3 {
            let r2 = q[2 * a] * q[2 * a] + q[2 * a + 1] * q[2 * a + 1];
            worst = worst.max((r2 - FACTOR_RADIUS * FACTOR_RADIUS).abs());
        }
        worst
    }

    pub fn constraints<S: Scalar>(&self, q: &[S]) -> Vec<S> {
        let rho2 = S::from_f64(FACTOR_RADIUS * FACTOR_RADIUS);
        (0..3)
            .map(|a| q[2 * a] * q[2 * a] + q[2 * a + 1] * q[2 * a + 1] - rho2)
            .collect()
    }

    pub fn constraint_normals(&self, q: &[f64]) -> Vec<Vec<f64>> {
        (0..3)
            .map(|a| {
                let r = (q[2 * a] * q[2 * a] + q[2 * a + 1] * q[2 * a + 1]).sqrt();
                let mut n = vec![0.0; 6];
                n[2 * a] = q[2 * a] / r;
                n[2 * a + 1] = q[2 * a + 1] / r;
                n
            })
            .collect()
    }

    pub fn retract<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let mut out = Vec::with_capacity(6);
        let rho = S::from_f64(FACTOR_RADIUS);
        for a in 0..3 {
            let (u, v) = (x[2 * a], x[2 * a + 1]);
            let n = (u * u + v * v).sqrt();
            out.push(rho * u / n);
            out.push(rho * v / n);
        }
        out
    }

    pub fn tangent_project<S: Scalar>(&self, q: &[S], v: &[S]) -> Vec<S> {
        let mut out = Vec::with_capacity(6);
        for a in 0..3 {
            let (qx, qy) = (q[2 * a], q[2 * a + 1]);
            let (vx, vy) = (v[2 * a], v[2 * a + 1]);
            let c = (qx * vx + qy * vy) / (qx * qx + qy * qy);
            out.push(vx - c * qx);
            out.push(vy - c * qy);
        }
        out
    }

    pub fn act(&self, theta: f64, q: &[f64]) -> Vec<f64> {
        let a = 2.0 * std::f64::consts::PI * theta;
        let (c, s) = (a.cos(), a.sin());
        let mut out = q.to_vec();
        out[4] = c * q[4] - s * q[5];
        out[5] = s * q[4] + c * q[5];
        out
    }

    pub fn fundamental_field<S: Scalar>(&self, x: S, q: &[S]) -> Vec<S> {
        let tp = S::from_f64(2.0 * std::f64::consts::PI) * x;
        let z = S::zero();
        vec![z, z, z, z, -tp * q[5], tp * q[4]]
    }

    /// Angle-coordinate velocity of factor `a` (x, y, or fiber).
    fn angle_rate<S: Scalar>(&self, a: usize, q: &[S], v: &[S]) -> S {
        let (qx, qy) = (q[2 * a], q[2 * a + 1]);
        let (vx, vy) = (v[2 * a], v[2 * a + 1]);
        let two_pi = S::from_f64(2.0 * std::f64::consts::PI);
        (qx * vy - qy * vx) / (two_pi * (qx * qx + qy * qy))
    }

    /// Connection value `θ(v) = dt(v) + (B/2π) sin(2πx) dy(v)`.
    fn theta<S: Scalar>(&self, q: &[S], v: &[S]) -> S {
        let r0 = (q[0] * q[0] + q[1] * q[1]).sqrt();
        let sin_x = q[1] / r0;
        let coef = S::from_f64(self.b / (2.0 * std::f64::consts::PI)) * sin_x;
        self.angle_rate(2, q, v) + coef * self.angle_rate(1, q, v)
    }

    pub fn metric<S: Scalar>(&self, q: &[S], u: &[S], v: &[S]) -> S {
        let mut acc = self.angle_rate(0, q, u) * self.angle_rate(0, q, v)
            + self.angle_rate(1, q, u) * self.angle_rate(1, q, v)
            + self.theta(q, u) * self.theta(q, v);
        // normal padding per factor, vanishes on tangent vectors
        for a in 0..3 {
            let (qx, qy) = (q[2 * a], q[2 * a + 1]);
            let r2 = qx * qx + qy * qy;
            let nu = (qx * u[2 * a] + qy * u[2 * a + 1]) / r2.sqrt();
            let nv = (qx * v[2 * a] + qy * v[2 * a + 1]) / r2.sqrt();
            let scale = S::from_f64(1.0 / (FACTOR_RADIUS * FACTOR_RADIUS));
            acc = acc + scale * nu * nv;
        }
        acc
    }

    pub fn tangent_basis(&self, q: &[f64]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(3);
        for a in 0..3 {
            let (qx, qy) = (q[2 * a], q[2 * a + 1]);
            let r = (qx * qx + qy * qy).sqrt();
            let mut e = vec![0.0; 6];
            e[2 * a] = -qy / r;
            e[2 * a + 1] = qx / r;
            out.push(e);
        }
        out
    }

    /// Angles in turns, each in `[0,1)`.
    pub fn angles(&self, q: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for a in 0..3 {
            out[a] = (q[2 * a + 1].atan2(q[2 * a]) / (2.0 * std::f64::consts::PI)).rem_euclid(1.0);
        }
        out
    }

    pub fn from_angles(&self, ang: [f64; 3]) -> Vec<f64> {
        let mut out = Vec::with_capacity(6);
        for a in ang {
            let t = 2.0 * std::f64::consts::PI * a;
            out.push(FACTOR_RADIUS * t.cos());
            out.push(FACTOR_RADIUS * t.sin());
        }
        out
    }

    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.from_angles([rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()])
    }

    pub fn interpolate(&self, a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(6);
        for f in 0..3 {
            let (ax, ay) = (a[2 * f], a[2 * f + 1]);
            let (bx, by) = (b[2 * f], b[2 * f + 1]);
            // shortest-arc rotation from a's angle toward b's
            let delta = (ax * by - ay * bx).atan2(ax * bx + ay * by);
            let ang = ay.atan2(ax) + s * delta;
            out.push(FACTOR_RADIUS * ang.cos());
            out.push(FACTOR_RADIUS * ang.sin());
        }
        out
    }

    pub fn b_field(&self) -> f64 {
        self.b
    }
}
