//! Weighted circle actions on the unit three-sphere.
//!
//! `Q = S³ ⊂ R⁴ ≅ C²`, `θ·(z₁,z₂) = (e^{2πipθ}z₁, e^{2πiqθ}z₂)` with
//! coprime weights.  The fundamental field of `X = 1` is `V(q) = K q` with
//! `K = 2π diag(p J, q J)`; its euclidean square norm is
//! `w(q) = 4π²(p²|z₁|² + q²|z₂|²)`.  The bundle metric keeps the euclidean
//! metric on the euclidean orthocomplement of `V` and rescales the orbit
//! direction to unit algebra norm:
//!
//! ```text
//! g_Q(u,v) = ⟨u,v⟩ + (1 - w)/w² ⟨u,V⟩⟨v,V⟩ .
//! ```
//!
//! This is G-invariant, makes `X ↦ X̲` an isometry, and leaves horizontal =
//! euclidean-orthogonal-to-orbit, so the quotient metric on the base is the
//! one induced from the round sphere.  In the invariant coordinates
//! `h = |z₂|²`, `ψ = p·arg z₂ − q·arg z₁` the base metric reads
//!
//! ```text
//! g_M = dh²/(4h(1-h)) + h(1-h)/D dψ²,   D = p²(1-h) + q²h,
//! ```
//!
//! and the magnetic form determined by `Z = 1` is `σ̄_Z = pq/(2πD²) dh∧dψ`
//! with total flux `1/(pq)`.  For `p = q = 1` the base is the round
//! `S²(1/2)` and `σ̄_Z = (1/π)·dA`, flux 1.

use crate::error::{CoreError, Result};
use crate::liegroup::GroupModel;
use crate::scalar::{dot, Scalar};
use rand::Rng;

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a, b) * b
}

#[derive(Debug, Clone)]
pub struct WeightedSphere {
    pub p: u32,
    pub q: u32,
    pub group: GroupModel,
}

impl WeightedSphere {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p == 0 || q == 0 || gcd(p, q) != 1 {
            return Err(CoreError::NonCoprimeWeights(p, q));
        }
        Ok(Self {
            p,
            q,
            group: GroupModel::circle(lcm(p, q)),
        })
    }

    pub fn constraint_residual(&self, q: &[f64]) -> f64 {
        (dot(q, q) - 1.0).abs()
    }

    pub fn constraints<S: Scalar>(&self, q: &[S]) -> Vec<S> {
        vec![dot(q, q) - S::one()]
    }

    pub fn constraint_normals(&self, q: &[f64]) -> Vec<Vec<f64>> {
        let n = dot(q, q).sqrt();
        vec![q.iter().map(|c| c / n).collect()]
    }

    pub fn retract<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = dot(x, x).sqrt();
        x.iter().map(|c| *c / n).collect()
    }

    pub fn tangent_project<S: Scalar>(&self, q: &[S], v: &[S]) -> Vec<S> {
        let c = dot(q, v) / dot(q, q);
        q.iter().zip(v).map(|(a, b)| *b - c * *a).collect()
    }

    pub fn act(&self, theta: f64, q: &[f64]) -> Vec<f64> {
        let (a1, a2) = (
            2.0 * std::f64::consts::PI * self.p as f64 * theta,
            2.0 * std::f64::consts::PI * self.q as f64 * theta,
        );
        let (c1, s1) = (a1.cos(), a1.sin());
        let (c2, s2) = (a2.cos(), a2.sin());
        vec![
            c1 * q[0] - s1 * q[1],
            s1 * q[0] + c1 * q[1],
            c2 * q[2] - s2 * q[3],
            s2 * q[2] + c2 * q[3],
        ]
    }

    /// `X·K q`, `K = 2π diag(p J, q J)`.
    pub fn fundamental_field<S: Scalar>(&self, x: S, q: &[S]) -> Vec<S> {
        let tp = S::from_f64(2.0 * std::f64::consts::PI * self.p as f64) * x;
        let tq = S::from_f64(2.0 * std::f64::consts::PI * self.q as f64) * x;
        vec![-tp * q[1], tp * q[0], -tq * q[3], tq * q[2]]
    }

    pub fn metric<S: Scalar>(&self, q: &[S], u: &[S], v: &[S]) -> S {
        let one = S::one();
        let fv = self.fundamental_field(one, q);
        let w = dot(&fv, &fv);
        let uv = dot(u, v);
        let c = (one - w) / (w * w);
        uv + c * dot(u, &fv) * dot(v, &fv)
    }

    pub fn tangent_basis(&self, q: &[f64]) -> Vec<Vec<f64>> {
        // drop the coordinate axis most aligned with q, orthonormalize the rest
        let mut drop = 0;
        for i in 1..4 {
            if q[i].abs() > q[drop].abs() {
                drop = i;
            }
        }
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(3);
        for i in 0..4 {
            if i == drop {
                continue;
            }
            let mut e = vec![0.0; 4];
            e[i] = 1.0;
            let mut v = self.tangent_project(q, &e);
            for b in &basis {
                let c = dot(&v, b);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
            let n = dot(&v, &v).sqrt();
            for x in &mut v {
                *x /= n;
            }
            basis.push(v);
        }
        basis
    }

    pub fn stabilizer_order(&self, q: &[f64]) -> u32 {
        let r1 = (q[0] * q[0] + q[1] * q[1]).sqrt();
        let r2 = (q[2] * q[2] + q[3] * q[3]).sqrt();
        if r2 < 1e-9 {
            self.p
        } else if r1 < 1e-9 {
            self.q
        } else {
            1
        }
    }

    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = dot(&v, &v).sqrt();
            if n > 0.1 {
                return v.iter().map(|c| c / n).collect();
            }
        }
    }

    pub fn interpolate(&self, a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
        let ca = dot(a, b).clamp(-1.0, 1.0);
        let ang = ca.acos();
        if ang < 1e-12 {
            return a.to_vec();
        }
        let sa = ang.sin();
        let (fa, fb) = (((1.0 - s) * ang).sin() / sa, (s * ang).sin() / sa);
        let out: Vec<f64> = a.iter().zip(b).map(|(x, y)| fa * x + fb * y).collect();
        self.retract(&out)
    }
}
