//! Concrete Riemannian locally-free principal `G`-bundles with ambient-space
//! representation, base projection, and curvature evaluation.
//!
//! Two families are shipped, both with `G = S¹ = R/Z` (period 1, explicit 2π
//! factors in all action formulas, `Z = 1`, standard metric on the algebra):
//!
//! * [`WeightedSphere`]: `S³ ⊂ R⁴ ≅ C²` with the weighted circle action
//!   `θ·(z₁,z₂) = (e^{2πipθ}z₁, e^{2πiqθ}z₂)`.  `p = q = 1` is the Hopf
//!   bundle over the round `S²(1/2)`; coprime `p ≠ q` gives the spindle
//!   orbifold with cone points of orders `p` and `q`.  The metric is the
//!   euclidean one squashed along the orbit direction so that fundamental
//!   fields are isometric to the algebra.
//! * [`ExactProduct`]: `T² × S¹` as three radius-`1/(2π)` circles in `R⁶`,
//!   the circle acting on the last factor, connection `θ = η + dt` with
//!   `η = (B/2π) sin(2πx) dy`, so the magnetic form downstairs is the exact
//!   form `B cos(2πx) dx∧dy` on the unit flat torus.

mod charts;
mod product;
mod weighted;

pub use charts::ChartId;
pub use product::ExactProduct;
pub use weighted::WeightedSphere;

use crate::error::{CoreError, Result};
use crate::liegroup::{GroupElement, GroupModel, LieAlgebraVector};
use crate::scalar::{dot, Dual, Scalar};
use nalgebra::DMatrix;
use rand::Rng;

/// Step for first-derivative finite differences (curvature, chart Jacobians).
const FD_FIRST: f64 = 1e-5;
/// Step for the finite-difference Levi-Civita used in invariant tests.
const FD_NABLA: f64 = 1e-4;

#[derive(Debug, Clone)]
pub enum BundleModel {
    Weighted(WeightedSphere),
    Product(ExactProduct),
}

impl BundleModel {
    /// Free Hopf bundle `S³ → S²`; the weighted model with `p = q = 1`.
    pub fn hopf() -> Self {
        BundleModel::Weighted(WeightedSphere::new(1, 1).expect("1,1 coprime"))
    }

    /// Weighted sphere over the `(p,q)`-spindle orbifold.
    pub fn spindle(p: u32, q: u32) -> Result<Self> {
        Ok(BundleModel::Weighted(WeightedSphere::new(p, q)?))
    }

    /// Trivial circle bundle over the flat torus with exact magnetic form.
    pub fn exact_product(b: f64) -> Self {
        BundleModel::Product(ExactProduct::new(b))
    }

    pub fn name(&self) -> String {
        match self {
            BundleModel::Weighted(m) if m.p == 1 && m.q == 1 => "hopf".into(),
            BundleModel::Weighted(m) => format!("spindle({},{})", m.p, m.q),
            BundleModel::Product(m) => format!("exact_product(B={})", m.b),
        }
    }

    pub fn group(&self) -> &GroupModel {
        match self {
            BundleModel::Weighted(m) => &m.group,
            BundleModel::Product(m) => &m.group,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            BundleModel::Weighted(_) => 4,
            BundleModel::Product(_) => 6,
        }
    }

    pub fn alg_dim(&self) -> usize {
        1
    }

    pub fn z(&self) -> &[f64] {
        self.group().z.as_deref().expect("bundle groups carry Z")
    }

    pub fn order_bound(&self) -> u32 {
        self.group().order_bound
    }

    /// Max constraint residual `|c(q)|`.
    pub fn constraint_residual(&self, q: &[f64]) -> f64 {
        match self {
            BundleModel::Weighted(m) => m.constraint_residual(q),
            BundleModel::Product(m) => m.constraint_residual(q),
        }
    }

    /// Constraint map values `c(q)` (zero on `Q`).
    pub fn constraints<S: Scalar>(&self, q: &[S]) -> Vec<S> {
        match self {
            BundleModel::Weighted(m) => m.constraints(q),
            BundleModel::Product(m) => m.constraints(q),
        }
    }

    /// Euclidean-orthonormal spans of the constraint normals at `q`.
    pub fn constraint_normals(&self, q: &[f64]) -> Vec<Vec<f64>> {
        match self {
            BundleModel::Weighted(m) => m.constraint_normals(q),
            BundleModel::Product(m) => m.constraint_normals(q),
        }
    }

    pub fn retract<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        match self {
            BundleModel::Weighted(m) => m.retract(x),
            BundleModel::Product(m) => m.retract(x),
        }
    }

    /// Euclidean-orthogonal projection onto the tangent space; for the
    /// shipped models this equals the `g_Q`-orthogonal one because the
    /// constraint normals stay metric-orthogonal to the tangent spaces.
    pub fn tangent_project<S: Scalar>(&self, q: &[S], v: &[S]) -> Vec<S> {
        match self {
            BundleModel::Weighted(m) => m.tangent_project(q, v),
            BundleModel::Product(m) => m.tangent_project(q, v),
        }
    }

    /// Action of the group element with torus coordinates `g`.
    pub fn act(&self, g: &[f64], q: &[f64]) -> Vec<f64> {
        match self {
            BundleModel::Weighted(m) => m.act(g[0], q),
            BundleModel::Product(m) => m.act(g[0], q),
        }
    }

    pub fn act_element(&self, g: &GroupElement, q: &[f64]) -> Vec<f64> {
        match g {
            GroupElement::Torus(c) => self.act(c, q),
            GroupElement::Quaternion(_) => panic!("bundle groups are tori"),
        }
    }

    /// Differential of the action on ambient vectors; the shipped actions
    /// are linear, so it coincides with the action itself.
    pub fn act_linear(&self, g: &[f64], v: &[f64]) -> Vec<f64> {
        self.act(g, v)
    }

    /// Fundamental vector field `X̲_q = d/dt|₀ exp(tX)·q`.
    pub fn fundamental_field<S: Scalar>(&self, x: &[S], q: &[S]) -> Vec<S> {
        match self {
            BundleModel::Weighted(m) => m.fundamental_field(x[0], q),
            BundleModel::Product(m) => m.fundamental_field(x[0], q),
        }
    }

    /// The lifted metric `g_Q` as an ambient bilinear form (smoothly extended
    /// off `Q`, nondegenerate, restricting to the bundle metric on `TQ`).
    pub fn metric<S: Scalar>(&self, q: &[S], u: &[S], v: &[S]) -> S {
        match self {
            BundleModel::Weighted(m) => m.metric(q, u, v),
            BundleModel::Product(m) => m.metric(q, u, v),
        }
    }

    pub fn metric_matrix(&self, q: &[f64]) -> DMatrix<f64> {
        let n = self.ambient_dim();
        let mut g = DMatrix::zeros(n, n);
        let mut ei = vec![0.0; n];
        let mut ej = vec![0.0; n];
        for i in 0..n {
            ei.fill(0.0);
            ei[i] = 1.0;
            for j in 0..=i {
                ej.fill(0.0);
                ej[j] = 1.0;
                let v = self.metric(q, &ei, &ej);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    /// Connection form `θ_q(v)`, the metric-orthogonal projection onto the
    /// orbit direction expressed in the algebra.
    pub fn connection(&self, q: &[f64], v: &[f64]) -> LieAlgebraVector {
        let d = self.alg_dim();
        let mut basis = Vec::with_capacity(d);
        for a in 0..d {
            let mut e = vec![0.0; d];
            e[a] = 1.0;
            basis.push(self.fundamental_field(&e, q));
        }
        // Gram solve; with the fundamental-field isometry the Gram matrix is
        // the algebra inner product, but we solve it anyway.
        let mut gram = vec![0.0; d * d];
        let mut rhs = vec![0.0; d];
        for a in 0..d {
            for b in 0..d {
                gram[a * d + b] = self.metric(q, &basis[a], &basis[b]);
            }
            rhs[a] = self.metric(q, v, &basis[a]);
        }
        if d == 1 {
            vec![rhs[0] / gram[0]]
        } else {
            let m = DMatrix::from_row_slice(d, d, &gram);
            let r = nalgebra::DVector::from_column_slice(&rhs);
            let sol = m.lu().solve(&r).expect("gram matrix is SPD");
            sol.iter().copied().collect()
        }
    }

    pub fn horizontal_project(&self, q: &[f64], v: &[f64]) -> Vec<f64> {
        let theta = self.connection(q, v);
        let vert = self.fundamental_field(&theta, q);
        v.iter().zip(&vert).map(|(a, b)| a - b).collect()
    }

    /// Curvature pairing `σ_X(u,v) = dθ_X(u,v) + ⟨X,[θ(u),θ(v)]⟩` via a
    /// finite-difference exterior derivative of the extended connection.
    pub fn curvature_sigma(&self, xdual: &[f64], q: &[f64], u: &[f64], v: &[f64]) -> f64 {
        let group = self.group();
        let theta_x = |x: &[f64], w: &[f64]| -> f64 {
            let r = self.retract(x);
            let wt = self.tangent_project(&r, w);
            group.inner(xdual, &self.connection(&r, &wt))
        };
        let h = FD_FIRST;
        let mut du = 0.0;
        let mut dv = 0.0;
        let mut xp = q.to_vec();
        let mut xm = q.to_vec();
        for i in 0..q.len() {
            xp[i] = q[i] + h * u[i];
            xm[i] = q[i] - h * u[i];
        }
        du += (theta_x(&xp, v) - theta_x(&xm, v)) / (2.0 * h);
        for i in 0..q.len() {
            xp[i] = q[i] + h * v[i];
            xm[i] = q[i] - h * v[i];
        }
        dv += (theta_x(&xp, u) - theta_x(&xm, u)) / (2.0 * h);
        let bracket = group.bracket(&self.connection(q, u), &self.connection(q, v));
        du - dv + group.inner(xdual, &bracket)
    }

    /// Euclidean-orthonormal basis of the tangent space at `q`.
    pub fn tangent_basis(&self, q: &[f64]) -> Vec<Vec<f64>> {
        match self {
            BundleModel::Weighted(m) => m.tangent_basis(q),
            BundleModel::Product(m) => m.tangent_basis(q),
        }
    }

    pub fn tangent_dim(&self) -> usize {
        match self {
            BundleModel::Weighted(_) => 3,
            BundleModel::Product(_) => 3,
        }
    }

    /// Order of the stabilizer subgroup at `q` (analytic per model).
    pub fn stabilizer_order(&self, q: &[f64]) -> u32 {
        match self {
            BundleModel::Weighted(m) => m.stabilizer_order(q),
            BundleModel::Product(_) => 1,
        }
    }

    /// Whether the fiber-direction loop `t ↦ exp(-tX)·q` is contractible in
    /// `Q`; drives admissibility of the path minimax class.
    pub fn vertical_loop_contractible(&self, x: &[f64]) -> bool {
        match self {
            BundleModel::Weighted(_) => true,
            BundleModel::Product(_) => x.iter().all(|c| c.abs() < 1e-12),
        }
    }

    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            BundleModel::Weighted(m) => m.random_point(rng),
            BundleModel::Product(m) => m.random_point(rng),
        }
    }

    /// Pointwise geodesic interpolation in the ambient representation
    /// (slerp on the sphere, per-factor shortest arc on the product).
    pub fn interpolate_points(&self, a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
        match self {
            BundleModel::Weighted(m) => m.interpolate(a, b, s),
            BundleModel::Product(m) => m.interpolate(a, b, s),
        }
    }

    // ----- covariant derivative (test/verification machinery) -----

    /// Levi-Civita derivative `∇_v W` at `q` by the Gauss formula: ambient
    /// Christoffel action of the extended metric plus tangential projection,
    /// all by second-order finite differences with step `1e-4`.
    pub fn covariant_derivative<F>(&self, q: &[f64], v: &[f64], field: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let n = self.ambient_dim();
        let h = FD_NABLA;
        // tangential directional derivative of the field along v,
        // fourth-order central stencil
        let shift = |s: f64| -> Vec<f64> {
            let x: Vec<f64> = q.iter().zip(v).map(|(a, b)| a + s * b).collect();
            field(&self.retract(&x))
        };
        let (wp, wm) = (shift(h), shift(-h));
        let (wp2, wm2) = (shift(2.0 * h), shift(-2.0 * h));
        let mut dv: Vec<f64> = (0..n)
            .map(|i| (8.0 * (wp[i] - wm[i]) - (wp2[i] - wm2[i])) / (12.0 * h))
            .collect();
        // ambient Christoffel correction Γ(v, W)
        let w0 = field(q);
        let gamma = self.ambient_christoffel(q, v, &w0);
        for i in 0..n {
            dv[i] += gamma[i];
        }
        let tang = self.tangent_project(q, &dv);
        tang
    }

    /// `Γ(q)(u,w)` for the extended ambient metric, entrywise
    /// `Γ^l = ½ g^{lk} (∂_i g_{kj} + ∂_j g_{ki} - ∂_k g_{ij}) u^i w^j`.
    fn ambient_christoffel(&self, q: &[f64], u: &[f64], w: &[f64]) -> Vec<f64> {
        let n = self.ambient_dim();
        let h = FD_NABLA;
        // ∂_i G as n matrices, fourth-order central stencil
        let mut dg = Vec::with_capacity(n);
        for i in 0..n {
            let at = |s: f64| {
                let mut x = q.to_vec();
                x[i] += s;
                self.metric_matrix(&x)
            };
            let (gp, gm) = (at(h), at(-h));
            let (gp2, gm2) = (at(2.0 * h), at(-2.0 * h));
            dg.push((8.0 * (gp - gm) - (gp2 - gm2)) / (12.0 * h));
        }
        let g = self.metric_matrix(q);
        let ginv = g.try_inverse().expect("extended metric nondegenerate");
        let mut low = vec![0.0; n];
        for k in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += 0.5 * (dg[i][(k, j)] + dg[j][(k, i)] - dg[k][(i, j)]) * u[i] * w[j];
                }
            }
            low[k] = acc;
        }
        let mut out = vec![0.0; n];
        for l in 0..n {
            for k in 0..n {
                out[l] += ginv[(l, k)] * low[k];
            }
        }
        out
    }

    // ----- charts -----

    pub fn chart_count(&self) -> usize {
        match self {
            BundleModel::Weighted(_) => 3,
            BundleModel::Product(_) => 4,
        }
    }

    /// Chart coordinates of `τ(q)` in the named chart, `None` outside its
    /// domain.  Defined up to the chart's local group action.
    pub fn chart_map(&self, chart: ChartId, q: &[f64]) -> Option<[f64; 2]> {
        match self {
            BundleModel::Weighted(m) => charts::weighted_chart_map(m, chart, q),
            BundleModel::Product(m) => charts::product_chart_map(m, chart, q),
        }
    }

    /// Preferred chart for `τ(q)` with its coordinates.
    pub fn project_to_base(&self, q: &[f64]) -> Result<(ChartId, [f64; 2])> {
        let sel = match self {
            BundleModel::Weighted(m) => charts::weighted_chart_select(m, q),
            BundleModel::Product(m) => charts::product_chart_select(m, q),
        };
        sel.ok_or_else(|| CoreError::ChartNotFound(format!("q = {:?}", q)))
    }

    /// Local base metric in chart coordinates, row-major 2x2.
    pub fn chart_metric(&self, chart: ChartId, w: [f64; 2]) -> [[f64; 2]; 2] {
        match self {
            BundleModel::Weighted(m) => charts::weighted_chart_metric(m, chart, w),
            BundleModel::Product(m) => charts::product_chart_metric(m, chart, w),
        }
    }

    /// Scalar of the local magnetic two-form, `σ̄_Z = s(w) dw¹∧dw²`.
    pub fn chart_sigma(&self, chart: ChartId, w: [f64; 2]) -> f64 {
        match self {
            BundleModel::Weighted(m) => charts::weighted_chart_sigma(m, chart, w),
            BundleModel::Product(m) => charts::product_chart_sigma(m, chart, w),
        }
    }

    /// Deck transformations of the chart's local group, acting on coords.
    pub fn chart_deck(&self, chart: ChartId, w: [f64; 2]) -> Vec<[f64; 2]> {
        match self {
            BundleModel::Weighted(m) => charts::weighted_chart_deck(m, chart, w),
            BundleModel::Product(_) => vec![w],
        }
    }

    /// Jacobian of `chart_map` at `q` restricted to ambient directions,
    /// by central differences; rows are the two chart coordinates.
    pub fn chart_jacobian(&self, chart: ChartId, q: &[f64]) -> Option<[Vec<f64>; 2]> {
        let n = self.ambient_dim();
        let h = FD_FIRST;
        let base = self.chart_map(chart, q)?;
        let mut rows = [vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let mut qp = q.to_vec();
            let mut qm = q.to_vec();
            qp[i] += h;
            qm[i] -= h;
            let wp = charts::nearest_deck(self, chart, self.chart_map(chart, &self.retract(&qp))?, base);
            let wm = charts::nearest_deck(self, chart, self.chart_map(chart, &self.retract(&qm))?, base);
            rows[0][i] = (wp[0] - wm[0]) / (2.0 * h);
            rows[1][i] = (wp[1] - wm[1]) / (2.0 * h);
        }
        Some(rows)
    }

    /// Horizontal lift at `q` of a chart tangent vector `dw`.
    pub fn horizontal_lift(&self, chart: ChartId, q: &[f64], dw: [f64; 2]) -> Option<Vec<f64>> {
        let jac = self.chart_jacobian(chart, q)?;
        let basis = self.tangent_basis(q);
        let hor: Vec<Vec<f64>> = basis
            .iter()
            .map(|b| self.horizontal_project(q, b))
            .collect();
        // two independent horizontal directions out of the projected basis
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for hvec in &hor {
            let mut cand = hvec.clone();
            for d in &dirs {
                let c = dot(&cand, d) / dot(d, d);
                for (x, y) in cand.iter_mut().zip(d) {
                    *x -= c * y;
                }
            }
            if dot(&cand, &cand).sqrt() > 1e-8 {
                dirs.push(cand);
            }
            if dirs.len() == 2 {
                break;
            }
        }
        if dirs.len() < 2 {
            return None;
        }
        // solve 2x2: dw = J * (a dirs0 + b dirs1)
        let mut m = [[0.0; 2]; 2];
        for (c, dir) in dirs.iter().enumerate() {
            for r in 0..2 {
                m[r][c] = dot(&jac[r], dir);
            }
        }
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() < 1e-12 {
            return None;
        }
        let a = (dw[0] * m[1][1] - dw[1] * m[0][1]) / det;
        let b = (dw[1] * m[0][0] - dw[0] * m[1][0]) / det;
        Some(
            (0..self.ambient_dim())
                .map(|i| a * dirs[0][i] + b * dirs[1][i])
                .collect(),
        )
    }

    /// Directional derivative of a model field along a tangent direction via
    /// dual numbers; used by the gradient assembly.
    pub fn metric_directional(&self, q: &[f64], dir: &[f64], u: &[f64], v: &[f64]) -> f64 {
        let qd: Vec<Dual> = q.iter().zip(dir).map(|(a, b)| Dual::new(*a, *b)).collect();
        let ud: Vec<Dual> = u.iter().map(|a| Dual::constant(*a)).collect();
        let vd: Vec<Dual> = v.iter().map(|a| Dual::constant(*a)).collect();
        self.metric(&qd, &ud, &vd).d
    }
}

/// Christoffel symbols of a chart metric (finite differences).
pub fn chart_christoffel_at(
    model: &BundleModel,
    chart: ChartId,
    w: [f64; 2],
) -> [[[f64; 2]; 2]; 2] {
    charts::chart_christoffel(model, chart, w)
}

/// Deck representative of chart coordinates closest to a reference.
pub fn nearest_deck_pub(
    model: &BundleModel,
    chart: ChartId,
    w: [f64; 2],
    reference: [f64; 2],
) -> [f64; 2] {
    charts::nearest_deck(model, chart, w, reference)
}
