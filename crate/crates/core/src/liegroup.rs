//! Compact Lie group/algebra kernel: Ad-invariant metric, center
//! projection, and unit-lattice arithmetic.
//!
//! Two families of instances are shipped: tori `T^m = R^m / Z^m` (the groups
//! acting on every bundle model; the circle has period 1 and all action
//! formulas carry explicit 2π factors) and `SU(2)` represented by unit
//! quaternions with algebra `R^3`, bracket the cross product.  The `SU(2)`
//! instance exists to exercise the non-abelian `Ad`/bracket paths.

use crate::error::{CoreError, Result};

/// Coordinates in a fixed orthonormal-ized basis of the Lie algebra.
pub type LieAlgebraVector = Vec<f64>;

const COORD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    /// Torus coordinates, each stored in `[0, 1)`.
    Torus(Vec<f64>),
    /// Unit quaternion `[w, x, y, z]`.
    Quaternion([f64; 4]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Torus,
    Su2,
}

/// A concrete compact group with Ad-invariant inner product, center
/// projection `p_z`, unit lattice of the center, and the stabilizer-order
/// bound `N` used by the vertical-class lattice `(1/N) Λ_z`.
#[derive(Debug, Clone)]
pub struct GroupModel {
    pub kind: GroupKind,
    dim: usize,
    /// Inner-product matrix on the algebra, row-major `dim x dim`.
    inner: Vec<f64>,
    /// Orthogonal projection onto the center, row-major `dim x dim`.
    center_proj: Vec<f64>,
    /// Generators of the unit lattice `Λ_z` of the center (algebra coords).
    lattice: Vec<Vec<f64>>,
    /// Stabilizer-order bound `N`; the detection lattice is `(1/N) Λ_z`.
    pub order_bound: u32,
    /// Central vector with `⟨Z,Z⟩ = 1`, when the model carries one.
    pub z: Option<Vec<f64>>,
}

impl GroupModel {
    /// Torus `R^dim / Z^dim` with the given SPD inner-product matrix.
    /// `Λ_z = Z^dim`, `p_z = id`, `Z = e_1 / |e_1|`.
    pub fn torus(dim: usize, inner: Vec<f64>, order_bound: u32) -> Self {
        assert_eq!(inner.len(), dim * dim);
        assert!(order_bound >= 1);
        let mut center_proj = vec![0.0; dim * dim];
        let mut lattice = Vec::with_capacity(dim);
        for i in 0..dim {
            center_proj[i * dim + i] = 1.0;
            let mut gen = vec![0.0; dim];
            gen[i] = 1.0;
            lattice.push(gen);
        }
        let z_norm = inner[0].sqrt();
        let mut z = vec![0.0; dim];
        z[0] = 1.0 / z_norm;
        Self {
            kind: GroupKind::Torus,
            dim,
            inner,
            center_proj,
            lattice,
            order_bound,
            z: Some(z),
        }
    }

    /// Standard circle `R/Z` with `⟨X,Y⟩ = XY`, `Z = 1`.
    pub fn circle(order_bound: u32) -> Self {
        Self::torus(1, vec![1.0], order_bound)
    }

    /// `SU(2)`: algebra `R^3`, bracket = cross product, inner = dot.
    /// The center of the algebra is `0`, so the unit lattice is empty.
    pub fn su2() -> Self {
        Self {
            kind: GroupKind::Su2,
            dim: 3,
            inner: vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            center_proj: vec![0.0; 9],
            lattice: Vec::new(),
            order_bound: 1,
            z: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += x[i] * self.inner[i * d + j] * y[j];
            }
        }
        acc
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.inner(x, x).sqrt()
    }

    pub fn identity(&self) -> GroupElement {
        match self.kind {
            GroupKind::Torus => GroupElement::Torus(vec![0.0; self.dim]),
            GroupKind::Su2 => GroupElement::Quaternion([1.0, 0.0, 0.0, 0.0]),
        }
    }

    pub fn exp(&self, x: &[f64]) -> GroupElement {
        assert_eq!(x.len(), self.dim);
        match self.kind {
            GroupKind::Torus => {
                GroupElement::Torus(x.iter().map(|c| c.rem_euclid(1.0)).collect())
            }
            GroupKind::Su2 => {
                let th = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                if th < 1e-300 {
                    return GroupElement::Quaternion([1.0, 0.0, 0.0, 0.0]);
                }
                let (s, c) = ((th / 2.0).sin(), (th / 2.0).cos());
                GroupElement::Quaternion([c, s * x[0] / th, s * x[1] / th, s * x[2] / th])
            }
        }
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        match (a, b) {
            (GroupElement::Torus(u), GroupElement::Torus(v)) => GroupElement::Torus(
                u.iter().zip(v).map(|(x, y)| (x + y).rem_euclid(1.0)).collect(),
            ),
            (GroupElement::Quaternion(p), GroupElement::Quaternion(q)) => {
                GroupElement::Quaternion(quat_mul(*p, *q))
            }
            _ => panic!("mixed group element kinds"),
        }
    }

    pub fn inverse(&self, a: &GroupElement) -> GroupElement {
        match a {
            GroupElement::Torus(u) => {
                GroupElement::Torus(u.iter().map(|x| (-x).rem_euclid(1.0)).collect())
            }
            GroupElement::Quaternion(q) => GroupElement::Quaternion([q[0], -q[1], -q[2], -q[3]]),
        }
    }

    pub fn is_identity(&self, a: &GroupElement, tol: f64) -> bool {
        match a {
            GroupElement::Torus(u) => u
                .iter()
                .all(|x| (x.rem_euclid(1.0)).min((1.0 - x.rem_euclid(1.0)).abs()) <= tol),
            GroupElement::Quaternion(q) => {
                (q[0].abs() - 1.0).abs() <= tol
                    && q[1].abs() <= tol
                    && q[2].abs() <= tol
                    && q[3].abs() <= tol
            }
        }
    }

    /// Adjoint action `Ad_g X`.
    pub fn ad(&self, g: &GroupElement, x: &[f64]) -> LieAlgebraVector {
        match (self.kind, g) {
            (GroupKind::Torus, _) => x.to_vec(),
            (GroupKind::Su2, GroupElement::Quaternion(q)) => {
                let v = quat_mul(quat_mul(*q, [0.0, x[0], x[1], x[2]]), quat_conj(*q));
                vec![v[1], v[2], v[3]]
            }
            _ => panic!("mixed group element kinds"),
        }
    }

    pub fn bracket(&self, x: &[f64], y: &[f64]) -> LieAlgebraVector {
        match self.kind {
            GroupKind::Torus => vec![0.0; self.dim],
            GroupKind::Su2 => vec![
                x[1] * y[2] - x[2] * y[1],
                x[2] * y[0] - x[0] * y[2],
                x[0] * y[1] - x[1] * y[0],
            ],
        }
    }

    /// Orthogonal projection onto the center of the algebra.
    pub fn center_project(&self, x: &[f64]) -> LieAlgebraVector {
        let d = self.dim;
        let mut out = vec![0.0; d];
        for i in 0..d {
            for j in 0..d {
                out[i] += self.center_proj[i * d + j] * x[j];
            }
        }
        out
    }

    /// Nearest element of `(1/N) Λ_z` to `p_z(X)`, with its metric distance.
    ///
    /// Coefficients are found by rounding the Gram solve and searching the
    /// `{-1,0,1}` neighbor offsets; exact for the shipped (diagonal-metric)
    /// instances.
    pub fn lattice_round(&self, x: &[f64]) -> (LieAlgebraVector, f64) {
        let px = self.center_project(x);
        let r = self.lattice.len();
        if r == 0 {
            let zero = vec![0.0; self.dim];
            let mut diff = px.clone();
            for (d, z) in diff.iter_mut().zip(&zero) {
                *d -= z;
            }
            return (zero, self.norm(&diff));
        }
        let scale = 1.0 / self.order_bound as f64;
        // Gram solve for real coefficients of px in the scaled generators
        let mut gram = vec![0.0; r * r];
        let mut rhs = vec![0.0; r];
        for i in 0..r {
            for j in 0..r {
                gram[i * r + j] = self.inner(&self.lattice[i], &self.lattice[j]) * scale * scale;
            }
            rhs[i] = self.inner(&self.lattice[i], &px) * scale;
        }
        let coef = solve_small(&gram, &rhs, r);
        let base: Vec<i64> = coef.iter().map(|c| c.round() as i64).collect();
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut offsets = vec![0i64; r];
        search_offsets(&mut offsets, 0, &mut |off| {
            let mut cand = vec![0.0; self.dim];
            for i in 0..r {
                let c = (base[i] + off[i]) as f64 * scale;
                for (k, g) in self.lattice[i].iter().enumerate() {
                    cand[k] += c * g;
                }
            }
            let mut diff = px.clone();
            for (d, c) in diff.iter_mut().zip(&cand) {
                *d -= c;
            }
            let dist = self.norm(&diff);
            if best.as_ref().map_or(true, |(_, bd)| dist < *bd) {
                best = Some((cand, dist));
            }
        });
        best.unwrap()
    }

    /// Minimal metric norm over the nonzero elements of `(1/N) Λ_z`.
    pub fn lattice_gap(&self) -> Result<f64> {
        if self.lattice.is_empty() {
            return Err(CoreError::EmptyLattice);
        }
        let r = self.lattice.len();
        let scale = 1.0 / self.order_bound as f64;
        let mut best = f64::INFINITY;
        let mut coords = vec![0i64; r];
        search_window(&mut coords, 0, 2, &mut |c| {
            if c.iter().all(|&v| v == 0) {
                return;
            }
            let mut cand = vec![0.0; self.dim];
            for i in 0..r {
                for (k, g) in self.lattice[i].iter().enumerate() {
                    cand[k] += c[i] as f64 * scale * g;
                }
            }
            let n = self.norm(&cand);
            if n < best {
                best = n;
            }
        });
        Ok(best)
    }

    /// Lattice generators (for tests).
    pub fn lattice_generators(&self) -> &[Vec<f64>] {
        &self.lattice
    }
}

fn quat_mul(p: [f64; 4], q: [f64; 4]) -> [f64; 4] {
    [
        p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
        p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
        p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
        p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0],
    ]
}

fn quat_conj(q: [f64; 4]) -> [f64; 4] {
    [q[0], -q[1], -q[2], -q[3]]
}

/// Gaussian elimination for tiny SPD systems.
fn solve_small(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let mut r = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if m[row * n + col].abs() > m[piv * n + col].abs() {
                piv = row;
            }
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            r.swap(col, piv);
        }
        let d = m[col * n + col];
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[row * n + col] / d;
            for k in col..n {
                m[row * n + k] -= f * m[col * n + k];
            }
            r[row] -= f * r[col];
        }
    }
    (0..n).map(|i| r[i] / m[i * n + i]).collect()
}

fn search_offsets(offsets: &mut Vec<i64>, idx: usize, f: &mut impl FnMut(&[i64])) {
    if idx == offsets.len() {
        f(offsets);
        return;
    }
    for v in -1..=1 {
        offsets[idx] = v;
        search_offsets(offsets, idx + 1, f);
    }
}

fn search_window(coords: &mut Vec<i64>, idx: usize, w: i64, f: &mut impl FnMut(&[i64])) {
    if idx == coords.len() {
        f(coords);
        return;
    }
    for v in -w..=w {
        coords[idx] = v;
        search_window(coords, idx + 1, w, f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    /// Scaling-and-squaring matrix exponential on the 4x4 left-multiplication
    /// representation of quaternions; independent oracle for `exp`.
    fn quat_exp_oracle(x: &[f64]) -> [f64; 4] {
        // left multiplication by the pure quaternion x/2
        let h = [0.0, x[0] / 2.0, x[1] / 2.0, x[2] / 2.0];
        let mut l = [[0.0; 4]; 4];
        for (col, e) in [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
            .iter()
            .enumerate()
        {
            let prod = quat_mul(h, *e);
            for row in 0..4 {
                l[row][col] = prod[row];
            }
        }
        // scale down, Taylor series, square back up
        let s = 20;
        let scale = 1.0 / f64::powi(2.0, s);
        let mut a = [[0.0; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                a[r][c] = l[r][c] * scale;
            }
        }
        let mut acc = ident();
        let mut pw = ident();
        let mut fact = 1.0;
        for k in 1..20 {
            pw = mat_mul(&pw, &a);
            fact *= k as f64;
            for r in 0..4 {
                for c in 0..4 {
                    acc[r][c] += pw[r][c] / fact;
                }
            }
        }
        let mut out = acc;
        for _ in 0..s {
            out = mat_mul(&out, &out);
        }
        let e = [1.0, 0.0, 0.0, 0.0];
        let mut q = [0.0; 4];
        for r in 0..4 {
            for c in 0..4 {
                q[r] += out[r][c] * e[c];
            }
        }
        q
    }

    fn ident() -> [[f64; 4]; 4] {
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            m[i][i] = 1.0;
        }
        m
    }

    fn mat_mul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += a[r][k] * b[k][c];
                }
                out[r][c] = acc;
            }
        }
        out
    }

    #[test]
    fn torus_exp_identity_and_lattice() {
        let g = GroupModel::circle(1);
        assert!(g.is_identity(&g.exp(&[0.0]), 0.0));
        assert!(g.is_identity(&g.exp(&[1.0]), 1e-15));
        assert!(!g.is_identity(&g.exp(&[0.5]), 1e-6));
    }

    #[test]
    fn su2_exp_matches_matrix_oracle() {
        let g = GroupModel::su2();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let ours = match g.exp(&x) {
                GroupElement::Quaternion(q) => q,
                _ => unreachable!(),
            };
            let oracle = quat_exp_oracle(&x);
            for i in 0..4 {
                assert_relative_eq!(ours[i], oracle[i], epsilon = 1e-10);
            }
            // exp(X) exp(-X) = e
            let xn: Vec<f64> = x.iter().map(|v| -v).collect();
            let prod = g.multiply(&g.exp(&x), &g.exp(&xn));
            assert!(g.is_identity(&prod, 1e-12));
        }
    }

    #[test]
    fn su2_ad_isometry_and_bracket() {
        let g = GroupModel::su2();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let el = g.exp(&w);
            let ax = g.ad(&el, &x);
            let ay = g.ad(&el, &y);
            assert_relative_eq!(g.inner(&ax, &ay), g.inner(&x, &y), epsilon = 1e-12);
        }
        // bracket(e1, e2) = e3 in this basis
        let b = g.bracket(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]);
        assert_relative_eq!(b[0], 0.0);
        assert_relative_eq!(b[1], 0.0);
        assert_relative_eq!(b[2], 1.0);
        // bracket(X, X) = 0 and Jacobi
        let x = vec![0.3, -0.2, 0.9];
        let y = vec![-1.0, 0.4, 0.2];
        let z = vec![0.5, 0.5, -0.7];
        let xx = g.bracket(&x, &x);
        assert!(g.norm(&xx) < 1e-15);
        let mut jac = g.bracket(&x, &g.bracket(&y, &z));
        let t2 = g.bracket(&y, &g.bracket(&z, &x));
        let t3 = g.bracket(&z, &g.bracket(&x, &y));
        for i in 0..3 {
            jac[i] += t2[i] + t3[i];
        }
        assert!(g.norm(&jac) < 1e-12);
    }

    #[test]
    fn ad_exp_solves_bracket_ode() {
        // Ad(exp(tX), Y) solves dY/dt = [X, Y]; RK4 comparison over [0, 1]
        let g = GroupModel::su2();
        let x = vec![0.4, -0.8, 0.3];
        let y0 = vec![1.0, 0.2, -0.5];
        let steps = 200;
        let h = 1.0 / steps as f64;
        let mut y = y0.clone();
        let f = |y: &Vec<f64>| g.bracket(&x, y);
        for _ in 0..steps {
            let k1 = f(&y);
            let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
            let k2 = f(&y2);
            let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
            let k3 = f(&y3);
            let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
            let k4 = f(&y4);
            for i in 0..3 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        let expect = g.ad(&g.exp(&x), &y0);
        for i in 0..3 {
            assert_relative_eq!(y[i], expect[i], epsilon = 1e-8);
        }
    }

    #[test]
    fn lattice_round_examples() {
        let g1 = GroupModel::circle(1);
        let (x, d) = g1.lattice_round(&[0.0]);
        assert_eq!(x, vec![0.0]);
        assert_relative_eq!(d, 0.0);
        let (x, d) = g1.lattice_round(&[0.4]);
        assert_relative_eq!(x[0], 0.0);
        assert_relative_eq!(d, 0.4, epsilon = 1e-14);

        let g2 = GroupModel::circle(2);
        let (x, d) = g2.lattice_round(&[0.4]);
        assert_relative_eq!(x[0], 0.5);
        assert_relative_eq!(d, 0.1, epsilon = 1e-14);
    }

    #[test]
    fn lattice_gap_examples() {
        assert_relative_eq!(GroupModel::circle(1).lattice_gap().unwrap(), 1.0);
        assert_relative_eq!(GroupModel::circle(3).lattice_gap().unwrap(), 1.0 / 3.0);
        let t2 = GroupModel::torus(2, vec![1.0, 0.0, 0.0, 4.0], 1);
        assert_relative_eq!(t2.lattice_gap().unwrap(), 1.0);
        assert!(matches!(
            GroupModel::su2().lattice_gap(),
            Err(CoreError::EmptyLattice)
        ));
    }

    #[test]
    fn center_projection_is_orthogonal() {
        for g in [GroupModel::circle(2), GroupModel::torus(2, vec![1.0, 0.0, 0.0, 4.0], 3), GroupModel::su2()] {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
            for _ in 0..20 {
                let x: Vec<f64> = (0..g.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let y: Vec<f64> = (0..g.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let px = g.center_project(&x);
                let ppx = g.center_project(&px);
                for i in 0..g.dim() {
                    assert_relative_eq!(px[i], ppx[i], epsilon = 1e-14);
                }
                let py = g.center_project(&y);
                let rest: Vec<f64> = y.iter().zip(&py).map(|(a, b)| a - b).collect();
                assert!(g.inner(&px, &rest).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn group_axioms_in_coordinates() {
        let g = GroupModel::su2();
        let a = g.exp(&[0.3, 0.1, -0.4]);
        let b = g.exp(&[-0.2, 0.5, 0.8]);
        let c = g.exp(&[1.1, -0.6, 0.2]);
        let ab_c = g.multiply(&g.multiply(&a, &b), &c);
        let a_bc = g.multiply(&a, &g.multiply(&b, &c));
        match (ab_c, a_bc) {
            (GroupElement::Quaternion(p), GroupElement::Quaternion(q)) => {
                for i in 0..4 {
                    assert_relative_eq!(p[i], q[i], epsilon = super::COORD_TOL);
                }
            }
            _ => unreachable!(),
        }
        let e = g.multiply(&a, &g.inverse(&a));
        assert!(g.is_identity(&e, super::COORD_TOL));
    }

    proptest! {
        #[test]
        fn one_parameter_subgroup_torus(x in -3.0f64..3.0, s in -2.0f64..2.0, t in -2.0f64..2.0) {
            let g = GroupModel::circle(1);
            let lhs = g.exp(&[(s + t) * x]);
            let rhs = g.multiply(&g.exp(&[s * x]), &g.exp(&[t * x]));
            match (lhs, rhs) {
                (GroupElement::Torus(a), GroupElement::Torus(b)) => {
                    let d = (a[0] - b[0]).rem_euclid(1.0);
                    prop_assert!(d.min(1.0 - d) < 1e-10);
                }
                _ => unreachable!(),
            }
        }

        #[test]
        fn one_parameter_subgroup_su2(
            x0 in -1.5f64..1.5, x1 in -1.5f64..1.5, x2 in -1.5f64..1.5,
            s in -1.5f64..1.5, t in -1.5f64..1.5,
        ) {
            let g = GroupModel::su2();
            let x = vec![x0, x1, x2];
            let xs: Vec<f64> = x.iter().map(|v| s * v).collect();
            let xt: Vec<f64> = x.iter().map(|v| t * v).collect();
            let xst: Vec<f64> = x.iter().map(|v| (s + t) * v).collect();
            let lhs = g.exp(&xst);
            let rhs = g.multiply(&g.exp(&xs), &g.exp(&xt));
            match (lhs, rhs) {
                (GroupElement::Quaternion(a), GroupElement::Quaternion(b)) => {
                    for i in 0..4 {
                        prop_assert!((a[i] - b[i]).abs() < 1e-10);
                    }
                }
                _ => unreachable!(),
            }
        }

        #[test]
        fn lattice_window_closed(a in -2i64..=2, b in -2i64..=2, c in -2i64..=2, d in -2i64..=2) {
            // lattice closed under negation and addition on a finite window
            let g = GroupModel::torus(2, vec![1.0, 0.0, 0.0, 4.0], 1);
            let p = vec![a as f64, b as f64];
            let q = vec![c as f64, d as f64];
            let sum = vec![p[0] + q[0], p[1] + q[1]];
            let neg = vec![-p[0], -p[1]];
            for v in [sum, neg] {
                let (r, dist) = g.lattice_round(&v);
                prop_assert!(dist < 1e-12);
                prop_assert!((r[0] - v[0]).abs() < 1e-12 && (r[1] - v[1]).abs() < 1e-12);
            }
        }
    }
}
