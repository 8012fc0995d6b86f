//! Discretized loop group `W^{1,2}(S¹, G)`, its action on configurations,
//! the level-shift functional `Δ_ρ`, gauge normalization, and
//! vertical-class detection.
//!
//! Gauge loops are stored through generating paths `η: [0,1] → g` with
//! `ρ(t) = exp(η(t))` and `η(1) - η(0)` in the unit lattice; for
//! disconnected or non-simply-connected `G` not every loop arises this way,
//! but these are the only ones the theory needs.  The action is
//!
//! ```text
//! ρ·(γ, φ, T) = (ρ γ, Ad_ρ(φ - η̇), T),
//! ```
//!
//! which coincides with `(ργ, Ad_ρ φ - ∂_tρ ρ^{-1}, T)` since
//! `∂_tρ ρ^{-1} = Ad_ρ η̇`.  The action level shifts by
//! `Δ_ρ = ⟨η(1) - η(0), Z⟩` and the kinetic term is invariant; with the
//! trigonometric discretization both identities are exact on band-limited
//! data.

use crate::error::{CoreError, Result};
use crate::fourier;
use crate::liegroup::LieAlgebraVector;
use crate::loopspace::{LoopConfiguration, LoopSpace};

/// A loop `ρ = exp(η)` sampled at the `n+1` nodes `t = 0, 1/n, …, 1`.
#[derive(Debug, Clone)]
pub struct GaugeTransformation {
    /// `(n+1) × alg_dim` node values of the generating path.
    pub eta: Vec<f64>,
    pub alg: usize,
}

impl GaugeTransformation {
    pub fn identity(n: usize, alg: usize) -> Self {
        Self {
            eta: vec![0.0; (n + 1) * alg],
            alg,
        }
    }

    /// Winding `η(1) - η(0)`; must lie in the unit lattice for `ρ` to close.
    pub fn winding(&self) -> LieAlgebraVector {
        let n = self.eta.len() / self.alg - 1;
        (0..self.alg)
            .map(|a| self.eta[n * self.alg + a] - self.eta[a])
            .collect()
    }

    pub fn nodes(&self) -> usize {
        self.eta.len() / self.alg - 1
    }

    /// The straight-winding family `ρ_m(t) = exp(m t X)`.
    pub fn linear(n: usize, x: &[f64], m: i64) -> Self {
        let alg = x.len();
        let mut eta = vec![0.0; (n + 1) * alg];
        for i in 0..=n {
            let t = i as f64 / n as f64;
            for a in 0..alg {
                eta[i * alg + a] = m as f64 * t * x[a];
            }
        }
        Self { eta, alg }
    }

    /// Pointwise product of gauge loops (abelian composition of paths).
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.eta.len(), other.eta.len());
        Self {
            eta: self
                .eta
                .iter()
                .zip(&other.eta)
                .map(|(a, b)| a + b)
                .collect(),
            alg: self.alg,
        }
    }

    /// `η̇` at the interior grid (winding part plus spectral derivative of
    /// the periodic part).
    pub fn eta_dot(&self, ops: &crate::fourier::DiffOps) -> Vec<f64> {
        let n = self.nodes();
        assert_eq!(ops.len(), n);
        let w = self.winding();
        let mut out = vec![0.0; n * self.alg];
        for a in 0..self.alg {
            let per: Vec<f64> = (0..n)
                .map(|i| self.eta[i * self.alg + a] - w[a] * i as f64 / n as f64)
                .collect();
            let d = ops.derivative(&per);
            for i in 0..n {
                out[i * self.alg + a] = w[a] + d[i];
            }
        }
        out
    }
}

/// Closure check: `exp(η(1) - η(0)) = e` within `tol`.
pub fn check_closure(ls: &LoopSpace, rho: &GaugeTransformation, tol: f64) -> Result<()> {
    let group = ls.model.group();
    let w = rho.winding();
    if !group.is_identity(&group.exp(&w), tol) {
        return Err(CoreError::Config(format!(
            "gauge loop does not close: winding {:?}",
            w
        )));
    }
    Ok(())
}

/// The gauge action `ρ·(γ, φ, T)`.
pub fn apply(
    ls: &LoopSpace,
    rho: &GaugeTransformation,
    config: &LoopConfiguration,
) -> Result<LoopConfiguration> {
    let n = config.n;
    if rho.nodes() != n {
        return Err(CoreError::MismatchedDiscretization {
            expected: n,
            got: rho.nodes(),
        });
    }
    let model = ls.model;
    let group = model.group();
    let amb = model.ambient_dim();
    let alg = ls.alg_dim();
    let eta_dot = rho.eta_dot(&ls.ops);
    let mut gamma = vec![0.0; n * amb];
    let mut phi = vec![0.0; n * alg];
    for i in 0..n {
        let eta_i = &rho.eta[i * alg..(i + 1) * alg];
        let q = &config.gamma[i * amb..(i + 1) * amb];
        gamma[i * amb..(i + 1) * amb].copy_from_slice(&model.act(eta_i, q));
        let diff: Vec<f64> = (0..alg)
            .map(|a| config.phi[i * alg + a] - eta_dot[i * alg + a])
            .collect();
        let ad = group.ad(&group.exp(eta_i), &diff);
        phi[i * alg..(i + 1) * alg].copy_from_slice(&ad);
    }
    Ok(LoopConfiguration {
        n,
        gamma,
        phi,
        t: config.t,
    })
}

/// Level shift `Δ_ρ = ⟨η(1) - η(0), Z⟩`.
pub fn delta(ls: &LoopSpace, rho: &GaugeTransformation) -> f64 {
    ls.model.group().inner(&rho.winding(), ls.model.z())
}

/// Gauge normalization: with `X = lattice_round(φ̄)` and
/// `η(t) = ∫₀ᵗ φ - t(φ̄ - X)`, the gauged `φ` is the constant `φ̄ - X`.
/// Returns the gauge loop and the normalized configuration.
pub fn gauge_normalize(
    ls: &LoopSpace,
    config: &LoopConfiguration,
) -> Result<(GaugeTransformation, LoopConfiguration)> {
    let n = config.n;
    let alg = ls.alg_dim();
    let group = ls.model.group();
    let mean = ls.phi_mean(config);
    let (x, _) = group.lattice_round(&mean);
    let mut eta = vec![0.0; (n + 1) * alg];
    for a in 0..alg {
        let strand: Vec<f64> = (0..n).map(|i| config.phi[i * alg + a]).collect();
        let (_, anti) = fourier::antiderivative_nodes(&strand);
        for i in 0..=n {
            let t = i as f64 / n as f64;
            eta[i * alg + a] = anti[i] + t * x[a];
        }
    }
    let rho = GaugeTransformation { eta, alg };
    let gauged = apply(ls, &rho, config)?;
    Ok((rho, gauged))
}

/// Vertical-component detection: if the vertical residual is below `delta`,
/// returns the lattice label `X` of the component `V_{δ,X}` together with
/// the distance `|p_z φ̄ - X|`.
pub fn detect_vertical_class(
    ls: &LoopSpace,
    config: &LoopConfiguration,
    delta: f64,
) -> Option<(LieAlgebraVector, f64)> {
    if ls.vertical_residual(config) >= delta {
        return None;
    }
    let mean = ls.phi_mean(config);
    let group = ls.model.group();
    Some(group.lattice_round(&group.center_project(&mean)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::BundleModel;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_gauge<R: Rng>(n: usize, rng: &mut R, winding: i64) -> GaugeTransformation {
        // gentle amplitudes and low frequencies keep the trigonometric
        // product rule exact to machine precision
        let modes = 3;
        let coeffs: Vec<(f64, f64)> = (1..=modes)
            .map(|_| (rng.gen_range(-0.12..0.12), rng.gen_range(-0.12..0.12)))
            .collect();
        let mut eta = vec![0.0; n + 1];
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let mut v = winding as f64 * t;
            for (m, (a, b)) in coeffs.iter().enumerate() {
                let ang = 2.0 * std::f64::consts::PI * (m + 1) as f64 * t;
                v += a * (ang.cos() - 1.0) + b * ang.sin();
            }
            eta[i] = v;
        }
        GaugeTransformation { eta, alg: 1 }
    }

    fn models() -> Vec<BundleModel> {
        vec![
            BundleModel::hopf(),
            BundleModel::spindle(2, 3).unwrap(),
            BundleModel::exact_product(1.3),
        ]
    }

    #[test]
    fn identity_gauge_fixes_configs() {
        let model = BundleModel::hopf();
        let ls = LoopSpace::new(&model, 32);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let config = ls.random_config(&mut rng, 4, 0.2);
        let id = GaugeTransformation::identity(32, 1);
        let out = apply(&ls, &id, &config).unwrap();
        for (a, b) in config.gamma.iter().zip(&out.gamma) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
        for (a, b) in config.phi.iter().zip(&out.phi) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn lattice_winding_rotates_and_shifts() {
        // ρ(t) = exp(tX), X ∈ Λ: γ rotated pointwise, φ shifted by -X
        let model = BundleModel::exact_product(0.7);
        let ls = LoopSpace::new(&model, 32);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let config = ls.random_config(&mut rng, 4, 0.2);
        let rho = GaugeTransformation::linear(32, &[1.0], 1);
        let out = apply(&ls, &rho, &config).unwrap();
        for i in 0..config.n {
            let t = i as f64 / config.n as f64;
            let q = &config.gamma[i * 6..(i + 1) * 6];
            let expect = model.act(&[t], q);
            for (a, b) in expect.iter().zip(&out.gamma[i * 6..(i + 1) * 6]) {
                assert_relative_eq!(a, b, epsilon = 1e-12);
            }
            assert_relative_eq!(out.phi[i], config.phi[i] - 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn group_action_law_through_generating_paths() {
        let model = BundleModel::spindle(2, 3).unwrap();
        let ls = LoopSpace::new(&model, 48);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let config = ls.random_config(&mut rng, 4, 0.2);
        let r1 = random_gauge(48, &mut rng, 1);
        let r2 = random_gauge(48, &mut rng, -1);
        let seq = apply(&ls, &r1, &apply(&ls, &r2, &config).unwrap()).unwrap();
        let joint = apply(&ls, &r1.compose(&r2), &config).unwrap();
        for (a, b) in seq.gamma.iter().zip(&joint.gamma) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
        for (a, b) in seq.phi.iter().zip(&joint.phi) {
            assert_relative_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn level_shift_identity_and_kinetic_invariance() {
        let k = 1.2;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for model in models() {
            let ls = LoopSpace::new(&model, 64);
            for _ in 0..10 {
                let config = ls.random_config(&mut rng, 4, 0.2);
                let rho = random_gauge(64, &mut rng, rng.gen_range(-2..3));
                check_closure(&ls, &rho, 1e-10).unwrap();
                let out = apply(&ls, &rho, &config).unwrap();
                let s0 = ls.action_sk(&config, k).unwrap();
                let s1 = ls.action_sk(&out, k).unwrap();
                let d = delta(&ls, &rho);
                assert!(
                    (s1 - s0 - d).abs() < 1e-8,
                    "level shift defect {:.3e} on {}",
                    (s1 - s0 - d).abs(),
                    model.name()
                );
                // vertical residual is gauge invariant
                assert!(
                    (ls.vertical_residual(&out) - ls.vertical_residual(&config)).abs() < 1e-8
                );
            }
        }
    }

    #[test]
    fn unboundedness_witness_integer_family() {
        // S_k(ρ_m · x) - S_k(x) = m⟨X,Z⟩ to 1e-10 with exp(X) = e
        let model = BundleModel::hopf();
        let ls = LoopSpace::new(&model, 64);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let config = ls.random_config(&mut rng, 4, 0.2);
        let k = 0.9;
        let s0 = ls.action_sk(&config, k).unwrap();
        for m in [-3i64, -1, 1, 2, 5] {
            let rho = GaugeTransformation::linear(64, &[1.0], m);
            let out = apply(&ls, &rho, &config).unwrap();
            let s1 = ls.action_sk(&out, k).unwrap();
            assert!(
                (s1 - s0 - m as f64).abs() < 1e-10,
                "integer shift defect {:.3e} at m = {}",
                (s1 - s0 - m as f64).abs(),
                m
            );
        }
    }

    #[test]
    fn delta_is_a_homomorphism() {
        let model = BundleModel::hopf();
        let ls = LoopSpace::new(&model, 32);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let r1 = random_gauge(32, &mut rng, rng.gen_range(-3..4));
            let r2 = random_gauge(32, &mut rng, rng.gen_range(-3..4));
            let lhs = delta(&ls, &r1.compose(&r2));
            let rhs = delta(&ls, &r1) + delta(&ls, &r2);
            assert_relative_eq!(lhs, rhs, epsilon = 1e-10);
        }
    }

    #[test]
    fn normalization_examples() {
        let model = BundleModel::exact_product(0.5);
        let ls = LoopSpace::new(&model, 32);
        let mut rng = ChaCha8Rng::seed_from_u64(7);

        // φ ≡ 0: identity gauge, config unchanged
        let q0 = model.random_point(&mut rng);
        let config = ls.constant_loop(&q0, 1.0);
        let (rho, out) = gauge_normalize(&ls, &config).unwrap();
        assert!(rho.eta.iter().all(|v| v.abs() < 1e-14));
        assert_eq!(out.gamma, config.gamma);

        // constant φ ≡ 2.3 on the unit circle lattice: X = 2, gauged φ ≡ 0.3
        let mut config = ls.constant_loop(&q0, 1.0);
        for v in config.phi.iter_mut() {
            *v = 2.3;
        }
        let (rho, out) = gauge_normalize(&ls, &config).unwrap();
        assert_relative_eq!(rho.winding()[0], 2.0, epsilon = 1e-12);
        for v in &out.phi {
            assert_relative_eq!(*v, 0.3, epsilon = 1e-12);
        }

        // random config: gauged φ is the constant φ̄ - X, and the
        // admissibility bound |Δ_ρ| ≤ |X - φ̄| + |⟨φ̄,Z⟩| holds
        let config = ls.random_config(&mut rng, 4, 0.3);
        let mean = ls.phi_mean(&config)[0];
        let (rho, out) = gauge_normalize(&ls, &config).unwrap();
        let group = model.group();
        let (x, _) = group.lattice_round(&[mean]);
        let bound = (x[0] - mean).abs();
        for v in &out.phi {
            assert_relative_eq!(*v, mean - x[0], epsilon = 1e-10);
            assert!(v.abs() <= bound + 1e-10);
        }
        let d = delta(&ls, &rho);
        assert!(d.abs() <= (x[0] - mean).abs() + mean.abs() + 1e-12);
        // level shift still exact under the normalizing gauge
        let k = 1.1;
        let s0 = ls.action_sk(&config, k).unwrap();
        let s1 = ls.action_sk(&out, k).unwrap();
        assert!((s1 - s0 - d).abs() < 1e-9);
    }

    #[test]
    fn vertical_class_detection() {
        let model = BundleModel::spindle(2, 3).unwrap();
        let ls = LoopSpace::new(&model, 64);
        let delta_v = 1e-3;

        // exact vertical element at the order-2 pole
        let pole = vec![1.0, 0.0, 0.0, 0.0];
        let v = ls.vertical_element(&[0.5], &pole, 0.3).unwrap();
        let (x, dist) = detect_vertical_class(&ls, &v, delta_v).unwrap();
        assert_relative_eq!(x[0], 0.5, epsilon = 1e-12);
        assert!(dist < 1e-12);

        // constant loop with small φ: component 0 at distance |φ|
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let q0 = model.random_point(&mut rng);
        let mut c = ls.constant_loop(&q0, 0.5);
        for v in c.phi.iter_mut() {
            *v = 0.01;
        }
        let (x, dist) = detect_vertical_class(&ls, &c, delta_v).unwrap();
        assert_relative_eq!(x[0], 0.0);
        assert_relative_eq!(dist, 0.01, epsilon = 1e-12);

        // far-from-vertical: no detection
        let c = ls.random_config(&mut rng, 4, 0.4);
        if ls.vertical_residual(&c) >= delta_v {
            assert!(detect_vertical_class(&ls, &c, delta_v).is_none());
        }

        // dichotomy: sampled members of V_δ are within sqrt(δ) of a lattice
        // point, never in the gap
        let gap = model.group().lattice_gap().unwrap();
        for _ in 0..20 {
            let amp = rng.gen_range(0.0..0.9) * delta_v.sqrt();
            let mut cfg = ls.vertical_element(&[0.5], &pole, 0.4).unwrap();
            for v in cfg.phi.iter_mut() {
                *v += amp / 2.0;
            }
            if ls.vertical_residual(&cfg) < delta_v {
                let (x, dist) = detect_vertical_class(&ls, &cfg, delta_v).unwrap();
                assert!(dist < delta_v.sqrt());
                assert!(dist < gap / 2.0);
                assert_relative_eq!(x[0], 0.5, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn boundary_level_bound() {
        // sampled points of ∂V_{δ,X} satisfy
        // S_k ≥ ⟨X,Z⟩ + sqrt(2δk) - sqrt(δ) - 1e-6
        let model = BundleModel::spindle(2, 3).unwrap();
        let ls = LoopSpace::new(&model, 64);
        let delta_v = 1e-3;
        let k = 1.0;
        let pole = vec![1.0, 0.0, 0.0, 0.0];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..15 {
            let t = rng.gen_range(0.05..2.0);
            let base = ls.vertical_element(&[0.5], &pole, t).unwrap();
            let dir = ls.random_tangent(&base, &mut rng, 4);
            // bisect the perturbation amplitude to land on the boundary
            let mut lo = 0.0;
            let mut hi = 1.0;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let cand = ls.retract_config(&base, &dir, mid);
                if ls.vertical_residual(&cand) < delta_v {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let sample = ls.retract_config(&base, &dir, 0.5 * (lo + hi));
            let res = ls.vertical_residual(&sample);
            assert_relative_eq!(res, delta_v, max_relative = 1e-3);
            let s = ls.action_sk(&sample, k).unwrap();
            let bound = 0.5 + (2.0 * delta_v * k).sqrt() - delta_v.sqrt() - 1e-6;
            assert!(
                s >= bound,
                "boundary bound violated: S = {:.6}, bound = {:.6}",
                s,
                bound
            );
        }
    }
}
