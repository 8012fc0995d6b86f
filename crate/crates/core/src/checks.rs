//! Runtime invariant suite behind the `check` command: every module's
//! invariants executed against a configured model, with one named result
//! per invariant.

use crate::bundle::BundleModel;
use crate::gauge;
use crate::liegroup::GroupModel;
use crate::loopspace::LoopSpace;
use crate::scalar::dot;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// Worst observed defect (compared against `tolerance`).
    pub defect: f64,
    pub tolerance: f64,
}

fn result(name: &str, defect: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        pass: defect <= tolerance,
        defect,
        tolerance,
    }
}

/// Run the group-kernel invariants on an explicit group instance.
pub fn group_checks(group: &GroupModel, seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = group.dim();
    let mut out = Vec::new();

    // positivity of the inner product
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let nx = group.inner(&x, &x);
        let scale = x.iter().map(|v| v * v).sum::<f64>();
        if scale > 1e-12 {
            worst = worst.max((-nx).max(0.0) / scale);
        }
        // symmetry defect folded in
        let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        worst = worst.max((group.inner(&x, &y) - group.inner(&y, &x)).abs());
    }
    out.push(result("group.inner_positive_symmetric", worst, 1e-12));

    // Ad-invariance of the metric
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let g = group.exp(&w);
        let lhs = group.inner(&group.ad(&g, &x), &group.ad(&g, &y));
        worst = worst.max((lhs - group.inner(&x, &y)).abs());
    }
    out.push(result("group.ad_invariance", worst, 1e-12));

    // one-parameter subgroup property
    let mut worst: f64 = 0.0;
    for _ in 0..30 {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let (s, t) = (rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        let xs: Vec<f64> = x.iter().map(|v| s * v).collect();
        let xt: Vec<f64> = x.iter().map(|v| t * v).collect();
        let xst: Vec<f64> = x.iter().map(|v| (s + t) * v).collect();
        let prod = group.multiply(&group.exp(&xs), &group.exp(&xt));
        let inv = group.multiply(&prod, &group.inverse(&group.exp(&xst)));
        let defect = if group.is_identity(&inv, 1e-10) { 0.0 } else { 1.0 };
        worst = worst.max(defect);
    }
    out.push(result("group.one_parameter_subgroup", worst, 0.5));

    // center projection is orthogonal and Z is central
    let mut worst: f64 = 0.0;
    for _ in 0..30 {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let px = group.center_project(&x);
        let ppx = group.center_project(&px);
        for i in 0..d {
            worst = worst.max((px[i] - ppx[i]).abs());
        }
        let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let py = group.center_project(&y);
        let rest: Vec<f64> = y.iter().zip(&py).map(|(a, b)| a - b).collect();
        worst = worst.max(group.inner(&px, &rest).abs());
    }
    if let Some(z) = &group.z {
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            let b = group.bracket(z, &e);
            worst = worst.max(group.norm(&b));
        }
        worst = worst.max((group.inner(z, z) - 1.0).abs());
    }
    out.push(result("group.center_projection", worst, 1e-12));

    // lattice arithmetic on a window
    let mut worst: f64 = 0.0;
    if !group.lattice_generators().is_empty() {
        let r = group.lattice_generators().len();
        for _ in 0..30 {
            let coef: Vec<i64> = (0..r).map(|_| rng.gen_range(-2..3)).collect();
            let mut v = vec![0.0; d];
            for (i, c) in coef.iter().enumerate() {
                for (k, g) in group.lattice_generators()[i].iter().enumerate() {
                    v[k] += *c as f64 * g;
                }
            }
            let (_, dist) = group.lattice_round(&v);
            worst = worst.max(dist);
            let neg: Vec<f64> = v.iter().map(|c| -c).collect();
            let (_, dist) = group.lattice_round(&neg);
            worst = worst.max(dist);
        }
    }
    out.push(result("group.lattice_closure", worst, 1e-12));
    out
}

/// The full invariant suite at a bundle model.
pub fn run_all(model: &BundleModel, n: usize, seed: u64) -> Vec<CheckResult> {
    let mut out = group_checks(model.group(), seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let amb = model.ambient_dim();
    let random_tangent = |model: &BundleModel, q: &[f64], rng: &mut ChaCha8Rng| -> Vec<f64> {
        let raw: Vec<f64> = (0..q.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        model.tangent_project(q, &raw)
    };

    // connection normalization and horizontal kernel
    let mut worst: f64 = 0.0;
    for _ in 0..40 {
        let q = model.random_point(&mut rng);
        let x = [rng.gen_range(-2.0..2.0)];
        let f = model.fundamental_field(&x, &q);
        worst = worst.max((model.connection(&q, &f)[0] - x[0]).abs());
        let v = random_tangent(model, &q, &mut rng);
        let h = model.horizontal_project(&q, &v);
        worst = worst.max(model.connection(&q, &h)[0].abs());
    }
    out.push(result("bundle.connection_normalization", worst, 1e-10));

    // metric invariance and fiber isometry
    let mut worst: f64 = 0.0;
    for _ in 0..40 {
        let q = model.random_point(&mut rng);
        let u = random_tangent(model, &q, &mut rng);
        let v = random_tangent(model, &q, &mut rng);
        let g = [rng.gen::<f64>()];
        let lhs = model.metric(
            &model.act(&g, &q),
            &model.act_linear(&g, &u),
            &model.act_linear(&g, &v),
        );
        worst = worst.max((lhs - model.metric(&q, &u, &v)).abs());
        let x = [rng.gen_range(-2.0..2.0)];
        let y = [rng.gen_range(-2.0..2.0)];
        let fx = model.fundamental_field(&x, &q);
        let fy = model.fundamental_field(&y, &q);
        worst = worst.max((model.metric(&q, &fx, &fy) - x[0] * y[0]).abs());
    }
    out.push(result("bundle.metric_invariance_isometry", worst, 1e-10));

    // antisymmetry of (u,v) ↦ <u, ∇_v X̲>
    let mut worst: f64 = 0.0;
    for _ in 0..25 {
        let q = model.random_point(&mut rng);
        let u = random_tangent(model, &q, &mut rng);
        let v = random_tangent(model, &q, &mut rng);
        let x = [rng.gen_range(-1.0..1.0)];
        let field = |p: &[f64]| model.fundamental_field(&x, p);
        let nvx = model.covariant_derivative(&q, &v, field);
        let nux = model.covariant_derivative(&q, &u, field);
        worst = worst.max((model.metric(&q, &u, &nvx) + model.metric(&q, &v, &nux)).abs());
    }
    out.push(result("bundle.nabla_antisymmetry", worst, 1e-6));

    // curvature identity on horizontal pairs + mixed vanishing
    let mut worst: f64 = 0.0;
    for _ in 0..25 {
        let q = model.random_point(&mut rng);
        let x = [rng.gen_range(-1.0..1.0)];
        let u = model.horizontal_project(&q, &random_tangent(model, &q, &mut rng));
        let v = model.horizontal_project(&q, &random_tangent(model, &q, &mut rng));
        let field = |p: &[f64]| model.fundamental_field(&x, p);
        let lhs = model.curvature_sigma(&x, &q, &u, &v);
        let nvx = model.covariant_derivative(&q, &v, field);
        worst = worst.max((lhs + 2.0 * model.metric(&q, &u, &nvx)).abs());
        let w = model.fundamental_field(&[rng.gen_range(-1.0..1.0)], &q);
        worst = worst.max(model.curvature_sigma(&x, &q, &u, &w).abs());
    }
    out.push(result("bundle.curvature_identity", worst, 1e-6));

    // chart sigma consistency and chart isometry
    let mut worst_sigma: f64 = 0.0;
    let mut worst_iso: f64 = 0.0;
    let z = model.z().to_vec();
    let mut tested = 0;
    while tested < 25 {
        let q = model.random_point(&mut rng);
        let Ok((chart, w)) = model.project_to_base(&q) else {
            continue;
        };
        let u = random_tangent(model, &q, &mut rng);
        let v = random_tangent(model, &q, &mut rng);
        let Some(jac) = model.chart_jacobian(chart, &q) else {
            continue;
        };
        let ju = [dot(&jac[0], &u), dot(&jac[1], &u)];
        let jv = [dot(&jac[0], &v), dot(&jac[1], &v)];
        let rhs = model.chart_sigma(chart, w) * (ju[0] * jv[1] - ju[1] * jv[0]);
        worst_sigma = worst_sigma.max((model.curvature_sigma(&z, &q, &u, &v) - rhs).abs());
        let hu = model.horizontal_project(&q, &u);
        let jh = [dot(&jac[0], &hu), dot(&jac[1], &hu)];
        let g = model.chart_metric(chart, w);
        let down = jh[0] * jh[0] * g[0][0] + 2.0 * jh[0] * jh[1] * g[0][1] + jh[1] * jh[1] * g[1][1];
        worst_iso = worst_iso.max((model.metric(&q, &hu, &hu) - down).abs());
        tested += 1;
    }
    out.push(result("bundle.chart_sigma_consistency", worst_sigma, 1e-6));
    out.push(result("bundle.chart_isometry", worst_iso, 1e-8));

    // loop functional gradients against finite differences
    let ls = LoopSpace::new(model, n.min(48));
    let mut worst: f64 = 0.0;
    let k = 1.1;
    for _ in 0..5 {
        let config = ls.random_config(&mut rng, 4, 0.25);
        let dir = ls.random_tangent(&config, &mut rng, 4);
        let h = 1e-6;
        let fd = (ls.action_sk(&ls.retract_config(&config, &dir, h), k).unwrap()
            - ls.action_sk(&ls.retract_config(&config, &dir, -h), k).unwrap())
            / (2.0 * h);
        let an = ls.inner(&config, &ls.grad_sk(&config, k).unwrap(), &dir);
        worst = worst.max((fd - an).abs() / fd.abs().max(an.abs()).max(1e-8));
        let mut dir_e = dir.clone();
        dir_e.dt = 0.0;
        let fd = (ls.action_e(&ls.retract_config(&config, &dir_e, h))
            - ls.action_e(&ls.retract_config(&config, &dir_e, -h)))
            / (2.0 * h);
        let an = ls.inner(&config, &ls.grad_e(&config).unwrap(), &dir_e);
        worst = worst.max((fd - an).abs() / fd.abs().max(an.abs()).max(1e-8));
    }
    out.push(result("loop.gradient_vs_finite_differences", worst, 1e-6));

    // exact discrete vertical elements (on a stabilized point)
    let q0 = match model {
        BundleModel::Weighted(_) => vec![1.0, 0.0, 0.0, 0.0],
        BundleModel::Product(m) => m.from_angles([0.2, 0.4, 0.1]),
    };
    let x_lat = match model {
        BundleModel::Weighted(m) => vec![1.0 / m.p as f64],
        BundleModel::Product(_) => vec![1.0],
    };
    let defect = match ls.vertical_element(&x_lat, &q0, 0.5) {
        Ok(v) => ls.vertical_residual(&v),
        Err(_) => 1.0,
    };
    out.push(result("loop.vertical_exactness", defect, 1e-12));

    // gauge level shift and delta homomorphism
    let mut worst: f64 = 0.0;
    for _ in 0..6 {
        let config = ls.random_config(&mut rng, 4, 0.2);
        let rho = gauge::GaugeTransformation::linear(ls.n(), &[1.0], rng.gen_range(-2..3));
        let out_cfg = gauge::apply(&ls, &rho, &config).unwrap();
        let s0 = ls.action_sk(&config, k).unwrap();
        let s1 = ls.action_sk(&out_cfg, k).unwrap();
        worst = worst.max((s1 - s0 - gauge::delta(&ls, &rho)).abs());
    }
    out.push(result("gauge.level_shift", worst, 1e-8));

    // gauge normalization bound
    let mut worst: f64 = 0.0;
    for _ in 0..6 {
        let config = ls.random_config(&mut rng, 4, 0.3);
        let mean = ls.phi_mean(&config);
        let (x, _) = model.group().lattice_round(&mean);
        let (_, gauged) = gauge::gauge_normalize(&ls, &config).unwrap();
        let bound = model
            .group()
            .norm(&x.iter().zip(&mean).map(|(a, b)| a - b).collect::<Vec<_>>());
        for i in 0..gauged.n {
            let v = model.group().norm(&gauged.phi[i..i + 1]);
            worst = worst.max((v - bound).max(0.0));
        }
    }
    out.push(result("gauge.normalization_bound", worst, 1e-10));

    out
}

/// Serialize results as a JSON array.
pub fn results_to_json(results: &[CheckResult]) -> String {
    serde_json::to_string_pretty(results).expect("check results serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_models_pass_the_suite() {
        for model in [
            BundleModel::hopf(),
            BundleModel::spindle(2, 3).unwrap(),
            BundleModel::exact_product(1.3),
        ] {
            let results = run_all(&model, 32, 7);
            for r in &results {
                assert!(
                    r.pass,
                    "{} failed on {}: defect {:.3e} > {:.3e}",
                    r.name,
                    model.name(),
                    r.defect,
                    r.tolerance
                );
            }
        }
    }

    #[test]
    fn corrupted_metric_is_caught() {
        // negative control: a deliberately broken inner-product matrix must
        // fail a named invariant
        let broken = GroupModel::torus(2, vec![1.0, 0.5, -0.5, -4.0], 1);
        let results = group_checks(&broken, 3);
        let bad = results
            .iter()
            .find(|r| r.name == "group.inner_positive_symmetric")
            .unwrap();
        assert!(!bad.pass);
    }
}
