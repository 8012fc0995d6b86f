//! Damped Newton (Levenberg–Marquardt) polishing of near-critical
//! configurations.
//!
//! The unknowns are tangent coordinates: per-node tangent-basis components
//! of the position strand, the algebra strand, and (for `S_k`) the period.
//! The residual is the euclidean differential of the functional expressed
//! in those coordinates; its Jacobian (the Hessian of the pullback) is
//! assembled by central differences of the analytic differential, so no
//! second derivatives of the models are needed.  Steps are projected
//! orthogonal to the discrete gauge-orbit tangents, whose directions
//! `(β̲(γ), -Dβ, 0)` span the exact null space of the Hessian.

use super::Functional;
use crate::error::{CoreError, Result};
use crate::loopspace::{LoopConfiguration, LoopSpace};
use nalgebra::{DMatrix, DVector};

const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct NewtonReport {
    pub config: LoopConfiguration,
    pub grad_norm: f64,
    pub iterations: usize,
    /// Riemannian gradient norm after each accepted step.
    pub residual_trace: Vec<f64>,
    /// Worst cosine between an accepted step and a gauge direction.
    pub gauge_overlap: f64,
}

struct Coords<'a, 'b> {
    ls: &'a LoopSpace<'b>,
    functional: Functional,
    bases: Vec<Vec<Vec<f64>>>,
    anchor: LoopConfiguration,
    tdim: usize,
    alg: usize,
    amb: usize,
}

impl<'a, 'b> Coords<'a, 'b> {
    fn new(ls: &'a LoopSpace<'b>, functional: Functional, anchor: LoopConfiguration) -> Self {
        let amb = ls.ambient_dim();
        let bases = (0..anchor.n)
            .map(|i| ls.model.tangent_basis(&anchor.gamma[i * amb..(i + 1) * amb]))
            .collect::<Vec<_>>();
        let tdim = bases[0].len();
        Self {
            ls,
            functional,
            bases,
            anchor,
            tdim,
            alg: ls.alg_dim(),
            amb,
        }
    }

    fn dim(&self) -> usize {
        let n = self.anchor.n;
        n * self.tdim + n * self.alg + usize::from(self.functional.uses_period())
    }

    fn displace(&self, s: &DVector<f64>) -> LoopConfiguration {
        let n = self.anchor.n;
        let mut config = self.anchor.clone();
        for i in 0..n {
            let mut x = self.anchor.gamma[i * self.amb..(i + 1) * self.amb].to_vec();
            for a in 0..self.tdim {
                let c = s[i * self.tdim + a];
                for (xc, bc) in x.iter_mut().zip(&self.bases[i][a]) {
                    *xc += c * bc;
                }
            }
            let r = self.ls.model.retract(&x);
            config.gamma[i * self.amb..(i + 1) * self.amb].copy_from_slice(&r);
        }
        let phi_off = n * self.tdim;
        for j in 0..n * self.alg {
            config.phi[j] += s[phi_off + j];
        }
        if self.functional.uses_period() {
            config.t += s[self.dim() - 1];
        }
        config
    }

    /// Differential components in the anchored tangent frame.
    fn residual(&self, config: &LoopConfiguration) -> Result<DVector<f64>> {
        let raw = match self.functional {
            Functional::Sk { k } => self.ls.raw_sk(config, k)?,
            Functional::Energy => self.ls.raw_e(config)?,
        };
        let n = config.n;
        let mut r = DVector::zeros(self.dim());
        for i in 0..n {
            for a in 0..self.tdim {
                let mut acc = 0.0;
                for c in 0..self.amb {
                    acc += self.bases[i][a][c] * raw.dgamma[i * self.amb + c];
                }
                r[i * self.tdim + a] = acc;
            }
        }
        let phi_off = n * self.tdim;
        for j in 0..n * self.alg {
            r[phi_off + j] = raw.dphi[j];
        }
        if self.functional.uses_period() {
            r[self.dim() - 1] = raw.dt;
        }
        Ok(r)
    }

    /// Hessian of the pullback by central differences of the differential.
    fn hessian(&self) -> Result<DMatrix<f64>> {
        let dim = self.dim();
        let mut h = DMatrix::zeros(dim, dim);
        let mut s = DVector::zeros(dim);
        for j in 0..dim {
            s[j] = FD_STEP;
            let rp = self.residual(&self.displace(&s))?;
            s[j] = -FD_STEP;
            let rm = self.residual(&self.displace(&s))?;
            s[j] = 0.0;
            for i in 0..dim {
                h[(i, j)] = (rp[i] - rm[i]) / (2.0 * FD_STEP);
            }
        }
        // symmetrize away the finite-difference noise
        let ht = h.transpose();
        Ok((h + ht) * 0.5)
    }

    /// Discrete gauge-orbit tangents in the anchored coordinates.
    fn gauge_directions(&self) -> DMatrix<f64> {
        let n = self.anchor.n;
        let dim = self.dim();
        let cols = n * self.alg;
        let mut v = DMatrix::zeros(dim, cols);
        // γ-part: β_j^a ↦ fundamental field of e_a at node j
        for j in 0..n {
            let q = &self.anchor.gamma[j * self.amb..(j + 1) * self.amb];
            for a in 0..self.alg {
                let mut e = vec![0.0; self.alg];
                e[a] = 1.0;
                let f = self.ls.model.fundamental_field(&e, q);
                let col = j * self.alg + a;
                for b in 0..self.tdim {
                    let mut acc = 0.0;
                    for c in 0..self.amb {
                        acc += self.bases[j][b][c] * f[c];
                    }
                    v[(j * self.tdim + b, col)] = acc;
                }
            }
        }
        // φ-part: -(Dβ); β the delta strand at node j
        let phi_off = n * self.tdim;
        for j in 0..n {
            for a in 0..self.alg {
                let col = j * self.alg + a;
                let mut strand = vec![0.0; n];
                strand[j] = 1.0;
                let d = self.ls.ops.derivative(&strand);
                for i in 0..n {
                    v[(phi_off + i * self.alg + a, col)] = -d[i];
                }
            }
        }
        v
    }
}

/// Polish a near-critical configuration to `|grad| ≤ tol`.
pub fn newton_polish(
    ls: &LoopSpace,
    functional: Functional,
    config: &LoopConfiguration,
    tol: f64,
    max_iter: usize,
) -> Result<NewtonReport> {
    let grad = functional.gradient(ls, config)?;
    let mut grad_norm = ls.norm(config, &grad);
    let mut current = config.clone();
    let mut trace = vec![grad_norm];
    let mut gauge_overlap: f64 = 0.0;
    if grad_norm <= tol {
        return Ok(NewtonReport {
            config: current,
            grad_norm,
            iterations: 0,
            residual_trace: trace,
            gauge_overlap,
        });
    }
    let mut lambda = 1e-6;
    for iter in 0..max_iter {
        let coords = Coords::new(ls, functional, current.clone());
        let r = coords.residual(&current)?;
        let h = coords.hessian()?;
        let gauge = coords.gauge_directions();
        // precompute the projector data onto the gauge complement
        let vtv = gauge.transpose() * &gauge;
        let vtv_chol = vtv
            .cholesky()
            .ok_or(CoreError::SingularJacobian)?;
        let project = |s: &DVector<f64>| -> DVector<f64> {
            let beta = vtv_chol.solve(&(gauge.transpose() * s));
            s - &gauge * beta
        };

        let hth = h.transpose() * &h;
        let htr = h.transpose() * &r;
        let mut improved = false;
        for _ in 0..12 {
            let mut m = hth.clone();
            for i in 0..m.nrows() {
                m[(i, i)] += lambda;
            }
            let Some(chol) = m.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = project(&(-chol.solve(&htr)));
            let cand = coords.displace(&step);
            if cand.t <= 0.0 && functional.uses_period() {
                lambda *= 10.0;
                continue;
            }
            let cand_grad = functional.gradient(ls, &cand)?;
            let cand_norm = ls.norm(&cand, &cand_grad);
            if cand_norm < grad_norm {
                // record the worst remaining overlap with gauge directions
                let step_norm = step.norm();
                if step_norm > 0.0 {
                    let overlap = (gauge.transpose() * &step).norm() / step_norm;
                    gauge_overlap = gauge_overlap.max(overlap);
                }
                current = cand;
                grad_norm = cand_norm;
                trace.push(grad_norm);
                lambda = (lambda / 5.0).max(1e-14);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            if grad_norm <= tol {
                break;
            }
            return Err(CoreError::SingularJacobian);
        }
        if grad_norm <= tol {
            return Ok(NewtonReport {
                config: current,
                grad_norm,
                iterations: iter + 1,
                residual_trace: trace,
                gauge_overlap,
            });
        }
    }
    if grad_norm <= tol {
        Ok(NewtonReport {
            iterations: trace.len() - 1,
            config: current,
            grad_norm,
            residual_trace: trace,
            gauge_overlap,
        })
    } else {
        Err(CoreError::SingularJacobian)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::BundleModel;
    use crate::solver::test_support::product_line_solution;
    use crate::solver::Functional;

    #[test]
    fn analytic_solution_is_discretely_critical() {
        let model = BundleModel::exact_product(0.0);
        let ls = LoopSpace::new(&model, 32);
        let k = 1.0;
        let sol = product_line_solution(&ls, k);
        let g = ls.grad_sk(&sol, k).unwrap();
        let norm = ls.norm(&sol, &g);
        assert!(norm < 1e-12, "gradient norm {} at analytic solution", norm);
        // already critical: polish returns it unchanged
        let rep = newton_polish(&ls, Functional::Sk { k }, &sol, 1e-8, 10).unwrap();
        assert_eq!(rep.iterations, 0);
        for (a, b) in rep.config.gamma.iter().zip(&sol.gamma) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn newton_recovers_perturbed_solution() {
        let model = BundleModel::exact_product(0.0);
        let ls = LoopSpace::new(&model, 24);
        let k = 1.0;
        let sol = product_line_solution(&ls, k);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
        let dir = ls.random_tangent(&sol, &mut rng, 3);
        let start = ls.retract_config(&sol, &dir, 3e-3);
        let rep = newton_polish(&ls, Functional::Sk { k }, &start, 1e-9, 40).unwrap();
        assert!(rep.grad_norm <= 1e-9);
        assert!(rep.gauge_overlap < 1e-8);
        // the Struwe-style period stays near the analytic one
        assert!((rep.config.t - sol.t).abs() < 0.05);
    }
}
