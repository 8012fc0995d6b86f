//! Cotangent-side machinery: moment map, reduction map `Π`, constrained
//! geodesic flow on `T*Q`, chart magnetic flow on `T*M`, the constrained
//! geodesic rescaling, and the Rabinowitz-type action diagnostic.
//!
//! Covectors are stored as tangent vectors through the musical isomorphism
//! of `g_Q`; the moment map is then `A(q,v) = θ_q(v)` by the
//! fundamental-field isometry.  The geodesic integrator is a variational
//! midpoint RATTLE scheme on the ambient representation: the discrete
//! Lagrangian `L_d(a,b) = (h/2) v^T G(m) v`, `v = (b-a)/h`, `m = (a+b)/2`,
//! is invariant under the (linear, ambient-orthogonal) group actions, so
//! the discrete momentum map is conserved to solver tolerance; energy is
//! near-preserved by symplecticity.

use crate::bundle::{chart_christoffel_at, BundleModel, ChartId};
use crate::error::{CoreError, Result};
use crate::fourier::DiffOps;
use crate::liegroup::LieAlgebraVector;
use crate::loopspace::solve_spd;
use crate::scalar::{Dual, Scalar};

/// Point of `T*Q` in the musical representation.
#[derive(Debug, Clone)]
pub struct CotangentState {
    pub q: Vec<f64>,
    /// Tangent representative of the covector.
    pub v: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CotangentState>,
    pub energy: Vec<f64>,
    pub moment: Vec<LieAlgebraVector>,
}

/// Kinetic energy `H = ½ g_Q(v, v)`.
pub fn hamiltonian(model: &BundleModel, state: &CotangentState) -> f64 {
    0.5 * model.metric(&state.q, &state.v, &state.v)
}

/// Moment map `A(q,p)(X) = ⟨p, X̲⟩`, expressed in the algebra through the
/// Ad-invariant metric; equals `θ(v)` in the musical representation.
pub fn moment_map(model: &BundleModel, state: &CotangentState) -> LieAlgebraVector {
    model.connection(&state.q, &state.v)
}

/// Reduction `Π: A^{-1}(Z) → T*M` in chart-cotangent coordinates:
/// `⟨Π(q,p), dτ(w)⟩ = ⟨p, w⟩ - ⟨Z, θ(w)⟩`, evaluated on horizontal lifts of
/// the chart basis (where the `θ`-term drops).
pub fn reduction_pi(
    model: &BundleModel,
    state: &CotangentState,
) -> Result<(ChartId, [f64; 2], [f64; 2])> {
    let a = moment_map(model, state);
    let z = model.z();
    let defect: f64 = a
        .iter()
        .zip(z)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    if defect > 1e-8 {
        return Err(CoreError::MomentConstraintViolated(defect));
    }
    let (chart, w) = model.project_to_base(&state.q)?;
    let mut covector = [0.0; 2];
    for (slot, cov) in covector.iter_mut().enumerate() {
        let mut e = [0.0; 2];
        e[slot] = 1.0;
        let lift = model
            .horizontal_lift(chart, &state.q, e)
            .ok_or_else(|| CoreError::ChartNotFound("horizontal lift failed".into()))?;
        *cov = model.metric(&state.q, &state.v, &lift);
    }
    Ok((chart, w, covector))
}

/// Ambient covector `p = G(q) v`.
fn musical_flat(model: &BundleModel, q: &[f64], v: &[f64]) -> Vec<f64> {
    let n = model.ambient_dim();
    (0..n)
        .map(|c| {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            model.metric(q, v, &e)
        })
        .collect()
}

/// Tangent solve of `G(q) v = p` restricted to `T_q Q`.
fn musical_sharp(model: &BundleModel, q: &[f64], p: &[f64]) -> Vec<f64> {
    let basis = model.tangent_basis(q);
    let dim = basis.len();
    let mut gram = vec![0.0; dim * dim];
    let mut rhs = vec![0.0; dim];
    for a in 0..dim {
        for b in 0..=a {
            let g = model.metric(q, &basis[a], &basis[b]);
            gram[a * dim + b] = g;
            gram[b * dim + a] = g;
        }
        rhs[a] = basis[a].iter().zip(p).map(|(x, y)| x * y).sum();
    }
    let alpha = solve_spd(&gram, &rhs, dim);
    let n = model.ambient_dim();
    (0..n)
        .map(|c| (0..dim).map(|a| alpha[a] * basis[a][c]).sum())
        .collect()
}

/// `W(m, v) = ∇_m (v^T G(m) v)` by dual numbers.
fn metric_gradient(model: &BundleModel, m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = model.ambient_dim();
    (0..n)
        .map(|c| {
            let md: Vec<Dual> = (0..n)
                .map(|j| Dual::new(m[j], if j == c { 1.0 } else { 0.0 }))
                .collect();
            let vd: Vec<Dual> = v.iter().map(|x| Dual::constant(*x)).collect();
            model.metric(&md, &vd, &vd).d
        })
        .collect()
}

/// One RATTLE step: given `(x_k, p_k)` solve
/// `p_k = G(m)v - (h/4)W(m,v) - C(x_k)^T λ`, `c(x_{k+1}) = 0`
/// for `x_{k+1}`, then `p_{k+1} = G(m)v + (h/4)W(m,v)` projected to the
/// admissible momentum space.
fn rattle_step(
    model: &BundleModel,
    x: &[f64],
    p: &[f64],
    v_guess: &[f64],
    h: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = model.ambient_dim();
    let ncon = model.constraints(x).len();
    let dim = n + ncon;
    // unknowns y = (x_{k+1}, λ)
    let mut y = vec![0.0; dim];
    for c in 0..n {
        y[c] = x[c] + h * v_guess[c];
    }
    let init = model.retract(&y[0..n].to_vec());
    y[0..n].copy_from_slice(&init);
    // constraint gradients at x_k (ambient rows)
    let con_jac_at_x: Vec<Vec<f64>> = {
        (0..ncon)
            .map(|r| {
                (0..n)
                    .map(|c| {
                        let xd: Vec<Dual> = (0..n)
                            .map(|j| Dual::new(x[j], if j == c { 1.0 } else { 0.0 }))
                            .collect();
                        model.constraints(&xd)[r].d
                    })
                    .collect()
            })
            .collect()
    };
    let residual = |y: &[f64]| -> Vec<f64> {
        let b = &y[0..n];
        let lam = &y[n..];
        let v: Vec<f64> = (0..n).map(|c| (b[c] - x[c]) / h).collect();
        let m: Vec<f64> = (0..n).map(|c| 0.5 * (b[c] + x[c])).collect();
        let gv = musical_flat(model, &m, &v);
        let w = metric_gradient(model, &m, &v);
        let mut out = vec![0.0; dim];
        for c in 0..n {
            let mut acc = gv[c] - 0.25 * h * w[c] - p[c];
            for (r, jac) in con_jac_at_x.iter().enumerate() {
                acc -= lam[r] * jac[c];
            }
            out[c] = acc;
        }
        for (r, val) in model.constraints(b).iter().enumerate() {
            out[n + r] = *val;
        }
        out
    };
    // Newton with finite-difference-free dual Jacobian
    for _ in 0..12 {
        let r = residual(&y);
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm < 1e-13 {
            break;
        }
        let mut jac = vec![0.0; dim * dim];
        for col in 0..dim {
            let hstep = 1e-7 * (1.0 + y[col].abs());
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[col] += hstep;
            ym[col] -= hstep;
            let rp = residual(&yp);
            let rm = residual(&ym);
            for row in 0..dim {
                jac[row * dim + col] = (rp[row] - rm[row]) / (2.0 * hstep);
            }
        }
        let delta = solve_spd(&jac, &r, dim);
        for i in 0..dim {
            y[i] -= delta[i];
        }
    }
    let b = y[0..n].to_vec();
    let v: Vec<f64> = (0..n).map(|c| (b[c] - x[c]) / h).collect();
    let m: Vec<f64> = (0..n).map(|c| 0.5 * (b[c] + x[c])).collect();
    let gv = musical_flat(model, &m, &v);
    let w = metric_gradient(model, &m, &v);
    let p_pre: Vec<f64> = (0..n).map(|c| gv[c] + 0.25 * h * w[c]).collect();
    // hidden constraint: restrict to tangentially-consistent momentum
    let v_next = musical_sharp(model, &b, &p_pre);
    let p_next = musical_flat(model, &b, &v_next);
    Ok((b, p_next))
}

/// Constrained variational geodesic flow on `T*Q`.
pub fn geodesic_flow_tq(
    model: &BundleModel,
    state: &CotangentState,
    duration: f64,
    steps: usize,
    record_every: usize,
) -> Result<Trajectory> {
    let h = duration / steps as f64;
    let mut x = state.q.clone();
    let mut v = state.v.clone();
    let mut p = musical_flat(model, &x, &v);
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        energy: Vec::new(),
        moment: Vec::new(),
    };
    let record = |traj: &mut Trajectory, t: f64, x: &[f64], v: &[f64]| {
        traj.times.push(t);
        traj.states.push(CotangentState {
            q: x.to_vec(),
            v: v.to_vec(),
        });
        traj.energy.push(hamiltonian(
            model,
            &CotangentState {
                q: x.to_vec(),
                v: v.to_vec(),
            },
        ));
        traj.moment.push(model.connection(x, v));
    };
    record(&mut traj, 0.0, &x, &v);
    for step in 0..steps {
        let (xn, pn) = rattle_step(model, &x, &p, &v, h)?;
        if model.constraint_residual(&xn) > 1e-6 {
            return Err(CoreError::ConstraintDrift(model.constraint_residual(&xn)));
        }
        x = xn;
        p = pn;
        v = musical_sharp(model, &x, &p);
        if (step + 1) % record_every == 0 || step + 1 == steps {
            record(&mut traj, (step + 1) as f64 * h, &x, &v);
        }
    }
    Ok(traj)
}

/// Chart magnetic flow `∇_s ẇ = scale · Y(ẇ)` with `Y = g^{-1} σ̄ J`,
/// integrated by RK4 with `substeps` steps over `[0, duration]`, sampled at
/// `n_samples` equispaced times (the oracle for reduction round trips).
pub fn magnetic_flow_chart(
    model: &BundleModel,
    chart: ChartId,
    w0: [f64; 2],
    dw0: [f64; 2],
    scale: f64,
    duration: f64,
    substeps: usize,
    n_samples: usize,
) -> Result<Vec<[f64; 2]>> {
    let rhs = |w: [f64; 2], dw: [f64; 2]| -> ([f64; 2], [f64; 2]) {
        let gamma = chart_christoffel_at(model, chart, w);
        let g = model.chart_metric(chart, w);
        let s = model.chart_sigma(chart, w);
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        // Y(u) = s g^{-1} (-u₂, u₁)
        let rot = [-dw[1], dw[0]];
        let y = [
            s * (g[1][1] * rot[0] - g[0][1] * rot[1]) / det,
            s * (-g[1][0] * rot[0] + g[0][0] * rot[1]) / det,
        ];
        let mut acc = [0.0; 2];
        for l in 0..2 {
            let mut c = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    c -= gamma[l][a][b] * dw[a] * dw[b];
                }
            }
            acc[l] = c + scale * y[l];
        }
        (dw, acc)
    };
    let h = duration / substeps as f64;
    let mut w = w0;
    let mut dw = dw0;
    let mut out = Vec::with_capacity(n_samples);
    let sample_stride = substeps / n_samples;
    if sample_stride == 0 || substeps % n_samples != 0 {
        return Err(CoreError::Config(
            "chart flow substeps must be a multiple of the sample count".into(),
        ));
    }
    out.push(w);
    for step in 0..substeps {
        let (k1w, k1v) = rhs(w, dw);
        let (k2w, k2v) = rhs(
            [w[0] + 0.5 * h * k1w[0], w[1] + 0.5 * h * k1w[1]],
            [dw[0] + 0.5 * h * k1v[0], dw[1] + 0.5 * h * k1v[1]],
        );
        let (k3w, k3v) = rhs(
            [w[0] + 0.5 * h * k2w[0], w[1] + 0.5 * h * k2w[1]],
            [dw[0] + 0.5 * h * k2v[0], dw[1] + 0.5 * h * k2v[1]],
        );
        let (k4w, k4v) = rhs(
            [w[0] + h * k3w[0], w[1] + h * k3w[1]],
            [dw[0] + h * k3v[0], dw[1] + h * k3v[1]],
        );
        for c in 0..2 {
            w[c] += h / 6.0 * (k1w[c] + 2.0 * k2w[c] + 2.0 * k3w[c] + k4w[c]);
            dw[c] += h / 6.0 * (k1v[c] + 2.0 * k2v[c] + 2.0 * k3v[c] + k4v[c]);
        }
        if (step + 1) % sample_stride == 0 && out.len() < n_samples {
            out.push(w);
        }
    }
    Ok(out)
}

/// Rescale a constrained `G`-closed geodesic `x` (sampled at `s_j = jT/m`,
/// `x(T) = exp(X)·x(0)`) into the 1-periodic loop `y(t) = exp(-tX) x(tT)`.
pub fn rescale_orbit(
    model: &BundleModel,
    traj: &[CotangentState],
    x_alg: &[f64],
) -> Result<Vec<CotangentState>> {
    let m = traj.len() - 1;
    let first = &traj[0];
    let last = &traj[m];
    let moved = model.act(x_alg, &first.q);
    let defect: f64 = moved
        .iter()
        .zip(&last.q)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if defect > 1e-6 {
        return Err(CoreError::ClosureViolated(defect));
    }
    let mut out = Vec::with_capacity(m);
    for (j, state) in traj.iter().take(m).enumerate() {
        let t = j as f64 / m as f64;
        let g: Vec<f64> = x_alg.iter().map(|c| -t * c).collect();
        let q = model.act(&g, &state.q);
        // ẏ = -X̲(y) + T dφ(ẋ); the momentum transports equivariantly
        let v = model.act_linear(&g, &state.v);
        out.push(CotangentState { q, v });
    }
    Ok(out)
}

/// Inverse of [`rescale_orbit`].
pub fn unrescale_orbit(
    model: &BundleModel,
    loop_states: &[CotangentState],
    x_alg: &[f64],
) -> Vec<CotangentState> {
    let m = loop_states.len();
    let mut out = Vec::with_capacity(m + 1);
    for (j, state) in loop_states.iter().enumerate() {
        let t = j as f64 / m as f64;
        let g: Vec<f64> = x_alg.iter().map(|c| t * c).collect();
        out.push(CotangentState {
            q: model.act(&g, &state.q),
            v: model.act_linear(&g, &state.v),
        });
    }
    let g0 = x_alg.to_vec();
    out.push(CotangentState {
        q: model.act(&g0, &loop_states[0].q),
        v: model.act_linear(&g0, &loop_states[0].v),
    });
    out
}

/// Rabinowitz-type action
/// `A_k(y, φ, T) = ∫ y*λ - ∫ (T(H - k) - ⟨A - Z, φ⟩) dt`
/// on a discrete loop in `T*Q × g`; `∫ y*λ` uses the trigonometric
/// derivative of the position loop.
pub fn rabinowitz_action(
    model: &BundleModel,
    loop_states: &[CotangentState],
    phi: &[f64],
    t_period: f64,
    k: f64,
) -> f64 {
    let m = loop_states.len();
    let amb = model.ambient_dim();
    let alg = model.alg_dim();
    let group = model.group();
    let z = model.z();
    let ops = DiffOps::new(m);
    let mut positions = vec![0.0; m * amb];
    for (j, s) in loop_states.iter().enumerate() {
        positions[j * amb..(j + 1) * amb].copy_from_slice(&s.q);
    }
    let dq = ops.derivative_strands(&positions, amb);
    let mut acc = 0.0;
    for (j, s) in loop_states.iter().enumerate() {
        let qdot = &dq[j * amb..(j + 1) * amb];
        let lambda = model.metric(&s.q, &s.v, qdot);
        let h = hamiltonian(model, s);
        let a = moment_map(model, s);
        let amz: Vec<f64> = a.iter().zip(z).map(|(x, y)| x - y).collect();
        let pairing = group.inner(&amz, &phi[j * alg..(j + 1) * alg]);
        acc += lambda - (t_period * (h - k) - pairing);
    }
    acc / m as f64
}

/// The `T*Q × g` lift of a critical point of `S_k` at which the Rabinowitz
/// action is stationary: `y = (γ, ♯((γ̇ + φ_A̲)/T))` with `φ_A = φ + 2TZ`
/// (then `A ≡ Z` and `H ≡ k`).  At such lifts
/// `S_k = A_k + 2T + 2∫⟨φ,Z⟩` holds, which the diagnostics check.
pub fn lift_critical_point(
    ls: &crate::loopspace::LoopSpace,
    config: &crate::loopspace::LoopConfiguration,
) -> (Vec<CotangentState>, Vec<f64>) {
    let model = ls.model;
    let amb = model.ambient_dim();
    let alg = model.alg_dim();
    let z = model.z();
    let n = config.n;
    let dgamma = ls.ops.derivative_strands(&config.gamma, amb);
    let mut states = Vec::with_capacity(n);
    let mut phi_a = vec![0.0; n * alg];
    for i in 0..n {
        let q = &config.gamma[i * amb..(i + 1) * amb];
        for a in 0..alg {
            phi_a[i * alg + a] = config.phi[i * alg + a] + 2.0 * config.t * z[a];
        }
        let fund = model.fundamental_field(&phi_a[i * alg..(i + 1) * alg], q);
        let v: Vec<f64> = (0..amb)
            .map(|c| (dgamma[i * amb + c] + fund[c]) / config.t)
            .collect();
        let vt = model.tangent_project(q, &v);
        states.push(CotangentState {
            q: q.to_vec(),
            v: vt,
        });
    }
    (states, phi_a)
}

/// Trajectory CSV body: `t, q_*, p_*, H, A_1..A_d`.
pub fn trajectory_to_csv(model: &BundleModel, traj: &Trajectory) -> String {
    let amb = model.ambient_dim();
    let alg = model.alg_dim();
    let mut out = String::from("t");
    for c in 0..amb {
        out.push_str(&format!(",q_{}", c + 1));
    }
    for c in 0..amb {
        out.push_str(&format!(",p_{}", c + 1));
    }
    out.push_str(",H");
    for c in 0..alg {
        out.push_str(&format!(",A_{}", c + 1));
    }
    out.push('\n');
    for (j, state) in traj.states.iter().enumerate() {
        out.push_str(&format!("{:.16e}", traj.times[j]));
        for c in 0..amb {
            out.push_str(&format!(",{:.16e}", state.q[c]));
        }
        let p = musical_flat(model, &state.q, &state.v);
        for c in 0..amb {
            out.push_str(&format!(",{:.16e}", p[c]));
        }
        out.push_str(&format!(",{:.16e}", traj.energy[j]));
        for c in 0..alg {
            out.push_str(&format!(",{:.16e}", traj.moment[j][c]));
        }
        out.push('\n');
    }
    out
}
