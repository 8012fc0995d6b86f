//! Mountain-pass minimax over explicit path classes and the scan of the
//! minimax value over the energy parameter.
//!
//! The path class joins a vertical element `(t ↦ exp(-tX)q₀, X, T₀)` in the
//! component `V_{δ,X}` to a constant loop `(q₁, 0, T₀)` in `V_{δ,0}`; with
//! `k T₀ ≤ ε/2` both endpoints lie inside stopped sets and are fixed by the
//! stopped flow, while continuity of `|φ̄|` forces every path to cross
//! `∂V_δ`, so the minimax value is bounded below by the boundary barrier.
//! Deformation alternates short stopped-flow budgets on the interior nodes
//! with re-maximization and midpoint insertion near the argmax.

use super::{flow, newton_polish, FlowParams, Functional, NewtonReport};
use crate::error::{CoreError, Result};
use crate::gauge;
use crate::loopspace::{LoopConfiguration, LoopSpace};
use crate::verify::{self, VerifyOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathClassKind {
    /// Paths for `S_k` from a vertical element to the constant-loop slab.
    SkPath,
    /// Paths for the closed-geodesic functional `E` (period frozen).
    EnergyPath,
}

#[derive(Debug, Clone)]
pub struct MinimaxPath {
    pub nodes: Vec<LoopConfiguration>,
}

impl MinimaxPath {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Node-wise geometric interpolation between two configurations.
fn interpolate_configs(
    ls: &LoopSpace,
    a: &LoopConfiguration,
    b: &LoopConfiguration,
    s: f64,
) -> LoopConfiguration {
    let amb = ls.ambient_dim();
    let n = a.n;
    let mut gamma = vec![0.0; n * amb];
    for i in 0..n {
        let p = ls.model.interpolate_points(
            &a.gamma[i * amb..(i + 1) * amb],
            &b.gamma[i * amb..(i + 1) * amb],
            s,
        );
        gamma[i * amb..(i + 1) * amb].copy_from_slice(&p);
    }
    let phi: Vec<f64> = a
        .phi
        .iter()
        .zip(&b.phi)
        .map(|(x, y)| (1.0 - s) * x + s * y)
        .collect();
    LoopConfiguration {
        n,
        gamma,
        phi,
        t: (1.0 - s) * a.t + s * b.t,
    }
}

/// Build the initial path for the class determined by the lattice element
/// `x`, the vertical base point `q0`, and the far endpoint `q1`.
///
/// Rejects classes that do not exist on the model: the fiber loop of `x`
/// must be contractible in `Q` (on the product model only `x = 0` is, and
/// that carries no class), and `exp(-X)` must stabilize `q0`.
pub fn build_path_class(
    ls: &LoopSpace,
    kind: PathClassKind,
    x: &[f64],
    q0: &[f64],
    q1: &[f64],
    k: f64,
    samples: usize,
) -> Result<MinimaxPath> {
    if x.iter().all(|c| c.abs() < 1e-12) {
        return Err(CoreError::InvalidPathClass(
            "X = 0 carries no path class".into(),
        ));
    }
    if !ls.model.vertical_loop_contractible(x) {
        return Err(CoreError::InvalidPathClass(format!(
            "the fiber loop of X = {:?} is non-contractible in Q on {}",
            x,
            ls.model.name()
        )));
    }
    let params = FlowParams::for_level(k);
    let t0 = match kind {
        PathClassKind::SkPath => (0.9 * params.epsilon / (2.0 * k)).max(params.t_min),
        PathClassKind::EnergyPath => 1.0,
    };
    let start = ls.vertical_element(x, q0, t0)?;
    let end = ls.constant_loop(q1, t0);
    let mut nodes = Vec::with_capacity(samples + 1);
    for j in 0..=samples {
        let s = j as f64 / samples as f64;
        nodes.push(interpolate_configs(ls, &start, &end, s));
    }
    Ok(MinimaxPath { nodes })
}

/// Whether the path crosses the vertical boundary `∂V_δ`
/// (max vertical residual over nodes at least `δ`).
pub fn path_crosses_boundary(ls: &LoopSpace, path: &MinimaxPath, delta: f64) -> bool {
    path.nodes
        .iter()
        .map(|c| ls.vertical_residual(c))
        .fold(f64::NEG_INFINITY, f64::max)
        >= delta
}

#[derive(Debug, Clone)]
pub struct MountainPassParams {
    pub sweeps: usize,
    /// Stopped-flow step budget per interior node per sweep.
    pub flow_steps: usize,
    pub max_nodes: usize,
    pub c_tol: f64,
    pub stable_sweeps: usize,
    pub polish: bool,
    pub polish_tol: f64,
    pub polish_iters: usize,
}

impl Default for MountainPassParams {
    fn default() -> Self {
        Self {
            sweeps: 400,
            flow_steps: 15,
            max_nodes: 49,
            c_tol: 1e-7,
            stable_sweeps: 6,
            polish: true,
            polish_tol: 1e-8,
            polish_iters: 60,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MountainPassOutcome {
    /// Stabilized estimate of the minimax value `c(k)`.
    pub c_estimate: f64,
    /// Argmax configuration, Newton-polished when possible.
    pub best: LoopConfiguration,
    pub polished: Option<NewtonReport>,
    pub path: MinimaxPath,
    pub sweeps_run: usize,
    pub c_history: Vec<f64>,
    /// Every deformed path crossed `∂V_δ`.
    pub crossing_ok: bool,
    /// Near-maximum nodes stayed clear of the stopped sets.
    pub margin_ok: bool,
    pub converged: bool,
}

/// Alternate stopped-flow deformation of the interior nodes with
/// re-maximization over the path, then polish the argmax.
pub fn mountain_pass(
    ls: &LoopSpace,
    functional: Functional,
    initial: &MinimaxPath,
    params: &FlowParams,
    mp: &MountainPassParams,
) -> Result<MountainPassOutcome> {
    let mut path = initial.clone();
    let gap = ls.model.group().lattice_gap().unwrap_or(1.0);
    let mut node_params = params.clone();
    node_params.max_steps = mp.flow_steps;
    let mut c_prev = f64::INFINITY;
    let mut stable = 0usize;
    let mut crossing_ok = true;
    let mut c_history = Vec::new();
    let mut sweeps_run = 0;
    for sweep in 0..mp.sweeps {
        sweeps_run = sweep + 1;
        for j in 1..path.nodes.len() - 1 {
            let out = flow(ls, functional, &path.nodes[j], &node_params)?;
            let mut cfg = out.config;
            // computational stand-in for compactness "up to gauge"
            let mean = ls.phi_mean(&cfg);
            let mean_norm = ls.model.group().norm(&ls.model.group().center_project(&mean));
            if mean_norm > gap / 2.0 {
                let (_, gauged) = gauge::gauge_normalize(ls, &cfg)?;
                cfg = gauged;
            }
            path.nodes[j] = cfg;
        }
        if !path_crosses_boundary(ls, &path, params.delta) {
            crossing_ok = false;
        }
        let mut values = Vec::with_capacity(path.nodes.len());
        for node in &path.nodes {
            values.push(functional.value(ls, node)?);
        }
        let argmax = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let c = values[argmax];
        c_history.push(c);
        // refine around an interior argmax
        if path.nodes.len() + 2 <= mp.max_nodes && argmax > 0 && argmax + 1 < path.nodes.len() {
            let right = interpolate_configs(ls, &path.nodes[argmax], &path.nodes[argmax + 1], 0.5);
            let left = interpolate_configs(ls, &path.nodes[argmax - 1], &path.nodes[argmax], 0.5);
            path.nodes.insert(argmax + 1, right);
            path.nodes.insert(argmax, left);
        }
        if (c - c_prev).abs() < mp.c_tol {
            stable += 1;
            if stable >= mp.stable_sweeps {
                c_prev = c;
                break;
            }
        } else {
            stable = 0;
        }
        c_prev = c;
    }
    let converged_sweeps = stable >= mp.stable_sweeps;

    // final values and argmax
    let mut values = Vec::with_capacity(path.nodes.len());
    for node in &path.nodes {
        values.push(functional.value(ls, node)?);
    }
    let argmax = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let c_estimate = values[argmax];

    // margin rule: nodes within ε/2 of the maximum are never inside
    // stopped sets
    let mut margin_ok = true;
    for (node, value) in path.nodes.iter().zip(&values) {
        if *value >= c_estimate - params.epsilon / 2.0 {
            if let Some((label, _)) = gauge::detect_vertical_class(ls, node, params.delta) {
                let level = ls.model.group().inner(&label, ls.model.z());
                let inside = match functional {
                    Functional::Sk { .. } => *value < level + params.epsilon / 2.0,
                    Functional::Energy => true,
                };
                if inside {
                    margin_ok = false;
                }
            }
        }
    }

    // polish the argmax (fall back to neighbors if the basin is poor)
    let mut polished = None;
    if mp.polish {
        let mut order = vec![argmax];
        if argmax > 0 {
            order.push(argmax - 1);
        }
        if argmax + 1 < path.nodes.len() {
            order.push(argmax + 1);
        }
        for idx in order {
            match newton_polish(
                ls,
                functional,
                &path.nodes[idx],
                mp.polish_tol,
                mp.polish_iters,
            ) {
                Ok(rep) => {
                    polished = Some(rep);
                    break;
                }
                Err(_) => continue,
            }
        }
    }
    let best = polished
        .as_ref()
        .map(|r| r.config.clone())
        .unwrap_or_else(|| path.nodes[argmax].clone());
    let converged = converged_sweeps && (!mp.polish || polished.is_some());
    Ok(MountainPassOutcome {
        c_estimate,
        best,
        polished,
        path,
        sweeps_run,
        c_history,
        crossing_ok,
        margin_ok,
        converged,
    })
}

/// One row of the `c(k)` scan table.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScanRow {
    pub k: f64,
    pub c: f64,
    pub status: String,
    pub t: f64,
    pub kbar: f64,
    pub grad_norm: f64,
    /// Forward difference quotient of `c(·)`, a differentiability
    /// diagnostic; `None` on the last grid point.
    pub dc_dk: Option<f64>,
}

/// Scan `c(k)` over a grid, warm-starting each level from the previous
/// deformed path, and flag levels whose polished configuration verifies as
/// a critical point with period inside the admissible window.
#[allow(clippy::too_many_arguments)]
pub fn k_scan(
    ls: &LoopSpace,
    x: &[f64],
    q0: &[f64],
    q1: &[f64],
    grid: &[f64],
    mp: &MountainPassParams,
    path_samples: usize,
    verify_opts: &VerifyOptions,
) -> Result<Vec<ScanRow>> {
    let mut rows = Vec::with_capacity(grid.len());
    let mut warm: Option<MinimaxPath> = None;
    for &k in grid {
        let params = FlowParams::for_level(k);
        let path = match &warm {
            Some(p) => p.clone(),
            None => build_path_class(ls, PathClassKind::SkPath, x, q0, q1, k, path_samples)?,
        };
        let out = mountain_pass(ls, Functional::Sk { k }, &path, &params, mp)?;
        let (status, t, kbar, grad_norm) = match &out.polished {
            Some(rep) => {
                let t_ok = rep.config.t >= params.t_min && rep.config.t <= params.t_max;
                let verified = t_ok
                    && verify::project_and_check(ls, &rep.config, k, verify_opts)
                        .map(|r| r.pass)
                        .unwrap_or(false);
                let status = if verified {
                    "verified".to_string()
                } else {
                    "unverified".to_string()
                };
                (
                    status,
                    rep.config.t,
                    k - 0.5,
                    rep.grad_norm,
                )
            }
            None => ("polish-failed".to_string(), out.best.t, k - 0.5, f64::NAN),
        };
        rows.push(ScanRow {
            k,
            c: out.c_estimate,
            status,
            t,
            kbar,
            grad_norm,
            dc_dk: None,
        });
        warm = Some(out.path);
    }
    // difference quotients of c(k)
    for i in 0..rows.len() {
        if i + 1 < rows.len() {
            let dk = rows[i + 1].k - rows[i].k;
            rows[i].dc_dk = Some((rows[i + 1].c - rows[i].c) / dk);
        }
    }
    Ok(rows)
}
