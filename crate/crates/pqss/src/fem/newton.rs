//! Damped-Newton solver for the scalar Dirichlet problem `-Δ_p w = rhs`,
//! `w = 0` on the boundary.
//!
//! The p-Laplacian is degenerate (p > 2) or singular (p < 2) where the
//! gradient vanishes, so Newton runs on the regularized operator with
//! weight `(|∇w|² + eps)^{(p-2)/2}` and a geometric eps-continuation.
//! Steps are globalized by Armijo backtracking on the regularized energy
//! `∫ (|∇w|²+eps)^{p/2} / p - ∫ rhs·w`, which the exact-Jacobian step
//! strictly decreases.

use crate::fem::field::Field;
use crate::fem::forms::{element_gradient, load_vec, p_energy, p_laplacian_vec};
use crate::fem::linalg::{cg_solve, CsrMatrix};
use crate::fem::{FemError, SolverOptions};
use crate::mesh::Mesh;

/// Interior-unknown bookkeeping reused across Newton steps (and by the
/// spectral preconditioner).
pub struct InteriorSystem {
    pub nodes: Vec<usize>,
    pub index_of: Vec<usize>,
    pub matrix: CsrMatrix,
}

pub const NO_INTERIOR: usize = usize::MAX;

impl InteriorSystem {
    pub fn new(mesh: &Mesh) -> Self {
        let nodes: Vec<usize> = mesh.interior_nodes().collect();
        let mut index_of = vec![NO_INTERIOR; mesh.node_count()];
        for (k, &n) in nodes.iter().enumerate() {
            index_of[n] = k;
        }
        // adjacency among interior nodes through shared elements
        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for e in 0..mesh.element_count() {
            let elem = mesh.element(e);
            for &a in elem {
                let ia = index_of[a];
                if ia == NO_INTERIOR {
                    continue;
                }
                for &b in elem {
                    let ib = index_of[b];
                    if ib != NO_INTERIOR && ib != ia {
                        neighbors[ia].push(ib);
                    }
                }
            }
        }
        let matrix = CsrMatrix::from_adjacency(nodes.len(), &neighbors);
        InteriorSystem {
            nodes,
            index_of,
            matrix,
        }
    }

    /// Assemble the tangent matrix of the regularized p-Laplacian at `w`.
    pub fn assemble_plap_tangent(&mut self, mesh: &Mesh, w: &[f64], p: f64, eps: f64) {
        self.matrix.zero_values();
        for e in 0..mesh.element_count() {
            let geo = mesh.geometry(e);
            let g = element_gradient(mesh, w, e);
            let s = g[0] * g[0] + g[1] * g[1] + eps;
            let (kappa, tau) = if s <= 0.0 {
                // only reachable at p = 2 with eps = 0
                (1.0, 0.0)
            } else {
                (
                    s.powf(0.5 * (p - 2.0)),
                    (p - 2.0) * s.powf(0.5 * (p - 4.0)),
                )
            };
            let elem = mesh.element(e);
            for (i, &ni) in elem.iter().enumerate() {
                let ii = self.index_of[ni];
                if ii == NO_INTERIOR {
                    continue;
                }
                let gi = geo.grads[i];
                let g_dot_i = g[0] * gi[0] + g[1] * gi[1];
                for (j, &nj) in elem.iter().enumerate() {
                    let jj = self.index_of[nj];
                    if jj == NO_INTERIOR {
                        continue;
                    }
                    let gj = geo.grads[j];
                    let g_dot_j = g[0] * gj[0] + g[1] * gj[1];
                    let grad_dot = gi[0] * gj[0] + gi[1] * gj[1];
                    let val = (kappa * grad_dot + tau * g_dot_i * g_dot_j) * geo.measure;
                    self.matrix.add(ii, jj, val);
                }
            }
        }
    }
}

/// Result of a scalar Dirichlet solve.
#[derive(Debug, Clone)]
pub struct DirichletSolve {
    pub field: Field,
    pub newton_iterations: usize,
    /// Energy after every accepted step, non-increasing within each
    /// continuation stage.
    pub energy_history: Vec<f64>,
    /// Final max-norm residual of the regularized operator (interior).
    pub residual_norm: f64,
    /// Residual of the unregularized form at the returned iterate.
    pub consistency_residual: f64,
}

/// Solve `-Δ_p w = rhs` with a P1 nodal source field.
pub fn solve_scalar_dirichlet(
    p: f64,
    rhs: &Field,
    mesh: &Mesh,
    opts: &SolverOptions,
) -> Result<DirichletSolve, FemError> {
    rhs.on_mesh(mesh)?;
    let load = load_vec(rhs, mesh, opts.quad_degree)?;
    solve_dirichlet_with_load(p, &load, mesh, opts, None)
}

/// Solve against a pre-assembled load vector `b_i = ∫ rhs ξ_i dx`.
///
/// Keeping the load assembly with the caller makes the fixed point of the
/// monotone iteration agree with `weak_residual_system` down to roundoff:
/// both integrate the nonlinear sources with the same quadrature.
pub fn solve_dirichlet_with_load(
    p: f64,
    load: &[f64],
    mesh: &Mesh,
    opts: &SolverOptions,
    init: Option<&Field>,
) -> Result<DirichletSolve, FemError> {
    if load.len() != mesh.node_count() {
        return Err(FemError::Shape {
            expected: mesh.node_count(),
            got: load.len(),
        });
    }
    if !(p > 1.0) {
        return Err(FemError::BadExponent(p));
    }
    if let Some(f) = init {
        f.on_mesh(mesh)?;
    }

    let linear = (p - 2.0).abs() < 1e-14;
    let stages: Vec<f64> = if linear {
        vec![0.0]
    } else if init.is_some() {
        vec![opts.eps_end]
    } else {
        eps_schedule(opts)
    };

    match run_stages(p, load, mesh, opts, init, &stages) {
        Ok(s) => Ok(s),
        Err(FemError::NonConvergence { .. }) if init.is_some() && !linear => {
            // warm start failed; fall back to the full continuation from the
            // same initial iterate
            run_stages(p, load, mesh, opts, init, &eps_schedule(opts))
        }
        Err(e) => Err(e),
    }
}

fn eps_schedule(opts: &SolverOptions) -> Vec<f64> {
    let mut stages = Vec::new();
    let mut eps = opts.eps_start;
    while eps > opts.eps_end * 1.0000001 {
        stages.push(eps);
        eps *= opts.eps_factor;
    }
    stages.push(opts.eps_end);
    stages
}

fn run_stages(
    p: f64,
    load: &[f64],
    mesh: &Mesh,
    opts: &SolverOptions,
    init: Option<&Field>,
    stages: &[f64],
) -> Result<DirichletSolve, FemError> {
    let mut sys = InteriorSystem::new(mesh);
    let n_int = sys.nodes.len();
    let load_scale = load.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol_final = opts.tolerance * load_scale.max(1.0);

    let mut w = match init {
        Some(f) => {
            let mut w = f.clone();
            for &b in mesh.boundary_nodes() {
                w.values_mut()[b] = 0.0;
            }
            w
        }
        None => Field::zeros(mesh),
    };

    let mut energy_history = Vec::new();
    let mut total_newton = 0usize;
    let mut residual_norm = f64::INFINITY;

    for (si, &eps) in stages.iter().enumerate() {
        let last_stage = si + 1 == stages.len();
        let stage_tol = if last_stage {
            tol_final
        } else {
            tol_final.max(1e-2 * eps.sqrt() * load_scale.max(1.0))
        };

        let mut best_res = f64::INFINITY;
        let mut stall = 0usize;
        let mut energy = p_energy(&w, p, eps, mesh)? - dot_all(load, w.values());
        energy_history.push(energy);

        let mut iter = 0usize;
        loop {
            let grad_full = p_laplacian_vec(&w, p, eps, mesh)?;
            let mut r = vec![0.0; n_int];
            for (k, &node) in sys.nodes.iter().enumerate() {
                r[k] = grad_full[node] - load[node];
            }
            let res = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            residual_norm = res;
            if res <= stage_tol {
                break;
            }
            if iter >= opts.max_newton {
                return Err(FemError::NonConvergence {
                    what: format!("newton (eps = {eps:.3e})"),
                    residual: res,
                    iterations: total_newton,
                    last: Box::new(w),
                });
            }
            if res < best_res * 0.999_999 {
                best_res = res;
                stall = 0;
            } else {
                stall += 1;
                if stall > opts.max_stall {
                    return Err(FemError::NonConvergence {
                        what: format!("newton stalled (eps = {eps:.3e})"),
                        residual: res,
                        iterations: total_newton,
                        last: Box::new(w),
                    });
                }
            }

            sys.assemble_plap_tangent(mesh, w.values(), p, eps);
            let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
            let (d, _) = cg_solve(
                &sys.matrix,
                &neg_r,
                opts.cg_rtol,
                opts.cg_max_iter_factor * n_int.max(1),
            )
            .ok_or_else(|| FemError::LinearSolve("cg failed on newton step".into()))?;

            // Armijo backtracking on the regularized energy. Once the
            // predicted decrease falls below energy roundoff the test is
            // pure noise, so the full (quadratically convergent) step is
            // taken unguarded.
            let descent: f64 = r.iter().zip(&d).map(|(a, b)| a * b).sum();
            let noise = 1e-12 * energy.abs().max(1.0e-300);
            let mut t = 1.0;
            let mut accepted = false;
            if descent.abs() <= noise {
                for (k, &node) in sys.nodes.iter().enumerate() {
                    w.values_mut()[node] += d[k];
                }
                energy = p_energy(&w, p, eps, mesh)? - dot_all(load, w.values());
                energy_history.push(energy);
                accepted = true;
            }
            for _ in 0..opts.armijo_max_backtracks {
                if accepted {
                    break;
                }
                let mut trial = w.clone();
                for (k, &node) in sys.nodes.iter().enumerate() {
                    trial.values_mut()[node] += t * d[k];
                }
                let e_trial = p_energy(&trial, p, eps, mesh)? - dot_all(load, trial.values());
                if e_trial <= energy + opts.armijo_c * t * descent {
                    w = trial;
                    energy = e_trial;
                    energy_history.push(energy);
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // energy is flat to rounding; accept only if already close
                if res <= 10.0 * stage_tol {
                    break;
                }
                return Err(FemError::NonConvergence {
                    what: format!("line search exhausted (eps = {eps:.3e})"),
                    residual: res,
                    iterations: total_newton,
                    last: Box::new(w),
                });
            }
            iter += 1;
            total_newton += 1;
        }
    }

    let grad0 = p_laplacian_vec(&w, p, 0.0, mesh)?;
    let consistency = sys
        .nodes
        .iter()
        .fold(0.0f64, |m, &n| m.max((grad0[n] - load[n]).abs()));

    Ok(DirichletSolve {
        field: w,
        newton_iterations: total_newton,
        energy_history,
        residual_norm,
        consistency_residual: consistency,
    })
}

fn dot_all(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
