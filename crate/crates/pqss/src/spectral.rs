//! First Dirichlet eigenpairs of `-Δ_r`, torsion functions, boundary-strip
//! constants and eigenfunction comparability constants.
//!
//! The first eigenvalue is the minimum of the Rayleigh quotient
//! `∫|∇w|^r / ∫|w|^r` over nonzero fields vanishing on the boundary. It is
//! minimized by projected gradient descent on the normalized cone: descent
//! directions are preconditioned by the (fixed) linear stiffness matrix, the
//! iterate is clamped to the nonnegative cone and renormalized each step.
//! With `r = 2` and a unit step this reduces exactly to inverse power
//! iteration, which is what the cross-checks in the tests exploit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::fem::field::Field;
use crate::fem::forms::{nodal_gradients, p_laplacian_vec, power_mass_vec};
use crate::fem::linalg::cg_solve;
use crate::fem::newton::{solve_scalar_dirichlet, InteriorSystem};
use crate::fem::{FemError, SolverOptions};
use crate::mesh::{Domain, Mesh, MeshError};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("eigenvalue iteration failed to stabilize: {0}")]
    NonConvergence(String),
    #[error("no admissible strip width: m(delta) <= 0 for every candidate (under-resolved mesh?)")]
    StripFailure,
    #[error("eigenfunction vanishes at interior node {node}")]
    DegenerateEigenfunction { node: usize },
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Options for the eigen solver.
#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Relative stabilization tolerance on sigma.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Restarts with a seeded perturbed initialization if the first run
    /// fails to meet the tolerance.
    pub restarts: usize,
    pub seed: u64,
    pub quad_degree: usize,
    pub cg_rtol: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tolerance: 1e-11,
            max_iter: 4000,
            restarts: 2,
            seed: 0,
            quad_degree: crate::fem::forms::DEFAULT_QUAD_DEGREE,
            cg_rtol: 1e-14,
        }
    }
}

/// First eigenpair: `sigma` and the positive eigenfunction `phi`,
/// sup-normalized to 1.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub r: f64,
    pub sigma: f64,
    pub phi: Field,
}

/// Strip constants: on the closed strip of width `delta` the eigenfunction
/// satisfies `|∇φ|^r - σ φ^r >= m` at nodes, and `φ >= eta` off the strip.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StripConstants {
    pub m: f64,
    pub eta: f64,
    pub delta: f64,
    /// Same minimum with the first power of φ in place of `φ^r`
    /// (reported alongside; the `φ^r` form is what the subsolution
    /// expansion consumes).
    pub m_linear: f64,
}

/// Eigenpair together with its strip constants.
#[derive(Debug, Clone)]
pub struct EigenData {
    pub pair: EigenPair,
    pub strip: StripConstants,
}

/// Torsion function `-Δ_r ω = 1` and its sup-norm.
#[derive(Debug, Clone)]
pub struct TorsionData {
    pub r: f64,
    pub omega: Field,
    pub nu: f64,
}

/// Positive initial iterate: product of the coordinate distances to the
/// boundary (interval, square) or the analytic boundary distance (disk).
fn bump_field(mesh: &Mesh) -> Field {
    match mesh.domain() {
        Domain::Interval { length } => Field::from_fn(mesh, |c| (c[0] * (length - c[0])).max(0.0)),
        Domain::UnitSquare => Field::from_fn(mesh, |c| {
            (c[0] * (1.0 - c[0]) * c[1] * (1.0 - c[1])).max(0.0)
        }),
        Domain::DiskPolygon { .. } => {
            let d = mesh.domain();
            Field::from_fn(mesh, |c| d.boundary_distance(c))
        }
    }
}

/// `∫ |w|^r` by the same quadrature the residual assembly uses.
fn r_norm_pow(w: &Field, r: f64, mesh: &Mesh, degree: usize) -> Result<f64, FemError> {
    // ∫ |w|^{r-2} w · w = ∫ |w|^r for sign-definite w; the iterates stay
    // nonnegative so this is exact for them.
    crate::fem::forms::apply_power_mass_form_deg(w, w, r, mesh, degree)
}

fn dirichlet_energy_r(w: &Field, r: f64, mesh: &Mesh) -> Result<f64, FemError> {
    Ok(r * crate::fem::forms::p_energy(w, r, 0.0, mesh)?)
}

/// Minimize the Rayleigh quotient for `-Δ_r`; returns the first eigenpair.
pub fn first_eigenpair(
    mesh: &Mesh,
    r: f64,
    opts: &EigenOptions,
) -> Result<EigenPair, SpectralError> {
    if !(r > 1.0) {
        return Err(SpectralError::Fem(FemError::BadExponent(r)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<EigenPair> = None;
    for attempt in 0..=opts.restarts {
        let mut init = bump_field(mesh);
        if attempt > 0 {
            // perturb multiplicatively, keeping positivity and the boundary
            for v in init.values_mut() {
                *v *= 1.0 + 0.3 * rng.gen::<f64>();
            }
        }
        match eigen_descent(mesh, r, &init, opts) {
            Ok(pair) => {
                let better = match &best {
                    Some(b) => pair.sigma < b.sigma,
                    None => true,
                };
                if better {
                    best = Some(pair);
                }
                if attempt == 0 {
                    break;
                }
            }
            Err(_) if attempt < opts.restarts => continue,
            Err(e) => {
                if best.is_none() {
                    return Err(e);
                }
            }
        }
    }
    best.ok_or_else(|| SpectralError::NonConvergence("no successful attempt".into()))
}

fn eigen_descent(
    mesh: &Mesh,
    r: f64,
    init: &Field,
    opts: &EigenOptions,
) -> Result<EigenPair, SpectralError> {
    let mut sys = InteriorSystem::new(mesh);
    // fixed preconditioner: the linear stiffness matrix
    sys.assemble_plap_tangent(mesh, Field::zeros(mesh).values(), 2.0, 0.0);
    let n_int = sys.nodes.len();

    let normalize = |w: &mut Field| -> Result<f64, FemError> {
        for &b in mesh.boundary_nodes() {
            w.values_mut()[b] = 0.0;
        }
        let b = r_norm_pow(w, r, mesh, opts.quad_degree)?;
        if b <= 0.0 {
            return Ok(0.0);
        }
        let scale = b.powf(1.0 / r);
        for v in w.values_mut() {
            *v /= scale;
        }
        Ok(b)
    };

    let mut w = init.clone();
    if normalize(&mut w)? <= 0.0 {
        return Err(SpectralError::NonConvergence("zero initialization".into()));
    }
    let mut sigma = dirichlet_energy_r(&w, r, mesh)?;

    let mut stable = 0usize;
    for _iter in 0..opts.max_iter {
        let grad_a = p_laplacian_vec(&w, r, 0.0, mesh)?;
        let grad_b = power_mass_vec(&w, r, mesh, opts.quad_degree)?;
        let mut g = vec![0.0; n_int];
        for (k, &node) in sys.nodes.iter().enumerate() {
            g[k] = grad_a[node] - sigma * grad_b[node];
        }
        let (d, _) = cg_solve(&sys.matrix, &g, opts.cg_rtol, 40 * n_int.max(1))
            .ok_or_else(|| SpectralError::NonConvergence("preconditioner solve failed".into()))?;

        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let mut trial = w.clone();
            for (k, &node) in sys.nodes.iter().enumerate() {
                let v = trial.values()[node] - t * d[k];
                trial.values_mut()[node] = v.max(0.0);
            }
            if normalize(&mut trial)? <= 0.0 {
                t *= 0.5;
                continue;
            }
            let s_trial = dirichlet_energy_r(&trial, r, mesh)?
                / r_norm_pow(&trial, r, mesh, opts.quad_degree)?;
            if s_trial < sigma {
                let rel_change = (sigma - s_trial) / sigma.max(1e-300);
                w = trial;
                sigma = s_trial;
                improved = true;
                if rel_change < opts.tolerance {
                    stable += 1;
                } else {
                    stable = 0;
                }
                break;
            }
            t *= 0.5;
        }
        if !improved {
            stable += 1;
        }
        if stable >= 3 {
            break;
        }
    }
    if stable < 3 {
        return Err(SpectralError::NonConvergence(format!(
            "sigma = {sigma} did not stabilize in {} iterations",
            opts.max_iter
        )));
    }

    // sup-normalize and insist on interior positivity: the first
    // eigenfunction is the unique positive one.
    let sup = w.max();
    if sup <= 0.0 {
        return Err(SpectralError::NonConvergence("nonpositive iterate".into()));
    }
    let phi = w.scale(1.0 / sup);
    for i in mesh.interior_nodes() {
        if phi.values()[i] <= 0.0 {
            return Err(SpectralError::DegenerateEigenfunction { node: i });
        }
    }
    Ok(EigenPair { r, sigma, phi })
}

/// Rayleigh quotient of an arbitrary field (diagnostic; the eigen solver
/// keeps this equal to `sigma` for its returned `phi`).
pub fn rayleigh_quotient(w: &Field, r: f64, mesh: &Mesh, degree: usize) -> Result<f64, FemError> {
    Ok(dirichlet_energy_r(w, r, mesh)? / r_norm_pow(w, r, mesh, degree)?)
}

/// Solve the torsion problem `-Δ_r ω = 1`, `ω = 0` on the boundary.
pub fn torsion_function(
    mesh: &Mesh,
    r: f64,
    opts: &SolverOptions,
) -> Result<TorsionData, SpectralError> {
    let one = Field::constant(mesh, 1.0);
    let sol = solve_scalar_dirichlet(r, &one, mesh, opts)?;
    let nu = sol.field.max();
    if nu <= 0.0 {
        return Err(SpectralError::NonConvergence(
            "torsion function not positive".into(),
        ));
    }
    Ok(TorsionData {
        r,
        omega: sol.field,
        nu,
    })
}

/// Strip values of a single eigenpair at a fixed width `delta`:
/// `(m, m_linear, eta)` over the discrete node sets.
pub fn strip_values_at(
    pair: &EigenPair,
    mesh: &Mesh,
    delta: f64,
) -> Result<(f64, f64, f64), SpectralError> {
    let scan = StripScan::new(&[pair], mesh)?;
    let v = scan.values_at(delta);
    Ok((v.m, v.m_linear, v.eta))
}

struct StripScan {
    /// per pair: (r, sigma, phi values, |∇φ| at nodes)
    data: Vec<(f64, f64, Vec<f64>, Vec<f64>)>,
    distances: Vec<f64>,
    boundary: Vec<bool>,
}

#[derive(Debug, Clone, Copy)]
struct StripValues {
    m: f64,
    m_linear: f64,
    eta: f64,
}

impl StripScan {
    fn new(pairs: &[&EigenPair], mesh: &Mesh) -> Result<Self, SpectralError> {
        let mut data = Vec::new();
        for pair in pairs {
            pair.phi.on_mesh(mesh)?;
            let grads = nodal_gradients(&pair.phi, mesh)?;
            let gmag: Vec<f64> = grads
                .iter()
                .map(|g| (g[0] * g[0] + g[1] * g[1]).sqrt())
                .collect();
            data.push((pair.r, pair.sigma, pair.phi.values().to_vec(), gmag));
        }
        let distances = (0..mesh.node_count())
            .map(|i| mesh.boundary_distance(i))
            .collect();
        let boundary = (0..mesh.node_count())
            .map(|i| mesh.is_boundary(i))
            .collect();
        Ok(StripScan {
            data,
            distances,
            boundary,
        })
    }

    /// Strip membership follows the set `{x in Ω : d(x, ∂Ω) <= δ}` of the
    /// open domain, so boundary nodes belong to neither side.
    fn values_at(&self, delta: f64) -> StripValues {
        let mut m = f64::INFINITY;
        let mut m_linear = f64::INFINITY;
        let mut eta = f64::INFINITY;
        for (r, sigma, phi, gmag) in &self.data {
            for i in 0..self.distances.len() {
                if self.boundary[i] {
                    continue;
                }
                if self.distances[i] <= delta {
                    let gr = gmag[i].powf(*r);
                    m = m.min(gr - sigma * phi[i].powf(*r));
                    m_linear = m_linear.min(gr - sigma * phi[i]);
                } else {
                    eta = eta.min(phi[i]);
                }
            }
        }
        StripValues { m, m_linear, eta }
    }
}

/// Scan candidate strip widths and return admissible constants.
///
/// Among widths with `m(δ) > 0` and `η(δ) > 0` the scan maximizes
/// `log m + r·log η`. Maximizing `m` alone degenerates to vanishing widths
/// where `η` collapses with the mesh size (and the downstream thresholds
/// blow up); the balanced objective tracks the quantity
/// `(k₀ η^r / m)^{1/(r-1)}` that the subsolution feasibility condition
/// actually consumes, and stabilizes under refinement.
pub fn strip_constants_joint(
    pairs: &[&EigenPair],
    mesh: &Mesh,
) -> Result<StripConstants, SpectralError> {
    let scan = StripScan::new(pairs, mesh)?;
    let r_max = pairs.iter().map(|p| p.r).fold(1.0f64, f64::max);
    let inradius = mesh.inradius();
    let lo = inradius / 1000.0;
    let hi = inradius * 0.9;
    let mut best: Option<(f64, StripConstants)> = None;
    for k in 0..64 {
        let delta = lo * (hi / lo).powf(k as f64 / 63.0);
        let v = scan.values_at(delta);
        // a candidate needs interior nodes on both sides of the split
        if !v.m.is_finite() || !v.eta.is_finite() {
            continue;
        }
        if v.m > 0.0 && v.eta > 0.0 {
            let objective = v.m.ln() + r_max * v.eta.ln();
            let cand = StripConstants {
                m: v.m,
                eta: v.eta,
                delta,
                m_linear: v.m_linear,
            };
            if best.as_ref().map_or(true, |(o, _)| objective > *o) {
                best = Some((objective, cand));
            }
        }
    }
    best.map(|(_, c)| c).ok_or(SpectralError::StripFailure)
}

/// Strip constants of a single eigenpair.
pub fn strip_constants(pair: &EigenPair, mesh: &Mesh) -> Result<StripConstants, SpectralError> {
    strip_constants_joint(&[pair], mesh)
}

/// Eigenpair plus strip constants in one call.
pub fn eigen_data(mesh: &Mesh, r: f64, opts: &EigenOptions) -> Result<EigenData, SpectralError> {
    let pair = first_eigenpair(mesh, r, opts)?;
    let strip = strip_constants(&pair, mesh)?;
    Ok(EigenData { pair, strip })
}

/// Comparability constants of two positive eigenfunctions:
/// `phi_p <= C1 phi_q` and `phi_q <= C2 phi_p` at interior nodes.
pub fn comparability_constants(
    phi_p: &Field,
    phi_q: &Field,
    mesh: &Mesh,
) -> Result<(f64, f64), SpectralError> {
    phi_p.on_mesh(mesh)?;
    phi_q.on_mesh(mesh)?;
    let mut c1 = 0.0f64;
    let mut c2 = 0.0f64;
    for i in mesh.interior_nodes() {
        let (a, b) = (phi_p.values()[i], phi_q.values()[i]);
        if a <= 0.0 || b <= 0.0 {
            return Err(SpectralError::DegenerateEigenfunction { node: i });
        }
        c1 = c1.max(a / b);
        c2 = c2.max(b / a);
    }
    Ok((c1, c2))
}

/// Closed-form first eigenvalue of the 1D r-Laplacian on the unit interval:
/// `(r-1) π_r^r` with `π_r = 2π / (r sin(π/r))`.
pub fn eigenvalue_1d_exact(r: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let pi_r = 2.0 * pi / (r * (pi / r).sin());
    (r - 1.0) * pi_r.powf(r)
}
