//! Discrete sub-/supersolution inequality checks.
//!
//! A pair `(u, v)` is a discrete subsolution when, for every interior hat
//! function ξ_i (hat functions are nonnegative, so they span the discrete
//! test cone),
//!
//! `∫|∇u|^{p-2}∇u·∇ξ_i - ∫|u|^{p-2}u ξ_i - λ₁∫a f(v) ξ_i - μ₁∫α h(u) ξ_i <= 0`
//!
//! together with the analogous inequality for the second component; a
//! supersolution reverses the sign. The report carries the worst signed
//! violation and the magnitude scale the tolerance was measured against.

use serde::Serialize;

use crate::fem::field::Field;
use crate::fem::forms::{p_laplacian_vec, power_mass_vec, weighted_source_vec};
use crate::fem::FemError;
use crate::mesh::Mesh;
use crate::nonlinearity::NonlinearityQuad;
use crate::problem::ProblemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Sub,
    Super,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    U,
    V,
}

/// Outcome of one inequality check.
#[derive(Debug, Clone, Serialize)]
pub struct SubSuperReport {
    pub side: Side,
    pub component: Component,
    /// Max signed violation over interior basis functions: positive means
    /// the inequality failed somewhere by that much.
    pub violation: f64,
    /// Absolute tolerance the violation was compared against.
    pub tolerance: f64,
    /// Max absolute weak-form entry, the scale behind the tolerance.
    pub scale: f64,
    pub passed: bool,
    /// Index of the interior node with the worst violation.
    pub worst_node: usize,
}

/// Relative tolerance (times the weak-form scale) used when none is given.
pub const DEFAULT_VIOLATION_RTOL: f64 = 1e-8;

/// Check both components of the Definition-2.2 inequality for the pair
/// `(pair_u, pair_v)` on the given side. `rtol` scales with the largest
/// weak-form entry; `None` uses [`DEFAULT_VIOLATION_RTOL`].
pub fn check_subsuper(
    pair_u: &Field,
    pair_v: &Field,
    side: Side,
    params: &ProblemParams,
    nl: &NonlinearityQuad,
    mesh: &Mesh,
    degree: usize,
    rtol: Option<f64>,
) -> Result<Vec<SubSuperReport>, FemError> {
    pair_u.on_mesh(mesh)?;
    pair_v.on_mesh(mesh)?;
    let btol = 1e-10 * (1.0 + pair_u.max_abs().max(pair_v.max_abs()));
    if !pair_u.is_zero_on_boundary(mesh, btol) || !pair_v.is_zero_on_boundary(mesh, btol) {
        return Err(FemError::BoundaryCondition);
    }
    let rtol = rtol.unwrap_or(DEFAULT_VIOLATION_RTOL);

    let mut out = Vec::with_capacity(2);

    // u component: LHS terms with (p, a, f(v), alpha, h(u))
    {
        let grad = p_laplacian_vec(pair_u, params.p, 0.0, mesh)?;
        let mass = power_mass_vec(pair_u, params.p, mesh, degree)?;
        let src_f = weighted_source_vec(&params.a, &nl.f, pair_v, mesh, degree)?;
        let src_h = weighted_source_vec(&params.alpha, &nl.h, pair_u, mesh, degree)?;
        out.push(component_report(
            mesh,
            side,
            Component::U,
            rtol,
            &grad,
            &mass,
            &src_f,
            params.lambda1,
            &src_h,
            params.mu1,
        ));
    }
    // v component: (q, b, g(u), beta, gamma(v))
    {
        let grad = p_laplacian_vec(pair_v, params.q, 0.0, mesh)?;
        let mass = power_mass_vec(pair_v, params.q, mesh, degree)?;
        let src_g = weighted_source_vec(&params.b, &nl.g, pair_u, mesh, degree)?;
        let src_c = weighted_source_vec(&params.beta, &nl.gamma, pair_v, mesh, degree)?;
        out.push(component_report(
            mesh,
            side,
            Component::V,
            rtol,
            &grad,
            &mass,
            &src_g,
            params.lambda2,
            &src_c,
            params.mu2,
        ));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn component_report(
    mesh: &Mesh,
    side: Side,
    component: Component,
    rtol: f64,
    grad: &[f64],
    mass: &[f64],
    src_a: &[f64],
    rate_a: f64,
    src_b: &[f64],
    rate_b: f64,
) -> SubSuperReport {
    let sign = match side {
        Side::Sub => 1.0,
        Side::Super => -1.0,
    };
    let mut violation = f64::NEG_INFINITY;
    let mut scale = 0.0f64;
    let mut worst = 0usize;
    for i in 0..mesh.node_count() {
        if mesh.is_boundary(i) {
            continue;
        }
        let lhs = grad[i] - mass[i];
        let rhs = rate_a * src_a[i] + rate_b * src_b[i];
        let gap = sign * (lhs - rhs);
        if gap > violation {
            violation = gap;
            worst = i;
        }
        scale = scale
            .max(grad[i].abs())
            .max(mass[i].abs())
            .max((rate_a * src_a[i]).abs())
            .max((rate_b * src_b[i]).abs());
    }
    let tolerance = rtol * scale.max(1e-300);
    SubSuperReport {
        side,
        component,
        violation,
        tolerance,
        scale,
        passed: violation <= tolerance,
        worst_node: worst,
    }
}

/// True when every report in the slice passed.
pub fn all_passed(reports: &[SubSuperReport]) -> bool {
    reports.iter().all(|r| r.passed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::forms::DEFAULT_QUAD_DEGREE;
    use crate::mesh::build_interval_mesh;
    use crate::nonlinearity::NonlinearitySpec;

    fn zero_at_zero_quad() -> NonlinearityQuad {
        NonlinearityQuad {
            f: NonlinearitySpec::power(2.0),
            g: NonlinearitySpec::power(2.0),
            h: NonlinearitySpec::power(2.0),
            gamma: NonlinearitySpec::power(2.0),
        }
    }

    #[test]
    fn zero_pair_passes_sub_with_zero_violation() {
        let mesh = build_interval_mesh(16).unwrap();
        let params = ProblemParams::new(2.0, 2.0).with_rates(1.0, 1.0, 1.0, 1.0);
        let nl = zero_at_zero_quad();
        let zero = Field::zeros(&mesh);
        let reports = check_subsuper(
            &zero,
            &zero,
            Side::Sub,
            &params,
            &nl,
            &mesh,
            DEFAULT_QUAD_DEGREE,
            None,
        )
        .unwrap();
        assert_eq!(reports.len(), 2);
        for r in &reports {
            assert!(r.passed);
            assert_eq!(r.violation, 0.0);
        }
    }

    #[test]
    fn torsion_scaled_is_supersolution_for_small_lambda() {
        // For p = q = 2, f(v) = v, h = 0: u = s·ω with -Δu = s satisfies
        // the supersolution inequality when s - s·ω ≥ λ·s·ω nodally,
        // i.e. λ ≤ (1 - ν)/ν with ν = 1/8.
        let mesh = build_interval_mesh(64).unwrap();
        let opts = crate::fem::SolverOptions::default();
        let one = Field::constant(&mesh, 1.0);
        let omega = crate::fem::newton::solve_scalar_dirichlet(2.0, &one, &mesh, &opts)
            .unwrap()
            .field;
        let sup = omega.scale(4.0);
        let params = ProblemParams::new(2.0, 2.0).with_rates(1.0, 0.0, 1.0, 0.0);
        let nl = NonlinearityQuad {
            f: NonlinearitySpec::power(1.0),
            g: NonlinearitySpec::power(1.0),
            h: NonlinearitySpec::power(1.0),
            gamma: NonlinearitySpec::power(1.0),
        };
        let params = {
            let mut p = params;
            p.mu1 = 0.0;
            p.mu2 = 0.0;
            p
        };
        let reports = check_subsuper(
            &sup,
            &sup,
            Side::Super,
            &params,
            &nl,
            &mesh,
            DEFAULT_QUAD_DEGREE,
            None,
        )
        .unwrap();
        assert!(all_passed(&reports), "{reports:?}");
        // and it is NOT a subsolution: the sub side must fail
        let reports = check_subsuper(
            &sup,
            &sup,
            Side::Sub,
            &params,
            &nl,
            &mesh,
            DEFAULT_QUAD_DEGREE,
            None,
        )
        .unwrap();
        assert!(!all_passed(&reports));
    }

    #[test]
    fn rejects_nonzero_boundary_pair() {
        let mesh = build_interval_mesh(8).unwrap();
        let params = ProblemParams::new(2.0, 2.0);
        let nl = zero_at_zero_quad();
        let bad = Field::constant(&mesh, 0.5);
        let zero = Field::zeros(&mesh);
        assert!(check_subsuper(
            &bad,
            &zero,
            Side::Sub,
            &params,
            &nl,
            &mesh,
            DEFAULT_QUAD_DEGREE,
            None
        )
        .is_err());
    }
}
