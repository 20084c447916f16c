//! P1 weak forms: the regularized p-Laplacian form, power mass form,
//! weighted nonlinear sources, and the system weak residual.
//!
//! P1 gradients are constant per element, so the gradient form needs no
//! quadrature; zeroth-order integrands are handled by the Gauss rules in
//! [`crate::fem::quad`]. All assembly loops run in element order with
//! fixed summation order, which keeps runs bitwise reproducible.

use crate::fem::field::Field;
use crate::fem::quad::rule_for;
use crate::fem::FemError;
use crate::mesh::Mesh;
use crate::nonlinearity::NonlinearitySpec;
use crate::problem::{ProblemParams, WeightField};

/// Default polynomial degree targeted by the nonlinear-term quadrature.
pub const DEFAULT_QUAD_DEGREE: usize = 4;

/// Gradient of the P1 interpolant of `values` on element `e`.
pub fn element_gradient(mesh: &Mesh, values: &[f64], e: usize) -> [f64; 2] {
    let geo = mesh.geometry(e);
    let nodes = mesh.element(e);
    let mut g = [0.0, 0.0];
    for (k, &n) in nodes.iter().enumerate() {
        g[0] += values[n] * geo.grads[k][0];
        g[1] += values[n] * geo.grads[k][1];
    }
    g
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Regularized p-Laplacian weight `(|g|^2 + eps)^{(p-2)/2}`, with the
/// degenerate limit handled: a zero gradient contributes nothing for p > 1.
fn plap_weight(g2: f64, p: f64, eps: f64) -> f64 {
    let s = g2 + eps;
    if s <= 0.0 {
        0.0
    } else {
        s.powf(0.5 * (p - 2.0))
    }
}

/// `∫ (|∇u|² + eps)^{(p-2)/2} ∇u · ∇ξ dx` over the whole mesh.
pub fn apply_p_laplacian_form(
    u: &Field,
    xi: &Field,
    p: f64,
    eps: f64,
    mesh: &Mesh,
) -> Result<f64, FemError> {
    u.on_mesh(mesh)?;
    xi.on_mesh(mesh)?;
    let (uv, xv) = (u.values(), xi.values());
    let mut acc = 0.0;
    for e in 0..mesh.element_count() {
        let gu = element_gradient(mesh, uv, e);
        let gx = element_gradient(mesh, xv, e);
        let g2 = dot(gu, gu);
        let w = plap_weight(g2, p, eps);
        if w != 0.0 {
            acc += w * dot(gu, gx) * mesh.geometry(e).measure;
        }
    }
    Ok(acc)
}

/// `∫ |u|^{p-2} u ξ dx` by Gauss quadrature of the requested degree.
pub fn apply_power_mass_form_deg(
    u: &Field,
    xi: &Field,
    p: f64,
    mesh: &Mesh,
    degree: usize,
) -> Result<f64, FemError> {
    u.on_mesh(mesh)?;
    xi.on_mesh(mesh)?;
    let rule = rule_for(mesh.verts_per_element(), degree);
    let (uv, xv) = (u.values(), xi.values());
    let mut acc = 0.0;
    for e in 0..mesh.element_count() {
        let nodes = mesh.element(e);
        let measure = mesh.geometry(e).measure;
        for qp in rule {
            let mut uq = 0.0;
            let mut xq = 0.0;
            for (k, &n) in nodes.iter().enumerate() {
                uq += qp.bary[k] * uv[n];
                xq += qp.bary[k] * xv[n];
            }
            acc += qp.weight * measure * signed_power(uq, p) * xq;
        }
    }
    Ok(acc)
}

/// Default-degree variant of [`apply_power_mass_form_deg`].
pub fn apply_power_mass_form(u: &Field, xi: &Field, p: f64, mesh: &Mesh) -> Result<f64, FemError> {
    apply_power_mass_form_deg(u, xi, p, mesh, DEFAULT_QUAD_DEGREE)
}

/// `|s|^{p-2} s`, continuous through zero for p > 1.
pub fn signed_power(s: f64, p: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.signum() * s.abs().powf(p - 1.0)
    }
}

/// Per-basis vector of the p-Laplacian form: entry `i` equals the form
/// applied to the hat function of node `i` (boundary entries included).
pub fn p_laplacian_vec(u: &Field, p: f64, eps: f64, mesh: &Mesh) -> Result<Vec<f64>, FemError> {
    u.on_mesh(mesh)?;
    let uv = u.values();
    let mut out = vec![0.0; mesh.node_count()];
    for e in 0..mesh.element_count() {
        let geo = mesh.geometry(e);
        let gu = element_gradient(mesh, uv, e);
        let w = plap_weight(dot(gu, gu), p, eps);
        if w == 0.0 {
            continue;
        }
        for (k, &n) in mesh.element(e).iter().enumerate() {
            out[n] += w * dot(gu, geo.grads[k]) * geo.measure;
        }
    }
    Ok(out)
}

/// Per-basis vector of `∫ |u|^{p-2} u ξ_i`.
pub fn power_mass_vec(u: &Field, p: f64, mesh: &Mesh, degree: usize) -> Result<Vec<f64>, FemError> {
    u.on_mesh(mesh)?;
    let rule = rule_for(mesh.verts_per_element(), degree);
    let uv = u.values();
    let mut out = vec![0.0; mesh.node_count()];
    for e in 0..mesh.element_count() {
        let nodes = mesh.element(e);
        let measure = mesh.geometry(e).measure;
        for qp in rule {
            let mut uq = 0.0;
            for (k, &n) in nodes.iter().enumerate() {
                uq += qp.bary[k] * uv[n];
            }
            let val = signed_power(uq, p);
            for (k, &n) in nodes.iter().enumerate() {
                out[n] += qp.weight * measure * val * qp.bary[k];
            }
        }
    }
    Ok(out)
}

/// Per-basis vector of `∫ w(x) spec(arg(x)) ξ_i dx`. The argument field is
/// clamped to `[0, ∞)` at quadrature points: iterates can undershoot zero by
/// roundoff and every nonlinearity lives on the half-line.
pub fn weighted_source_vec(
    weight: &WeightField,
    spec: &NonlinearitySpec,
    arg: &Field,
    mesh: &Mesh,
    degree: usize,
) -> Result<Vec<f64>, FemError> {
    arg.on_mesh(mesh)?;
    let rule = rule_for(mesh.verts_per_element(), degree);
    let av = arg.values();
    let mut out = vec![0.0; mesh.node_count()];
    for e in 0..mesh.element_count() {
        let nodes = mesh.element(e);
        let measure = mesh.geometry(e).measure;
        for qp in rule {
            let mut aq = 0.0;
            for (k, &n) in nodes.iter().enumerate() {
                aq += qp.bary[k] * av[n];
            }
            let wq = weight.at(nodes, &qp.bary);
            let val = wq * spec.eval_unchecked(aq);
            for (k, &n) in nodes.iter().enumerate() {
                out[n] += qp.weight * measure * val * qp.bary[k];
            }
        }
    }
    Ok(out)
}

/// Load vector `∫ r ξ_i dx` of a P1 source field.
pub fn load_vec(rhs: &Field, mesh: &Mesh, degree: usize) -> Result<Vec<f64>, FemError> {
    rhs.on_mesh(mesh)?;
    let rule = rule_for(mesh.verts_per_element(), degree);
    let rv = rhs.values();
    let mut out = vec![0.0; mesh.node_count()];
    for e in 0..mesh.element_count() {
        let nodes = mesh.element(e);
        let measure = mesh.geometry(e).measure;
        for qp in rule {
            let mut rq = 0.0;
            for (k, &n) in nodes.iter().enumerate() {
                rq += qp.bary[k] * rv[n];
            }
            for (k, &n) in nodes.iter().enumerate() {
                out[n] += qp.weight * measure * rq * qp.bary[k];
            }
        }
    }
    Ok(out)
}

/// Regularized p-Dirichlet energy `∫ ((|∇u|²+eps)^{p/2} - eps^{p/2}) / p`.
pub fn p_energy(u: &Field, p: f64, eps: f64, mesh: &Mesh) -> Result<f64, FemError> {
    u.on_mesh(mesh)?;
    let uv = u.values();
    let mut acc = 0.0;
    let floor = if eps > 0.0 { eps.powf(0.5 * p) } else { 0.0 };
    for e in 0..mesh.element_count() {
        let gu = element_gradient(mesh, uv, e);
        let s = dot(gu, gu) + eps;
        let dens = if s <= 0.0 { 0.0 } else { s.powf(0.5 * p) };
        acc += (dens - floor) / p * mesh.geometry(e).measure;
    }
    Ok(acc)
}

/// Measure-weighted average of the element gradients adjacent to each node.
/// Used only for strip-constant evaluation; assembly always works with the
/// element gradients directly.
pub fn nodal_gradients(u: &Field, mesh: &Mesh) -> Result<Vec<[f64; 2]>, FemError> {
    u.on_mesh(mesh)?;
    let uv = u.values();
    let mut acc = vec![[0.0; 2]; mesh.node_count()];
    let mut vol = vec![0.0; mesh.node_count()];
    for e in 0..mesh.element_count() {
        let g = element_gradient(mesh, uv, e);
        let measure = mesh.geometry(e).measure;
        for &n in mesh.element(e) {
            acc[n][0] += g[0] * measure;
            acc[n][1] += g[1] * measure;
            vol[n] += measure;
        }
    }
    for (a, v) in acc.iter_mut().zip(&vol) {
        if *v > 0.0 {
            a[0] /= v;
            a[1] /= v;
        }
    }
    Ok(acc)
}

/// Discrete weak residual of one equation: the assembled entries against
/// every interior hat function, the max-norm over those entries, and the
/// magnitude scale of the individual terms (for relative tolerances).
#[derive(Debug, Clone)]
pub struct WeakResidual {
    pub values: Vec<f64>,
    pub norm: f64,
    pub term_scale: f64,
}

impl WeakResidual {
    fn from_terms(mesh: &Mesh, terms: &[&[f64]], signs: &[f64]) -> WeakResidual {
        let n = mesh.node_count();
        let mut values = vec![0.0; n];
        let mut norm = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..n {
            if mesh.is_boundary(i) {
                continue;
            }
            let mut v = 0.0;
            let mut s = 0.0;
            for (t, sg) in terms.iter().zip(signs) {
                v += sg * t[i];
                s += t[i].abs();
            }
            values[i] = v;
            norm = norm.max(v.abs());
            scale = scale.max(s);
        }
        WeakResidual {
            values,
            norm,
            term_scale: scale,
        }
    }

    /// Residual norm relative to the size of the weak-form terms.
    pub fn relative_norm(&self) -> f64 {
        self.norm / self.term_scale.max(1.0)
    }
}

/// Both equations' weak residuals for a candidate pair `(u, v)`.
///
/// `residual_u[i] = ∫|∇u|^{p-2}∇u·∇ξ_i - ∫|u|^{p-2}u ξ_i
///                  - λ₁∫a f(v) ξ_i - μ₁∫α h(u) ξ_i`
/// and symmetrically for `v` with `(q, b, g, β, γ)`.
pub fn weak_residual_system(
    u: &Field,
    v: &Field,
    params: &ProblemParams,
    nl: &crate::nonlinearity::NonlinearityQuad,
    mesh: &Mesh,
    degree: usize,
) -> Result<(WeakResidual, WeakResidual), FemError> {
    u.on_mesh(mesh)?;
    v.on_mesh(mesh)?;
    let btol = 1e-10 * (1.0 + u.max_abs().max(v.max_abs()));
    if !u.is_zero_on_boundary(mesh, btol) || !v.is_zero_on_boundary(mesh, btol) {
        return Err(FemError::BoundaryCondition);
    }

    let grad_u = p_laplacian_vec(u, params.p, 0.0, mesh)?;
    let mass_u = power_mass_vec(u, params.p, mesh, degree)?;
    let mut src_fu = weighted_source_vec(&params.a, &nl.f, v, mesh, degree)?;
    let mut src_hu = weighted_source_vec(&params.alpha, &nl.h, u, mesh, degree)?;
    src_fu.iter_mut().for_each(|x| *x *= params.lambda1);
    src_hu.iter_mut().for_each(|x| *x *= params.mu1);
    let ru = WeakResidual::from_terms(
        mesh,
        &[&grad_u, &mass_u, &src_fu, &src_hu],
        &[1.0, -1.0, -1.0, -1.0],
    );

    let grad_v = p_laplacian_vec(v, params.q, 0.0, mesh)?;
    let mass_v = power_mass_vec(v, params.q, mesh, degree)?;
    let mut src_gv = weighted_source_vec(&params.b, &nl.g, u, mesh, degree)?;
    let mut src_cv = weighted_source_vec(&params.beta, &nl.gamma, v, mesh, degree)?;
    src_gv.iter_mut().for_each(|x| *x *= params.lambda2);
    src_cv.iter_mut().for_each(|x| *x *= params.mu2);
    let rv = WeakResidual::from_terms(
        mesh,
        &[&grad_v, &mass_v, &src_gv, &src_cv],
        &[1.0, -1.0, -1.0, -1.0],
    );

    Ok((ru, rv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_interval_mesh, build_square_mesh};
    use crate::nonlinearity::{NonlinearityQuad, NonlinearitySpec};

    fn linear_x(mesh: &Mesh) -> Field {
        Field::from_fn(mesh, |c| c[0])
    }

    #[test]
    fn plap_form_hand_values() {
        let m = build_interval_mesh(16).unwrap();
        let x = linear_x(&m);
        // p = 2: ∫ 1 dx = 1
        let v = apply_p_laplacian_form(&x, &x, 2.0, 0.0, &m).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        // p = 3, unit gradient: |1|^1 · 1 · 1 = 1
        let v = apply_p_laplacian_form(&x, &x, 3.0, 0.0, &m).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        // p = 3, u = 2x: |2|·2·1 = 4
        let u = x.scale(2.0);
        let v = apply_p_laplacian_form(&u, &x, 3.0, 0.0, &m).unwrap();
        assert!((v - 4.0).abs() < 1e-13);
    }

    #[test]
    fn plap_form_mesh_mismatch() {
        let m1 = build_interval_mesh(4).unwrap();
        let m2 = build_interval_mesh(4).unwrap();
        let u = linear_x(&m1);
        let xi = linear_x(&m2);
        assert!(matches!(
            apply_p_laplacian_form(&u, &xi, 2.0, 0.0, &m1),
            Err(FemError::MeshMismatch)
        ));
    }

    #[test]
    fn plap_zero_gradient_degenerate_limit() {
        // p < 2 with a flat field: the eps = 0 weight is singular but the
        // form value must be 0, not NaN.
        let m = build_interval_mesh(8).unwrap();
        let u = Field::constant(&m, 1.0);
        let xi = linear_x(&m);
        let v = apply_p_laplacian_form(&u, &xi, 1.5, 0.0, &m).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn mass_form_values() {
        let m = build_interval_mesh(32).unwrap();
        let one = Field::constant(&m, 1.0);
        let v = apply_power_mass_form(&one, &one, 2.0, &m).unwrap();
        assert!((v - 1.0).abs() < 1e-14);

        let x = linear_x(&m);
        let v = apply_power_mass_form(&x, &x, 2.0, &m).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-14, "∫x² = 1/3, got {v}");

        let zero = Field::zeros(&m);
        for p in [1.5, 2.0, 3.0] {
            assert_eq!(apply_power_mass_form(&zero, &x, p, &m).unwrap(), 0.0);
        }
    }

    #[test]
    fn residual_vectors_match_forms_on_hats() {
        let m = build_square_mesh(4).unwrap();
        let u = Field::from_fn(&m, |c| c[0] * (1.0 - c[0]) * c[1]);
        let p = 2.7;
        let vec = p_laplacian_vec(&u, p, 1e-3, &m).unwrap();
        let mvec = power_mass_vec(&u, p, &m, DEFAULT_QUAD_DEGREE).unwrap();
        for i in [5, 6, 12] {
            let mut hat = Field::zeros(&m);
            hat.values_mut()[i] = 1.0;
            let f = apply_p_laplacian_form(&u, &hat, p, 1e-3, &m).unwrap();
            assert!((f - vec[i]).abs() < 1e-13);
            let g = apply_power_mass_form(&u, &hat, p, &m).unwrap();
            assert!((g - mvec[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn homogeneity_properties() {
        let m = build_interval_mesh(16).unwrap();
        let u = Field::from_fn(&m, |c| (std::f64::consts::PI * c[0]).sin());
        let xi = Field::from_fn(&m, |c| c[0] * (1.0 - c[0]));
        for p in [1.5, 2.0, 3.0] {
            let base = apply_p_laplacian_form(&u, &xi, p, 0.0, &m).unwrap();
            // 1-homogeneous in xi
            let double_xi = apply_p_laplacian_form(&u, &xi.scale(2.0), p, 0.0, &m).unwrap();
            assert!((double_xi - 2.0 * base).abs() < 1e-12 * base.abs().max(1.0));
            // (p-1)-homogeneous in u
            for c in [2.0, -1.5] {
                let scaled = apply_p_laplacian_form(&u.scale(c), &xi, p, 0.0, &m).unwrap();
                let expect = c * c.abs().powf(p - 2.0) * base;
                assert!(
                    (scaled - expect).abs() < 1e-11 * expect.abs().max(1.0),
                    "p={p} c={c}: {scaled} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn symmetry_only_at_p_two() {
        let m = build_interval_mesh(16).unwrap();
        let u = Field::from_fn(&m, |c| (std::f64::consts::PI * c[0]).sin());
        let xi = Field::from_fn(&m, |c| c[0] * c[0] * (1.0 - c[0]));
        let a = apply_p_laplacian_form(&u, &xi, 2.0, 0.0, &m).unwrap();
        let b = apply_p_laplacian_form(&xi, &u, 2.0, 0.0, &m).unwrap();
        assert!((a - b).abs() < 1e-13);
        let a = apply_p_laplacian_form(&u, &xi, 3.0, 0.0, &m).unwrap();
        let b = apply_p_laplacian_form(&xi, &u, 3.0, 0.0, &m).unwrap();
        assert!((a - b).abs() > 1e-6);
    }

    #[test]
    fn energy_gradient_matches_finite_differences() {
        let m = build_square_mesh(4).unwrap();
        let u = Field::from_fn(&m, |c| (c[0] - 0.3) * (c[1] + 0.2));
        let dir = Field::from_fn(&m, |c| (3.1 * c[0] + 1.7 * c[1]).sin());
        for p in [1.5, 2.0, 3.0] {
            let analytic = apply_p_laplacian_form(&u, &dir, p, 0.0, &m).unwrap();
            let step = 1e-6;
            let ep = p_energy(
                &Field::new(
                    &m,
                    u.values()
                        .iter()
                        .zip(dir.values())
                        .map(|(a, b)| a + step * b)
                        .collect(),
                )
                .unwrap(),
                p,
                0.0,
                &m,
            )
            .unwrap();
            let em = p_energy(
                &Field::new(
                    &m,
                    u.values()
                        .iter()
                        .zip(dir.values())
                        .map(|(a, b)| a - step * b)
                        .collect(),
                )
                .unwrap(),
                p,
                0.0,
                &m,
            )
            .unwrap();
            let fd = (ep - em) / (2.0 * step);
            assert!(
                (analytic - fd).abs() <= 1e-5 * analytic.abs().max(1.0),
                "p={p}: {analytic} vs {fd}"
            );
        }
    }

    #[test]
    fn residual_zero_cases() {
        let m = build_interval_mesh(16).unwrap();
        let nl = NonlinearityQuad {
            f: NonlinearitySpec::power(2.0),
            g: NonlinearitySpec::power(2.0),
            h: NonlinearitySpec::power(2.0),
            gamma: NonlinearitySpec::power(2.0),
        };
        let params = ProblemParams::new(2.0, 2.0).with_rates(1.0, 1.0, 1.0, 1.0);
        let zero = Field::zeros(&m);
        let (ru, rv) =
            weak_residual_system(&zero, &zero, &params, &nl, &m, DEFAULT_QUAD_DEGREE).unwrap();
        assert_eq!(ru.norm, 0.0);
        assert_eq!(rv.norm, 0.0);
    }

    #[test]
    fn residual_rejects_nonzero_boundary() {
        let m = build_interval_mesh(8).unwrap();
        let nl = NonlinearityQuad::example_sqrt();
        let params = ProblemParams::new(2.0, 2.0);
        let bad = Field::constant(&m, 1.0);
        let zero = Field::zeros(&m);
        assert!(matches!(
            weak_residual_system(&bad, &zero, &params, &nl, &m, DEFAULT_QUAD_DEGREE),
            Err(FemError::BoundaryCondition)
        ));
    }
}
