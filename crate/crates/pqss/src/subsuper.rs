//! Explicit ordered sub-/supersolution pairs and the strict pair used by
//! the multiplicity driver.
//!
//! The subsolution is the eigenfunction power
//!
//! `u̲ = [(λ₁+μ₁) k₀ / m]^{1/(p-1)} ((p-1)/p) φ_p^{p/(p-1)}`
//!
//! (and its q-analogue), valid once the rates are large enough that the
//! four weighted nonlinearities clear `(k₀/m)·max{σ_p, σ_q}` off the
//! boundary strip. The supersolution scales torsion functions,
//!
//! `ū = (C/ν_p) E_p^{1/(p-1)} ω_p`,  `v̄ = [F_q g(C E_p^{1/(p-1)})]^{1/(q-1)} ω_q`,
//!
//! with `E_p = (λ₁‖a‖_∞+μ₁‖α‖_∞)/(1-ν_p^{p-1})` and the analogous `F_q`;
//! the scale `C` comes from a doubling search. Every "big enough"
//! quantifier in the construction is realized as a doubling search with a
//! bracketing result, and every returned pair carries its discrete
//! inequality certificates.

use thiserror::Error;

use crate::fem::field::Field;
use crate::fem::subcheck::{all_passed, check_subsuper, Side, SubSuperReport};
use crate::fem::FemError;
use crate::mesh::Mesh;
use crate::nonlinearity::{flatness_ok, NonlinearityError, NonlinearityQuad};
use crate::problem::ProblemParams;
use crate::spectral::{
    comparability_constants, strip_constants_joint, EigenPair, SpectralError, StripConstants,
    TorsionData,
};

/// Doubling searches stop at 2^60.
pub const SEARCH_CAP: f64 = (1u64 << 60) as f64;

#[derive(Debug, Error)]
pub enum SubSuperError {
    #[error("rates too small: {detail} (worst margin {margin:.3e})")]
    LambdaTooSmall { margin: f64, detail: String },
    #[error("existence threshold not reached below cap {cap:.3e}")]
    ThresholdUnreachable { cap: f64 },
    #[error("domain too large: nu_{r} = {nu} gives nonpositive 1 - nu^(r-1)")]
    DomainTooLarge { r: f64, nu: f64 },
    #[error("supersolution scale search exhausted at C = {c:.3e}")]
    SupersolutionSearchFailure { c: f64 },
    #[error("first eigenvalue sigma_{r} = {sigma} must exceed 1")]
    SpectralGap { r: f64, sigma: f64 },
    #[error("flatness condition at zero violated for {which}")]
    FlatnessViolation { which: String },
    #[error("no positive strict-supersolution scale: G nonpositive on the whole grid")]
    NoTheta,
    #[error("noncomparability witness not found after {halvings} halvings of rho")]
    NoncomparabilityFailure { halvings: usize },
    #[error("constructed pair failed its certificate: {0}")]
    CertificateFailure(String),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Nonlinearity(#[from] NonlinearityError),
}

/// An ordered pair of sub- and supersolutions with certificates.
///
/// `c`, `k0` and `strip` are present when the pair came out of the explicit
/// construction; a pair certified from user-supplied fields carries `None`.
#[derive(Debug, Clone)]
pub struct OrderedPair {
    pub sub_u: Field,
    pub sub_v: Field,
    pub super_u: Field,
    pub super_v: Field,
    /// Supersolution scale constant.
    pub c: Option<f64>,
    pub k0: Option<f64>,
    /// Joint strip constants behind the subsolution scale.
    pub strip: Option<StripConstants>,
    /// Four inequality certificates: sub-u, sub-v, super-u, super-v.
    pub certificates: Vec<SubSuperReport>,
    pub ordering_ok: bool,
}

impl OrderedPair {
    pub fn all_certified(&self) -> bool {
        self.ordering_ok && all_passed(&self.certificates)
    }
}

/// Certify four user-supplied fields as an ordered pair: runs both
/// Definition-2.2 checks and the nodal ordering, errors if anything fails.
pub fn certify_pair(
    sub_u: Field,
    sub_v: Field,
    super_u: Field,
    super_v: Field,
    params: &ProblemParams,
    nl: &NonlinearityQuad,
    mesh: &Mesh,
    degree: usize,
) -> Result<OrderedPair, SubSuperError> {
    let mut certs = check_subsuper(&sub_u, &sub_v, Side::Sub, params, nl, mesh, degree, None)?;
    certs.extend(check_subsuper(
        &super_u, &super_v, Side::Super, params, nl, mesh, degree, None,
    )?);
    let tol = 1e-12 * super_u.max_abs().max(super_v.max_abs()).max(1.0);
    let ordering_ok = sub_u.le_nodal(&super_u, tol) && sub_v.le_nodal(&super_v, tol);
    let pair = OrderedPair {
        sub_u,
        sub_v,
        super_u,
        super_v,
        c: None,
        k0: None,
        strip: None,
        certificates: certs,
        ordering_ok,
    };
    if !pair.all_certified() {
        return Err(SubSuperError::CertificateFailure(
            "user-supplied pair failed certification".into(),
        ));
    }
    Ok(pair)
}

/// Strict pair for the multiplicity argument: a strict subsolution
/// `(ω₁, ω₂)` (a positive solution of the shifted system) that is not
/// dominated by the strict supersolution `(ζ₁, ζ₂) = (ρ φ_p, ρ φ_q)`.
#[derive(Debug, Clone)]
pub struct StrictPair {
    pub omega1: Field,
    pub omega2: Field,
    pub zeta1: Field,
    pub zeta2: Field,
    pub rho: f64,
    pub theta: f64,
    pub c1: f64,
    pub c2: f64,
    /// Witness that `(ω₁, ω₂)` is not below `(ζ₁, ζ₂)` everywhere.
    pub noncomparability: bool,
    /// Smallest nodal gate margin over interior nodes, and the margin at
    /// the eigenfunction peak (which must be strictly positive).
    pub g_margin_min: f64,
    pub g_margin_peak: f64,
    pub certificates: Vec<SubSuperReport>,
}

/// Joint strip constants for the two eigenpairs: the scan minimizes over
/// both `r = p` and `r = q` node sets so one `(m, η, δ)` serves both
/// components, which is what the subsolution scale formula assumes.
pub fn joint_strip(
    eig_p: &EigenPair,
    eig_q: &EigenPair,
    mesh: &Mesh,
) -> Result<StripConstants, SubSuperError> {
    Ok(strip_constants_joint(&[eig_p, eig_q], mesh)?)
}

/// Evaluate the explicit subsolution fields at the given rates. Pure
/// formula evaluation; no feasibility checks.
pub fn subsolution_fields(
    params: &ProblemParams,
    eig_p: &EigenPair,
    eig_q: &EigenPair,
    strip: &StripConstants,
    k0: f64,
) -> (Field, Field) {
    let scale = |sum: f64, r: f64| (sum * k0 / strip.m).powf(1.0 / (r - 1.0)) * ((r - 1.0) / r);
    let su = scale(params.sum1(), params.p);
    let sv = scale(params.sum2(), params.q);
    let pu = params.p / (params.p - 1.0);
    let qv = params.q / (params.q - 1.0);
    let sub_u = eig_p.phi.map(|v| su * v.max(0.0).powf(pu));
    let sub_v = eig_q.phi.map(|v| sv * v.max(0.0).powf(qv));
    (sub_u, sub_v)
}

/// Build the subsolution and verify both the off-strip growth condition
/// and the discrete subsolution inequalities.
#[allow(clippy::too_many_arguments)]
pub fn construct_subsolution(
    params: &ProblemParams,
    eig_p: &EigenPair,
    eig_q: &EigenPair,
    strip: &StripConstants,
    k0: f64,
    nl: &NonlinearityQuad,
    mesh: &Mesh,
    degree: usize,
) -> Result<(Field, Field, Vec<SubSuperReport>), SubSuperError> {
    if !(params.sum1() > 0.0 && params.sum2() > 0.0) {
        return Err(SubSuperError::LambdaTooSmall {
            margin: f64::NEG_INFINITY,
            detail: "lambda + mu must be positive in both equations".into(),
        });
    }
    let (sub_u, sub_v) = subsolution_fields(params, eig_p, eig_q, strip, k0);

    // growth condition off the strip: all four weighted nonlinearities
    // must clear (k0/m)·max(sigma_p, sigma_q) at nodes beyond delta
    let bounds = params.weight_bounds();
    let level = k0 / strip.m * eig_p.sigma.max(eig_q.sigma);
    let mut worst = f64::INFINITY;
    let mut worst_what = "";
    for i in mesh.interior_nodes() {
        if mesh.boundary_distance(i) <= strip.delta {
            continue;
        }
        let us = sub_u.values()[i];
        let vs = sub_v.values()[i];
        let checks = [
            ("a1*f(sub_v)", bounds.a1 * nl.f.eval_unchecked(vs)),
            ("alpha1*h(sub_u)", bounds.alpha1 * nl.h.eval_unchecked(us)),
            ("b1*g(sub_u)", bounds.b1 * nl.g.eval_unchecked(us)),
            (
                "beta1*gamma(sub_v)",
                bounds.beta1 * nl.gamma.eval_unchecked(vs),
            ),
        ];
        for (what, val) in checks {
            let margin = val - level;
            if margin < worst {
                worst = margin;
                worst_what = what;
            }
        }
    }
    if worst < 0.0 {
        return Err(SubSuperError::LambdaTooSmall {
            margin: worst,
            detail: format!("off-strip growth condition fails for {worst_what}"),
        });
    }

    let reports = check_subsuper(&sub_u, &sub_v, Side::Sub, params, nl, mesh, degree, None)?;
    if !all_passed(&reports) {
        return Err(SubSuperError::CertificateFailure(format!(
            "subsolution inequality violated: {reports:?}"
        )));
    }
    Ok((sub_u, sub_v, reports))
}

/// Bracketing result of the doubling search on the rate sums.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ThresholdBracket {
    /// First sums `(λ₁+μ₁, λ₂+μ₂)` at which the subsolution construction
    /// succeeds.
    pub passing: (f64, f64),
    /// Last failing sums (zero when the search passed immediately).
    pub failing: (f64, f64),
}

/// Rescale the rates so each equation's sum matches the target while
/// preserving the λ/μ split of the template.
pub fn with_sums(template: &ProblemParams, sum1: f64, sum2: f64) -> ProblemParams {
    let mut p = template.clone();
    let split = |l: f64, m: f64, total: f64| -> (f64, f64) {
        let s = l + m;
        if s > 0.0 {
            (l / s * total, m / s * total)
        } else {
            (0.5 * total, 0.5 * total)
        }
    };
    let (l1, m1) = split(template.lambda1, template.mu1, sum1);
    let (l2, m2) = split(template.lambda2, template.mu2, sum2);
    p.lambda1 = l1;
    p.mu1 = m1;
    p.lambda2 = l2;
    p.mu2 = m2;
    p
}

/// Double `(λ₁+μ₁, λ₂+μ₂)` jointly from 1 until the subsolution
/// construction succeeds; returns the bracketing sums.
#[allow(clippy::too_many_arguments)]
pub fn existence_threshold(
    template: &ProblemParams,
    eig_p: &EigenPair,
    eig_q: &EigenPair,
    strip: &StripConstants,
    k0: f64,
    nl: &NonlinearityQuad,
    mesh: &Mesh,
    degree: usize,
) -> Result<ThresholdBracket, SubSuperError> {
    let mut sum = 1.0;
    let mut last_fail = 0.0;
    while sum <= SEARCH_CAP {
        let params = with_sums(template, sum, sum);
        match construct_subsolution(&params, eig_p, eig_q, strip, k0, nl, mesh, degree) {
            Ok(_) => {
                return Ok(ThresholdBracket {
                    passing: (sum, sum),
                    failing: (last_fail, last_fail),
                })
            }
            Err(SubSuperError::LambdaTooSmall { .. }) | Err(SubSuperError::CertificateFailure(_)) => {
                last_fail = sum;
                sum *= 2.0;
            }
            Err(e) => return Err(e),
        }
    }
    Err(SubSuperError::ThresholdUnreachable { cap: SEARCH_CAP })
}

/// Inputs the supersolution search derives from the parameters.
struct SuperScales {
    e_p: f64,
    f_q: f64,
    nu_p: f64,
}

fn super_scales(
    params: &ProblemParams,
    tor_p: &TorsionData,
    tor_q: &TorsionData,
) -> Result<SuperScales, SubSuperError> {
    let nu_p_pow = tor_p.nu.powf(params.p - 1.0);
    if nu_p_pow >= 1.0 {
        return Err(SubSuperError::DomainTooLarge {
            r: params.p,
            nu: tor_p.nu,
        });
    }
    let nu_q_pow = tor_q.nu.powf(params.q - 1.0);
    if nu_q_pow >= 1.0 {
        return Err(SubSuperError::DomainTooLarge {
            r: params.q,
            nu: tor_q.nu,
        });
    }
    let e_p = (params.lambda1 * params.a.sup() + params.mu1 * params.alpha.sup()) / (1.0 - nu_p_pow);
    let f_q = (params.lambda2 * params.b.sup() + params.mu2 * params.beta.sup()) / (1.0 - nu_q_pow);
    if e_p <= 0.0 || f_q <= 0.0 {
        return Err(SubSuperError::LambdaTooSmall {
            margin: f64::NEG_INFINITY,
            detail: "supersolution needs positive rate sums".into(),
        });
    }
    Ok(SuperScales {
        e_p,
        f_q,
        nu_p: tor_p.nu,
    })
}

/// Build the torsion-scaled supersolution via a doubling search on `C`.
///
/// A candidate `C` passes when the nodal scale inequality
/// `(C/ν_p)^{p-1}(λ₁‖a‖+μ₁‖α‖) >= λ₁‖a‖ f(v̄) + μ₁‖α‖ h(ū)` holds, the
/// discrete supersolution certificates pass, and every pair in `dominate`
/// sits below `(ū, v̄)` nodally.
pub fn construct_supersolution(
    params: &ProblemParams,
    tor_p: &TorsionData,
    tor_q: &TorsionData,
    nl: &NonlinearityQuad,
    dominate: &[(&Field, &Field)],
    mesh: &Mesh,
    degree: usize,
) -> Result<(Field, Field, f64), SubSuperError> {
    let scales = super_scales(params, tor_p, tor_q)?;
    let mut c = 1.0;
    while c <= SEARCH_CAP {
        if let Some(pair) =
            try_supersolution_at(params, tor_p, tor_q, nl, dominate, mesh, degree, c, &scales)?
        {
            return Ok((pair.0, pair.1, c));
        }
        c *= 2.0;
    }
    Err(SubSuperError::SupersolutionSearchFailure { c })
}

#[allow(clippy::too_many_arguments)]
fn try_supersolution_at(
    params: &ProblemParams,
    tor_p: &TorsionData,
    tor_q: &TorsionData,
    nl: &NonlinearityQuad,
    dominate: &[(&Field, &Field)],
    mesh: &Mesh,
    degree: usize,
    c: f64,
    scales: &SuperScales,
) -> Result<Option<(Field, Field)>, SubSuperError> {
    let arg_g = c * scales.e_p.powf(1.0 / (params.p - 1.0));
    let gval = nl.g.eval_unchecked(arg_g);
    if gval <= 0.0 {
        return Ok(None);
    }
    let s_u = c / scales.nu_p * scales.e_p.powf(1.0 / (params.p - 1.0));
    let s_v = (scales.f_q * gval).powf(1.0 / (params.q - 1.0));
    let super_u = tor_p.omega.scale(s_u);
    let super_v = tor_q.omega.scale(s_v);

    // nodal scale inequality behind the supersolution chain
    let lhs = (c / scales.nu_p).powf(params.p - 1.0)
        * (params.lambda1 * params.a.sup() + params.mu1 * params.alpha.sup());
    for i in 0..mesh.node_count() {
        let rhs = params.lambda1 * params.a.sup() * nl.f.eval_unchecked(super_v.values()[i])
            + params.mu1 * params.alpha.sup() * nl.h.eval_unchecked(super_u.values()[i]);
        if lhs < rhs {
            return Ok(None);
        }
    }
    for (du, dv) in dominate {
        if !du.le_nodal(&super_u, 1e-12 * super_u.max_abs().max(1.0))
            || !dv.le_nodal(&super_v, 1e-12 * super_v.max_abs().max(1.0))
        {
            return Ok(None);
        }
    }
    let reports = check_subsuper(
        &super_u, &super_v, Side::Super, params, nl, mesh, degree, None,
    )?;
    if !all_passed(&reports) {
        return Ok(None);
    }
    Ok(Some((super_u, super_v)))
}

/// Subsolution + supersolution + certificates + nodal ordering.
#[allow(clippy::too_many_arguments)]
pub fn construct_ordered_pair(
    params: &ProblemParams,
    eig_p: &EigenPair,
    eig_q: &EigenPair,
    strip: &StripConstants,
    tor_p: &TorsionData,
    tor_q: &TorsionData,
    k0: f64,
    nl: &NonlinearityQuad,
    mesh: &Mesh,
    degree: usize,
) -> Result<OrderedPair, SubSuperError> {
    let (sub_u, sub_v, mut certs) =
        construct_subsolution(params, eig_p, eig_q, strip, k0, nl, mesh, degree)?;
    let (super_u, super_v, c) =
        construct_supersolution(params, tor_p, tor_q, nl, &[(&sub_u, &sub_v)], mesh, degree)?;
    let super_certs = check_subsuper(
        &super_u, &super_v, Side::Super, params, nl, mesh, degree, None,
    )?;
    certs.extend(super_certs);
    let tol = 1e-12 * super_u.max_abs().max(super_v.max_abs()).max(1.0);
    let ordering_ok = sub_u.le_nodal(&super_u, tol) && sub_v.le_nodal(&super_v, tol);
    let pair = OrderedPair {
        sub_u,
        sub_v,
        super_u,
        super_v,
        c: Some(c),
        k0: Some(k0),
        strip: Some(*strip),
        certificates: certs,
        ordering_ok,
    };
    if !pair.all_certified() {
        return Err(SubSuperError::CertificateFailure(
            "ordered pair failed certification".into(),
        ));
    }
    Ok(pair)
}

/// The strict-supersolution gate functions
/// `G_p(x) = (σ_p-1)x^{p-1} - λ₁‖a‖ f(C₂ x) - μ₁‖α‖ h(x)` and
/// `G_q(x) = (σ_q-1)x^{q-1} - λ₂‖b‖ g(C₁ x) - μ₂‖β‖ γ(x)`.
///
/// Both nonlinear terms enter with a minus sign; the mixed-sign variants
/// follow from this one for nonnegative h, γ.
pub struct GateFunctions<'a> {
    params: &'a ProblemParams,
    nl: &'a NonlinearityQuad,
    sigma_p: f64,
    sigma_q: f64,
    c1: f64,
    c2: f64,
}

impl GateFunctions<'_> {
    pub fn g_p(&self, x: f64) -> f64 {
        (self.sigma_p - 1.0) * x.powf(self.params.p - 1.0)
            - self.params.lambda1 * self.params.a.sup() * self.nl.f.eval_unchecked(self.c2 * x)
            - self.params.mu1 * self.params.alpha.sup() * self.nl.h.eval_unchecked(x)
    }

    pub fn g_q(&self, x: f64) -> f64 {
        (self.sigma_q - 1.0) * x.powf(self.params.q - 1.0)
            - self.params.lambda2 * self.params.b.sup() * self.nl.g.eval_unchecked(self.c1 * x)
            - self.params.mu2 * self.params.beta.sup() * self.nl.gamma.eval_unchecked(x)
    }
}

/// Construct the strict pair: `(ω₁, ω₂)` is the shifted-system solution
/// supplied by the caller (the multiplicity driver runs the existence
/// pipeline on the shifted nonlinearities), `(ζ₁, ζ₂) = (ρ φ_p, ρ φ_q)`
/// with `ρ` from the gate-positivity grid and a noncomparability halving.
#[allow(clippy::too_many_arguments)]
pub fn construct_strict_pair(
    params: &ProblemParams,
    eig_p: &EigenPair,
    eig_q: &EigenPair,
    nl: &NonlinearityQuad,
    omega1: Field,
    omega2: Field,
    mesh: &Mesh,
    degree: usize,
) -> Result<StrictPair, SubSuperError> {
    if eig_p.sigma <= 1.0 {
        return Err(SubSuperError::SpectralGap {
            r: params.p,
            sigma: eig_p.sigma,
        });
    }
    if eig_q.sigma <= 1.0 {
        return Err(SubSuperError::SpectralGap {
            r: params.q,
            sigma: eig_q.sigma,
        });
    }
    for (name, spec, exp) in [
        ("f", &nl.f, params.p),
        ("h", &nl.h, params.p),
        ("g", &nl.g, params.q),
        ("gamma", &nl.gamma, params.q),
    ] {
        if !flatness_ok(spec, exp) {
            return Err(SubSuperError::FlatnessViolation { which: name.into() });
        }
    }

    let (c1, c2) = comparability_constants(&eig_p.phi, &eig_q.phi, mesh)?;
    let gates = GateFunctions {
        params,
        nl,
        sigma_p: eig_p.sigma,
        sigma_q: eig_q.sigma,
        c1,
        c2,
    };

    // largest prefix of a 256-point log grid on which both gates stay
    // positive
    let (lo, hi) = (1e-10, 1e2);
    let mut theta = None;
    for k in 0..256 {
        let x = lo * (hi / lo as f64).powf(k as f64 / 255.0);
        if gates.g_p(x) > 0.0 && gates.g_q(x) > 0.0 {
            theta = Some(x);
        } else {
            break;
        }
    }
    let theta = theta.ok_or(SubSuperError::NoTheta)?;

    // halve rho from theta until the shifted-system solution pokes above
    // (zeta1, zeta2) somewhere
    let mut rho = theta;
    let mut halvings = 0usize;
    let noncomparable = |rho: f64| {
        let above1 = omega1
            .values()
            .iter()
            .zip(eig_p.phi.values())
            .any(|(o, z)| *o > rho * *z);
        let above2 = omega2
            .values()
            .iter()
            .zip(eig_q.phi.values())
            .any(|(o, z)| *o > rho * *z);
        above1 || above2
    };
    while !noncomparable(rho) {
        rho *= 0.5;
        halvings += 1;
        if halvings > 60 {
            return Err(SubSuperError::NoncomparabilityFailure { halvings });
        }
    }
    let zeta1 = eig_p.phi.scale(rho);
    let zeta2 = eig_q.phi.scale(rho);

    // strict-supersolution margins at the nodes
    let mut g_margin_min = f64::INFINITY;
    let mut peak_node = 0;
    let mut peak_val = f64::NEG_INFINITY;
    for i in mesh.interior_nodes() {
        let x1 = zeta1.values()[i];
        if x1 > peak_val {
            peak_val = x1;
            peak_node = i;
        }
        g_margin_min = g_margin_min
            .min(gates.g_p(x1))
            .min(gates.g_q(zeta2.values()[i]));
    }
    let g_margin_peak = gates
        .g_p(zeta1.values()[peak_node])
        .min(gates.g_q(zeta2.values()[peak_node]));
    if g_margin_min < 0.0 || g_margin_peak <= 0.0 {
        return Err(SubSuperError::CertificateFailure(format!(
            "gate margin min {g_margin_min:.3e}, peak {g_margin_peak:.3e}"
        )));
    }

    let certificates = check_subsuper(&zeta1, &zeta2, Side::Super, params, nl, mesh, degree, None)?;
    if !all_passed(&certificates) {
        return Err(SubSuperError::CertificateFailure(
            "strict supersolution failed the discrete inequality".into(),
        ));
    }

    Ok(StrictPair {
        omega1,
        omega2,
        zeta1,
        zeta2,
        rho,
        theta,
        c1,
        c2,
        noncomparability: true,
        g_margin_min,
        g_margin_peak,
        certificates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::forms::DEFAULT_QUAD_DEGREE;
    use crate::mesh::build_interval_mesh;
    use crate::nonlinearity::lower_bound_k0;
    use crate::spectral::{first_eigenpair, torsion_function, EigenOptions};
    use crate::SolverOptions;

    struct Fixture {
        mesh: Mesh,
        eig: EigenPair,
        strip: StripConstants,
        tor: TorsionData,
        nl: NonlinearityQuad,
        k0: f64,
    }

    fn fixture_sqrt(n: usize) -> Fixture {
        let mesh = build_interval_mesh(n).unwrap();
        let eig = first_eigenpair(&mesh, 2.0, &EigenOptions::default()).unwrap();
        let strip = strip_constants_joint(&[&eig, &eig], &mesh).unwrap();
        let tor = torsion_function(&mesh, 2.0, &SolverOptions::default()).unwrap();
        let nl = NonlinearityQuad::example_sqrt();
        let k0 = lower_bound_k0(&nl, crate::nonlinearity::WeightBounds::unit()).unwrap();
        Fixture {
            mesh,
            eig,
            strip,
            tor,
            nl,
            k0,
        }
    }

    fn symmetric_params(sum: f64) -> ProblemParams {
        ProblemParams::new(2.0, 2.0).with_rates(sum / 2.0, sum / 2.0, sum / 2.0, sum / 2.0)
    }

    #[test]
    fn subsolution_formula_p2() {
        let fx = fixture_sqrt(64);
        let params = symmetric_params(10.0);
        let (u, _v) = subsolution_fields(&params, &fx.eig, &fx.eig, &fx.strip, fx.k0);
        // p = 2: scale = (sum·k0/m)·(1/2), field = scale·phi²
        let scale = 10.0 * fx.k0 / fx.strip.m * 0.5;
        assert!((u.max() - scale).abs() < 1e-12 * scale, "sup phi = 1");
        for (i, &val) in u.values().iter().enumerate() {
            let phi = fx.eig.phi.values()[i];
            assert!((val - scale * phi * phi).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn subsolution_scaling_law() {
        let fx = fixture_sqrt(64);
        for (p, q) in [(2.0, 2.0), (3.0, 2.0)] {
            let params1 = ProblemParams::new(p, q).with_rates(1.0, 1.0, 1.0, 1.0);
            let params2 = ProblemParams::new(p, q).with_rates(2.0, 2.0, 2.0, 2.0);
            let (u1, _) = subsolution_fields(&params1, &fx.eig, &fx.eig, &fx.strip, fx.k0);
            let (u2, _) = subsolution_fields(&params2, &fx.eig, &fx.eig, &fx.strip, fx.k0);
            let factor = 2f64.powf(1.0 / (p - 1.0));
            for (a, b) in u1.values().iter().zip(u2.values()) {
                assert!((b - factor * a).abs() <= 1e-13 * b.abs().max(1e-30));
            }
        }
    }

    #[test]
    fn zero_rates_rejected() {
        let fx = fixture_sqrt(32);
        let params = symmetric_params(0.0);
        let err = construct_subsolution(
            &params,
            &fx.eig,
            &fx.eig,
            &fx.strip,
            fx.k0,
            &fx.nl,
            &fx.mesh,
            DEFAULT_QUAD_DEGREE,
        )
        .unwrap_err();
        assert!(matches!(err, SubSuperError::LambdaTooSmall { .. }));
    }

    #[test]
    fn threshold_search_and_certificates() {
        let fx = fixture_sqrt(128);
        let template = symmetric_params(1.0);
        let bracket = existence_threshold(
            &template,
            &fx.eig,
            &fx.eig,
            &fx.strip,
            fx.k0,
            &fx.nl,
            &fx.mesh,
            DEFAULT_QUAD_DEGREE,
        )
        .unwrap();
        assert!(bracket.passing.0 > bracket.failing.0);
        assert!(bracket.passing.0 <= SEARCH_CAP);

        // monotone feasibility: double the passing sums and re-verify
        let params = with_sums(&template, bracket.passing.0 * 2.0, bracket.passing.1 * 2.0);
        assert!(construct_subsolution(
            &params,
            &fx.eig,
            &fx.eig,
            &fx.strip,
            fx.k0,
            &fx.nl,
            &fx.mesh,
            DEFAULT_QUAD_DEGREE
        )
        .is_ok());

        // re-running at a passing value returns immediately with it
        let again = existence_threshold(
            &with_sums(&template, bracket.passing.0, bracket.passing.1),
            &fx.eig,
            &fx.eig,
            &fx.strip,
            fx.k0,
            &fx.nl,
            &fx.mesh,
            DEFAULT_QUAD_DEGREE,
        )
        .unwrap();
        assert_eq!(again.passing.0, bracket.passing.0);
    }

    #[test]
    fn ordered_pair_certified_and_roundtrips() {
        let fx = fixture_sqrt(128);
        let template = symmetric_params(1.0);
        let bracket = existence_threshold(
            &template,
            &fx.eig,
            &fx.eig,
            &fx.strip,
            fx.k0,
            &fx.nl,
            &fx.mesh,
            DEFAULT_QUAD_DEGREE,
        )
        .unwrap();
        let params = with_sums(&template, bracket.passing.0, bracket.passing.1);
        let pair = construct_ordered_pair(
            &params,
            &fx.eig,
            &fx.eig,
            &fx.strip,
            &fx.tor,
            &fx.tor,
            fx.k0,
            &fx.nl,
            &fx.mesh,
            DEFAULT_QUAD_DEGREE,
        )
        .unwrap();
        assert!(pair.all_certified());
        let pair_c = pair.c.unwrap();
        assert!(pair_c >= 1.0);

        // certificates survive a CSV round trip of the pair fields
        let sub_u = Field::from_csv(&fx.mesh, &pair.sub_u.to_csv(&fx.mesh)).unwrap();
        let sub_v = Field::from_csv(&fx.mesh, &pair.sub_v.to_csv(&fx.mesh)).unwrap();
        let reports = check_subsuper(
            &sub_u,
            &sub_v,
            Side::Sub,
            &params,
            &fx.nl,
            &fx.mesh,
            DEFAULT_QUAD_DEGREE,
            None,
        )
        .unwrap();
        assert!(all_passed(&reports));

        // C is minimal up to a factor of two: halving it must break a
        // certificate (only meaningful when the search moved past 1)
        if pair_c > 1.0 {
            let scales = super_scales(&params, &fx.tor, &fx.tor).unwrap();
            let halved = try_supersolution_at(
                &params,
                &fx.tor,
                &fx.tor,
                &fx.nl,
                &[(&pair.sub_u, &pair.sub_v)],
                &fx.mesh,
                DEFAULT_QUAD_DEGREE,
                pair_c / 2.0,
                &scales,
            )
            .unwrap();
            assert!(halved.is_none(), "C/2 still passes all certificates");
        }
    }

    #[test]
    fn supersolution_domain_too_large() {
        let fx = fixture_sqrt(32);
        let params = symmetric_params(4.0);
        let fat = TorsionData {
            r: 2.0,
            omega: fx.tor.omega.clone(),
            nu: 1.2,
        };
        let err = construct_supersolution(
            &params,
            &fat,
            &fx.tor,
            &fx.nl,
            &[],
            &fx.mesh,
            DEFAULT_QUAD_DEGREE,
        )
        .unwrap_err();
        assert!(matches!(err, SubSuperError::DomainTooLarge { .. }));
    }

    #[test]
    fn strict_pair_fixture() {
        let mesh = build_interval_mesh(128).unwrap();
        let eig = first_eigenpair(&mesh, 2.0, &EigenOptions::default()).unwrap();
        let nl = NonlinearityQuad::example_piecewise();
        let params = symmetric_params(40.0);
        // stand-in for the shifted-system solution: a large positive field
        let omega = eig.phi.scale(50.0);
        let strict = construct_strict_pair(
            &params,
            &eig,
            &eig,
            &nl,
            omega.clone(),
            omega,
            &mesh,
            DEFAULT_QUAD_DEGREE,
        )
        .unwrap();
        assert!(strict.theta > 0.0);
        assert!(strict.rho > 0.0 && strict.rho <= strict.theta);
        assert!(strict.noncomparability);
        assert!(strict.g_margin_peak > 0.0);
        assert!((strict.c1 - 1.0).abs() < 1e-12 && (strict.c2 - 1.0).abs() < 1e-12);
        // closed form check: with f(x) = x² below the breakpoint,
        // G_p(x) = (σ-1)x - Λ x² > 0 up to x = (σ-1)/Λ
        let expect_theta = (eig.sigma - 1.0) / 40.0;
        assert!(
            strict.theta <= expect_theta * 1.05 && strict.theta >= expect_theta * 0.7,
            "theta = {} vs analytic cap {}",
            strict.theta,
            expect_theta
        );
    }

    #[test]
    fn strict_pair_requires_flatness() {
        let mesh = build_interval_mesh(64).unwrap();
        let eig = first_eigenpair(&mesh, 2.0, &EigenOptions::default()).unwrap();
        let nl = NonlinearityQuad::example_sqrt(); // not flat at zero
        let params = symmetric_params(8.0);
        let omega = eig.phi.scale(10.0);
        let err = construct_strict_pair(
            &params,
            &eig,
            &eig,
            &nl,
            omega.clone(),
            omega,
            &mesh,
            DEFAULT_QUAD_DEGREE,
        )
        .unwrap_err();
        assert!(matches!(err, SubSuperError::FlatnessViolation { .. }));
    }
}
