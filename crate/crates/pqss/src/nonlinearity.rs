//! Declarative nonlinearities and their hypothesis checks.
//!
//! Two families cover the built-in fixtures:
//!
//! * polynomial sums  `sum_i a_i s^{e_i} - c`  with nonnegative coefficients
//!   and exponents,
//! * piecewise powers `s^{e1}` for `s <= 1`, `(e1/e2) s^{e2} + (1 - e1/e2)`
//!   for `s > 1` (value-continuous at the breakpoint by construction).
//!
//! Both carry exact exponent metadata, so the growth hypotheses H2-H4 are
//! decided by exponent arithmetic whenever possible; a sampled checker is
//! the fallback and is labeled as such in the report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NonlinearityError {
    #[error("nonlinearity evaluated at negative argument {0}")]
    NegativeArgument(f64),
    #[error("invalid nonlinearity spec: {0}")]
    Invalid(String),
    #[error("nonlinearity unbounded below; no finite k0 exists")]
    UnboundedBelow,
}

/// One of f, g, h, gamma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    /// `sum_i coeff_i * s^{exp_i} - offset`
    PolynomialSum {
        /// `(coefficient, exponent)` pairs, all entries nonnegative.
        terms: Vec<(f64, f64)>,
        #[serde(default)]
        offset: f64,
        #[serde(default = "default_true")]
        monotone: bool,
    },
    /// `s^{inner}` below the breakpoint `s = 1`, then the matched
    /// `(inner/outer) s^{outer} + (1 - inner/outer)` branch, minus `offset`.
    PiecewisePower {
        inner: f64,
        outer: f64,
        #[serde(default)]
        offset: f64,
        #[serde(default = "default_true")]
        monotone: bool,
    },
}

fn default_true() -> bool {
    true
}

impl NonlinearitySpec {
    pub fn polynomial(terms: Vec<(f64, f64)>, offset: f64) -> Self {
        NonlinearitySpec::PolynomialSum {
            terms,
            offset,
            monotone: true,
        }
    }

    pub fn piecewise(inner: f64, outer: f64) -> Self {
        NonlinearitySpec::PiecewisePower {
            inner,
            outer,
            offset: 0.0,
            monotone: true,
        }
    }

    /// Single power `s^e`, handy in tests and counterexamples.
    pub fn power(e: f64) -> Self {
        NonlinearitySpec::polynomial(vec![(1.0, e)], 0.0)
    }

    pub fn validate(&self) -> Result<(), NonlinearityError> {
        match self {
            NonlinearitySpec::PolynomialSum { terms, offset, .. } => {
                if terms.is_empty() {
                    return Err(NonlinearityError::Invalid("no terms".into()));
                }
                if terms.iter().any(|&(c, e)| c < 0.0 || e < 0.0) {
                    return Err(NonlinearityError::Invalid(
                        "coefficients and exponents must be nonnegative".into(),
                    ));
                }
                if *offset < 0.0 {
                    return Err(NonlinearityError::Invalid("offset must be >= 0".into()));
                }
                Ok(())
            }
            NonlinearitySpec::PiecewisePower {
                inner,
                outer,
                offset,
                ..
            } => {
                if *inner <= 0.0 || *outer <= 0.0 {
                    return Err(NonlinearityError::Invalid(
                        "piecewise exponents must be positive".into(),
                    ));
                }
                if *offset < 0.0 {
                    return Err(NonlinearityError::Invalid("offset must be >= 0".into()));
                }
                Ok(())
            }
        }
    }

    /// Evaluate at `s >= 0`.
    pub fn eval(&self, s: f64) -> Result<f64, NonlinearityError> {
        if s < 0.0 {
            return Err(NonlinearityError::NegativeArgument(s));
        }
        Ok(self.eval_unchecked(s))
    }

    /// Evaluation without the domain check; negative inputs are clamped to 0
    /// (used by quadrature where interpolated iterates can undershoot by
    /// roundoff).
    pub fn eval_unchecked(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        match self {
            NonlinearitySpec::PolynomialSum { terms, offset, .. } => {
                let mut acc = -offset;
                for &(c, e) in terms {
                    acc += c * pow_nonneg(s, e);
                }
                acc
            }
            NonlinearitySpec::PiecewisePower {
                inner,
                outer,
                offset,
                ..
            } => {
                let v = if s <= 1.0 {
                    pow_nonneg(s, *inner)
                } else {
                    (inner / outer) * pow_nonneg(s, *outer) + (1.0 - inner / outer)
                };
                v - offset
            }
        }
    }

    /// Analytic derivative; at the piecewise breakpoint the left branch is
    /// used.
    pub fn eval_derivative(&self, s: f64) -> Result<f64, NonlinearityError> {
        if s < 0.0 {
            return Err(NonlinearityError::NegativeArgument(s));
        }
        Ok(match self {
            NonlinearitySpec::PolynomialSum { terms, .. } => terms
                .iter()
                .map(|&(c, e)| {
                    if e == 0.0 {
                        0.0
                    } else {
                        c * e * pow_nonneg(s, e - 1.0)
                    }
                })
                .sum(),
            NonlinearitySpec::PiecewisePower { inner, outer, .. } => {
                if s <= 1.0 {
                    inner * pow_nonneg(s, inner - 1.0)
                } else {
                    inner * pow_nonneg(s, outer - 1.0)
                }
            }
        })
    }

    /// Exponent of the dominant term as `s -> infinity`, with its
    /// coefficient.
    pub fn leading_term(&self) -> (f64, f64) {
        match self {
            NonlinearitySpec::PolynomialSum { terms, .. } => terms
                .iter()
                .filter(|&&(c, _)| c > 0.0)
                .fold((0.0, 0.0), |acc, &(c, e)| if e > acc.1 { (c, e) } else { acc }),
            NonlinearitySpec::PiecewisePower { inner, outer, .. } => (inner / outer, *outer),
        }
    }

    /// Smallest exponent among positive-coefficient terms; `None` when a
    /// constant term is present (exponent 0 with positive coefficient) or
    /// the value at zero is nonzero.
    pub fn smallest_exponent(&self) -> Option<f64> {
        match self {
            NonlinearitySpec::PolynomialSum { terms, offset, .. } => {
                if *offset != 0.0 {
                    return None;
                }
                let mut smallest = f64::INFINITY;
                for &(c, e) in terms {
                    if c > 0.0 {
                        smallest = smallest.min(e);
                    }
                }
                (smallest > 0.0 && smallest.is_finite()).then_some(smallest)
            }
            NonlinearitySpec::PiecewisePower { inner, offset, .. } => {
                (*offset == 0.0).then_some(*inner)
            }
        }
    }

    pub fn monotone_flag(&self) -> bool {
        match self {
            NonlinearitySpec::PolynomialSum { monotone, .. } => *monotone,
            NonlinearitySpec::PiecewisePower { monotone, .. } => *monotone,
        }
    }

    /// Shift the evaluation down by one: `spec~(s) = spec(s) - 1`.
    pub fn shift(&self) -> NonlinearitySpec {
        let mut out = self.clone();
        match &mut out {
            NonlinearitySpec::PolynomialSum { offset, .. } => *offset += 1.0,
            NonlinearitySpec::PiecewisePower { offset, .. } => *offset += 1.0,
        }
        out
    }

    /// Infimum over `[0, infinity)` via a log-grid scan refined by
    /// golden-section search. The built-in families are nondecreasing so
    /// the infimum sits at 0, but the scan keeps this honest for any spec.
    pub fn infimum(&self) -> Result<f64, NonlinearityError> {
        let (lead_c, lead_e) = self.leading_term();
        if lead_c <= 0.0 && self.eval_unchecked(1e12) < self.eval_unchecked(0.0) - 1e6 {
            return Err(NonlinearityError::UnboundedBelow);
        }
        let _ = lead_e;
        let mut best_s = 0.0;
        let mut best = self.eval_unchecked(0.0);
        let mut grid = vec![0.0];
        for k in -40..=40 {
            grid.push(10f64.powf(k as f64 * 0.25));
        }
        for &s in &grid[1..] {
            let v = self.eval_unchecked(s);
            if v < best {
                best = v;
                best_s = s;
            }
        }
        // golden-section refinement around the best grid point
        let (mut lo, mut hi) = (best_s / 10.0, best_s * 10.0 + 1e-12);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let m1 = hi - phi * (hi - lo);
            let m2 = lo + phi * (hi - lo);
            if self.eval_unchecked(m1) <= self.eval_unchecked(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let refined = self.eval_unchecked(0.5 * (lo + hi));
        Ok(best.min(refined))
    }
}

/// `s^e` for `s >= 0` with the convention `0^0 = 1`.
fn pow_nonneg(s: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if s == 0.0 {
        0.0
    } else {
        s.powf(e)
    }
}

/// The four nonlinearities of the system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearityQuad {
    pub f: NonlinearitySpec,
    pub g: NonlinearitySpec,
    pub h: NonlinearitySpec,
    pub gamma: NonlinearitySpec,
}

impl NonlinearityQuad {
    pub fn validate(&self) -> Result<(), NonlinearityError> {
        self.f.validate()?;
        self.g.validate()?;
        self.h.validate()?;
        self.gamma.validate()
    }

    /// All four shifted down by one (the tilded system).
    pub fn shifted(&self) -> NonlinearityQuad {
        NonlinearityQuad {
            f: self.f.shift(),
            g: self.g.shift(),
            h: self.h.shift(),
            gamma: self.gamma.shift(),
        }
    }

    /// Example 3.1 with all exponents 1/2, unit coefficients, unit offsets.
    pub fn example_sqrt() -> NonlinearityQuad {
        let spec = || NonlinearitySpec::polynomial(vec![(1.0, 0.5)], 1.0);
        NonlinearityQuad {
            f: spec(),
            g: spec(),
            h: spec(),
            gamma: spec(),
        }
    }

    /// Example 3.2 with inner exponent 2 and outer exponent 0.9 everywhere.
    pub fn example_piecewise() -> NonlinearityQuad {
        let spec = || NonlinearitySpec::piecewise(2.0, 0.9);
        NonlinearityQuad {
            f: spec(),
            g: spec(),
            h: spec(),
            gamma: spec(),
        }
    }
}

/// Positive lower bounds of the weights (a1, b1, alpha1, beta1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightBounds {
    pub a1: f64,
    pub b1: f64,
    pub alpha1: f64,
    pub beta1: f64,
}

impl WeightBounds {
    pub fn unit() -> Self {
        WeightBounds {
            a1: 1.0,
            b1: 1.0,
            alpha1: 1.0,
            beta1: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMethod {
    ExactExponent,
    Sampled,
}

/// Outcome of one hypothesis with the evidence behind it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisOutcome {
    pub passed: bool,
    pub detail: String,
}

/// Verdicts on H1-H4 for a `(f, g, h, gamma)` quadruple.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub h1: HypothesisOutcome,
    pub h2: HypothesisOutcome,
    pub h3: HypothesisOutcome,
    pub h4: HypothesisOutcome,
    pub method: CheckMethod,
    /// H3 ratio samples from the sampled path (diagnostic).
    pub h3_ratios: Vec<f64>,
    /// H4 ratio samples for h and gamma.
    pub h4_ratios: (Vec<f64>, Vec<f64>),
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.h1.passed && self.h2.passed && self.h3.passed && self.h4.passed
    }
}

fn exactly_representable(spec: &NonlinearitySpec) -> bool {
    // Both built-in kinds carry exact exponent metadata.
    spec.validate().is_ok()
}

/// Check (H1)-(H4).
///
/// The exact path decides the limits by exponent arithmetic; the sampled
/// path evaluates the ratio sequences on a log grid and tests for
/// power-law decay (negative tail slope in log-log coordinates). Both are
/// always computed; `method` records which one is authoritative.
pub fn check_hypotheses(
    nl: &NonlinearityQuad,
    weights: WeightBounds,
    p: f64,
    q: f64,
) -> HypothesisReport {
    let exact = [&nl.f, &nl.g, &nl.h, &nl.gamma]
        .iter()
        .all(|s| exactly_representable(s));

    // H1: positive weight lower bounds.
    let h1_pass =
        weights.a1 > 0.0 && weights.b1 > 0.0 && weights.alpha1 > 0.0 && weights.beta1 > 0.0;
    let h1 = HypothesisOutcome {
        passed: h1_pass,
        detail: format!(
            "a1={} b1={} alpha1={} beta1={}",
            weights.a1, weights.b1, weights.alpha1, weights.beta1
        ),
    };

    // H2: nondecreasing and unbounded growth.
    let h2_exact = [&nl.f, &nl.g, &nl.h, &nl.gamma].iter().all(|s| {
        let (c, e) = s.leading_term();
        s.monotone_flag() && c > 0.0 && e > 0.0 && monotone_sampled(s)
    });
    let h2_sampled = [&nl.f, &nl.g, &nl.h, &nl.gamma]
        .iter()
        .all(|s| monotone_sampled(s) && grows_unbounded_sampled(s));
    let h2 = HypothesisOutcome {
        passed: if exact { h2_exact } else { h2_sampled },
        detail: format!("exact={h2_exact} sampled={h2_sampled}"),
    };

    // H3: f(M g(s)^{1/(q-1)}) / s^{p-1} -> 0 for every M > 0.
    let (_, ef) = nl.f.leading_term();
    let (_, eg) = nl.g.leading_term();
    let h3_exact = ef * eg < (p - 1.0) * (q - 1.0);
    let h3_ratios = h3_ratio_samples(&nl.f, &nl.g, p, q);
    let h3_sampled = decays_to_zero(&h3_ratios);
    let h3 = HypothesisOutcome {
        passed: if exact { h3_exact } else { h3_sampled },
        detail: format!(
            "f-exponent*g-exponent = {:.6} vs (p-1)(q-1) = {:.6}; sampled decay = {}",
            ef * eg,
            (p - 1.0) * (q - 1.0),
            h3_sampled
        ),
    };

    // H4: h(s)/s^{p-1} -> 0 and gamma(s)/s^{q-1} -> 0.
    let (_, eh) = nl.h.leading_term();
    let (_, egam) = nl.gamma.leading_term();
    let h4_exact = eh < p - 1.0 && egam < q - 1.0;
    let hr = power_ratio_samples(&nl.h, p - 1.0);
    let gr = power_ratio_samples(&nl.gamma, q - 1.0);
    let h4_sampled = decays_to_zero(&hr) && decays_to_zero(&gr);
    let h4 = HypothesisOutcome {
        passed: if exact { h4_exact } else { h4_sampled },
        detail: format!(
            "h-exponent {:.4} vs p-1 = {:.4}; gamma-exponent {:.4} vs q-1 = {:.4}",
            eh,
            p - 1.0,
            egam,
            q - 1.0
        ),
    };

    HypothesisReport {
        h1,
        h2,
        h3,
        h4,
        method: if exact {
            CheckMethod::ExactExponent
        } else {
            CheckMethod::Sampled
        },
        h3_ratios,
        h4_ratios: (hr, gr),
    }
}

fn monotone_sampled(spec: &NonlinearitySpec) -> bool {
    // 10^4-point log grid over [1e-8, 1e8]
    let mut prev = spec.eval_unchecked(0.0);
    for k in 0..10_000 {
        let s = 10f64.powf(-8.0 + 16.0 * k as f64 / 9_999.0);
        let v = spec.eval_unchecked(s);
        if v < prev - 1e-12 * (1.0 + prev.abs()) {
            return false;
        }
        prev = v;
    }
    true
}

fn grows_unbounded_sampled(spec: &NonlinearitySpec) -> bool {
    // positive log-log tail slope
    let v1 = spec.eval_unchecked(1e6);
    let v2 = spec.eval_unchecked(1e8);
    v2 > 1.0 && v2 > v1 && (v2 / v1.max(1e-300)).ln() > 1e-3
}

fn h3_ratio_samples(f: &NonlinearitySpec, g: &NonlinearitySpec, p: f64, q: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 2..=8 {
        let s = 10f64.powi(k);
        let mut worst: f64 = 0.0;
        for m in [1.0, 10.0, 100.0] {
            let gs = g.eval_unchecked(s).max(0.0);
            let arg = m * gs.powf(1.0 / (q - 1.0));
            let ratio = f.eval_unchecked(arg) / s.powf(p - 1.0);
            worst = worst.max(ratio.abs());
        }
        out.push(worst);
    }
    out
}

fn power_ratio_samples(spec: &NonlinearitySpec, power: f64) -> Vec<f64> {
    (2..=8)
        .map(|k| {
            let s = 10f64.powi(k);
            (spec.eval_unchecked(s) / s.powf(power)).abs()
        })
        .collect()
}

/// A ratio sequence on a decade grid counts as vanishing when its tail is
/// decreasing with a clearly negative log-log slope.
fn decays_to_zero(ratios: &[f64]) -> bool {
    if ratios.len() < 3 {
        return false;
    }
    let tail = &ratios[ratios.len() - 3..];
    if !(tail[0] > tail[1] && tail[1] > tail[2]) {
        return false;
    }
    let r0 = tail[0].max(1e-300);
    let r2 = tail[2].max(1e-300);
    // two decades of s between tail[0] and tail[2]
    let slope = (r2 / r0).ln() / (2.0 * 10f64.ln());
    slope < -1e-3
}

/// The paper's bound `k0`: all four weighted nonlinearities stay above
/// `-k0` on `[0, infinity)`. A 1.5x multiplier over the measured infimum
/// (floored at 1) keeps runs reproducible while leaving slack for the
/// discrete inequality checks.
pub fn lower_bound_k0(
    nl: &NonlinearityQuad,
    weights: WeightBounds,
) -> Result<f64, NonlinearityError> {
    let pairs = [
        (weights.a1, &nl.f),
        (weights.alpha1, &nl.h),
        (weights.b1, &nl.g),
        (weights.beta1, &nl.gamma),
    ];
    let mut worst = 0.0f64;
    for (w, spec) in pairs {
        let inf = spec.infimum()?;
        worst = worst.min(w * inf);
    }
    Ok(1.5 * (1.0f64).max(-worst))
}

/// Theorem 2.2 smoothness-at-zero gate: the smallest exponent of the spec
/// must exceed `p - 1` for integer `p` and `floor(p)` otherwise, and the
/// value at zero must vanish.
pub fn flatness_ok(spec: &NonlinearitySpec, p: f64) -> bool {
    let needed = if (p - p.round()).abs() < 1e-12 {
        p.round() - 1.0
    } else {
        p.floor()
    };
    match spec.smallest_exponent() {
        Some(e) => e > needed,
        None => false,
    }
}
