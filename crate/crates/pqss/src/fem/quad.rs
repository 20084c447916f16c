//! Gauss quadrature on reference segments and triangles.
//!
//! P1 gradients are elementwise constant, so quadrature is only needed for
//! zeroth-order terms like `|u|^{p-2} u ξ` and weighted sources. The default
//! rules are exact to degree 5 (segments) and degree 4 (triangles), all with
//! positive weights.

/// One quadrature point in barycentric coordinates with its weight.
/// Weights sum to 1 so that element integrals scale by the element measure.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

/// Gauss-Legendre rule on a segment, degree-5 exact (3 points).
pub const SEGMENT_RULE: [QuadPoint; 3] = {
    // nodes (1 ± sqrt(3/5))/2 and 1/2, weights 5/18, 8/18, 5/18
    const A: f64 = 0.887298334620741688; // (1 + sqrt(0.6)) / 2
    const B: f64 = 0.112701665379258312;
    [
        QuadPoint {
            bary: [A, B, 0.0],
            weight: 5.0 / 18.0,
        },
        QuadPoint {
            bary: [0.5, 0.5, 0.0],
            weight: 8.0 / 18.0,
        },
        QuadPoint {
            bary: [B, A, 0.0],
            weight: 5.0 / 18.0,
        },
    ]
};

/// Six-point triangle rule, degree-4 exact, positive weights.
pub const TRIANGLE_RULE: [QuadPoint; 6] = {
    const W1: f64 = 0.223381589678011;
    const A1: f64 = 0.445948490915965;
    const W2: f64 = 0.109951743655322;
    const A2: f64 = 0.091576213509771;
    [
        QuadPoint {
            bary: [1.0 - 2.0 * A1, A1, A1],
            weight: W1,
        },
        QuadPoint {
            bary: [A1, 1.0 - 2.0 * A1, A1],
            weight: W1,
        },
        QuadPoint {
            bary: [A1, A1, 1.0 - 2.0 * A1],
            weight: W1,
        },
        QuadPoint {
            bary: [1.0 - 2.0 * A2, A2, A2],
            weight: W2,
        },
        QuadPoint {
            bary: [A2, 1.0 - 2.0 * A2, A2],
            weight: W2,
        },
        QuadPoint {
            bary: [A2, A2, 1.0 - 2.0 * A2],
            weight: W2,
        },
    ]
};

/// Higher-order fallback rules for configurable accuracy: 5-point segment
/// (degree 9) and 7-point triangle (degree 5).
pub const SEGMENT_RULE_HIGH: [QuadPoint; 5] = {
    const X1: f64 = 0.046910077030668;
    const X2: f64 = 0.230765344947158;
    const W1: f64 = 0.118463442528095;
    const W2: f64 = 0.239314335249683;
    const W3: f64 = 0.284444444444444;
    [
        QuadPoint {
            bary: [1.0 - X1, X1, 0.0],
            weight: W1,
        },
        QuadPoint {
            bary: [1.0 - X2, X2, 0.0],
            weight: W2,
        },
        QuadPoint {
            bary: [0.5, 0.5, 0.0],
            weight: W3,
        },
        QuadPoint {
            bary: [X2, 1.0 - X2, 0.0],
            weight: W2,
        },
        QuadPoint {
            bary: [X1, 1.0 - X1, 0.0],
            weight: W1,
        },
    ]
};

pub const TRIANGLE_RULE_HIGH: [QuadPoint; 7] = {
    const W0: f64 = 0.225;
    const A1: f64 = 0.470142064105115;
    const W1: f64 = 0.132394152788506;
    const A2: f64 = 0.101286507323456;
    const W2: f64 = 0.125939180544827;
    [
        QuadPoint {
            bary: [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            weight: W0,
        },
        QuadPoint {
            bary: [1.0 - 2.0 * A1, A1, A1],
            weight: W1,
        },
        QuadPoint {
            bary: [A1, 1.0 - 2.0 * A1, A1],
            weight: W1,
        },
        QuadPoint {
            bary: [A1, A1, 1.0 - 2.0 * A1],
            weight: W1,
        },
        QuadPoint {
            bary: [1.0 - 2.0 * A2, A2, A2],
            weight: W2,
        },
        QuadPoint {
            bary: [A2, 1.0 - 2.0 * A2, A2],
            weight: W2,
        },
        QuadPoint {
            bary: [A2, A2, 1.0 - 2.0 * A2],
            weight: W2,
        },
    ]
};

/// Pick the rule for a given element vertex count and requested polynomial
/// degree. Degrees above the default rule's exactness switch to the high rule.
pub fn rule_for(verts_per_element: usize, degree: usize) -> &'static [QuadPoint] {
    match (verts_per_element, degree) {
        (2, d) if d <= 5 => &SEGMENT_RULE,
        (2, _) => &SEGMENT_RULE_HIGH,
        (3, d) if d <= 4 => &TRIANGLE_RULE,
        _ => &TRIANGLE_RULE_HIGH,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate_segment(rule: &[QuadPoint], f: impl Fn(f64) -> f64) -> f64 {
        rule.iter().map(|q| q.weight * f(q.bary[1])).sum()
    }

    #[test]
    fn segment_rules_exact_for_polynomials() {
        for k in 0..=5usize {
            let exact = 1.0 / (k as f64 + 1.0);
            let got = integrate_segment(&SEGMENT_RULE, |x| x.powi(k as i32));
            assert!((got - exact).abs() < 1e-14, "degree {k}");
        }
        for k in 0..=9usize {
            let exact = 1.0 / (k as f64 + 1.0);
            let got = integrate_segment(&SEGMENT_RULE_HIGH, |x| x.powi(k as i32));
            assert!((got - exact).abs() < 1e-13, "degree {k}");
        }
    }

    #[test]
    fn triangle_rules_integrate_monomials() {
        // On the reference triangle, ∫ x^a y^b = a! b! / (a+b+2)! times 2*area;
        // with weights normalized to sum 1 the rule returns the mean value.
        let mean = |rule: &[QuadPoint], a: i32, b: i32| -> f64 {
            rule.iter()
                .map(|q| q.weight * q.bary[1].powi(a) * q.bary[2].powi(b))
                .sum()
        };
        let fact = |k: i32| -> f64 { (1..=k).map(|i| i as f64).product::<f64>().max(1.0) };
        for rule in [&TRIANGLE_RULE[..], &TRIANGLE_RULE_HIGH[..]] {
            for (a, b) in [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (3, 1), (4, 0)] {
                let exact = fact(a) * fact(b) / fact(a + b + 2) * 2.0;
                assert!(
                    (mean(rule, a, b) - exact).abs() < 1e-14,
                    "x^{a} y^{b}: {} vs {}",
                    mean(rule, a, b),
                    exact
                );
            }
        }
    }

    #[test]
    fn weights_positive_and_normalized() {
        for rule in [
            &SEGMENT_RULE[..],
            &SEGMENT_RULE_HIGH[..],
            &TRIANGLE_RULE[..],
            &TRIANGLE_RULE_HIGH[..],
        ] {
            assert!(rule.iter().all(|q| q.weight > 0.0));
            let s: f64 = rule.iter().map(|q| q.weight).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }
}
