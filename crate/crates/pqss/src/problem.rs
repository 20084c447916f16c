//! Problem data: exponents, parameters and weight fields.

use thiserror::Error;

use crate::fem::field::Field;
use crate::mesh::Mesh;
use crate::nonlinearity::WeightBounds;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("exponent {0} must exceed 1")]
    BadExponent(f64),
    #[error("parameter {name} = {value} must be nonnegative")]
    NegativeParameter { name: &'static str, value: f64 },
    #[error("weight {name} must be strictly positive (min = {min})")]
    NonPositiveWeight { name: &'static str, min: f64 },
}

/// A coefficient function: constant or nodal P1 field.
#[derive(Debug, Clone)]
pub enum WeightField {
    Constant(f64),
    Nodal(Field),
}

impl WeightField {
    pub fn min(&self) -> f64 {
        match self {
            WeightField::Constant(c) => *c,
            WeightField::Nodal(f) => f.values().iter().fold(f64::INFINITY, |m, &v| m.min(v)),
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            WeightField::Constant(c) => *c,
            WeightField::Nodal(f) => f.values().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)),
        }
    }

    /// Value at a quadrature point given the element's node indices and
    /// barycentric coordinates.
    pub fn at(&self, nodes: &[usize], bary: &[f64; 3]) -> f64 {
        match self {
            WeightField::Constant(c) => *c,
            WeightField::Nodal(f) => {
                let vals = f.values();
                nodes
                    .iter()
                    .zip(bary.iter())
                    .map(|(&n, &b)| b * vals[n])
                    .sum()
            }
        }
    }

    pub fn nodal_value(&self, node: usize) -> f64 {
        match self {
            WeightField::Constant(c) => *c,
            WeightField::Nodal(f) => f.values()[node],
        }
    }
}

/// Parameters of the coupled system: exponents `p, q`, the four scalars
/// `lambda1, lambda2, mu1, mu2`, and the weights `a, b, alpha, beta`.
#[derive(Debug, Clone)]
pub struct ProblemParams {
    pub p: f64,
    pub q: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub a: WeightField,
    pub b: WeightField,
    pub alpha: WeightField,
    pub beta: WeightField,
}

impl ProblemParams {
    /// Unit weights, all four parameters zero.
    pub fn new(p: f64, q: f64) -> Self {
        ProblemParams {
            p,
            q,
            lambda1: 0.0,
            lambda2: 0.0,
            mu1: 0.0,
            mu2: 0.0,
            a: WeightField::Constant(1.0),
            b: WeightField::Constant(1.0),
            alpha: WeightField::Constant(1.0),
            beta: WeightField::Constant(1.0),
        }
    }

    pub fn with_rates(mut self, lambda1: f64, mu1: f64, lambda2: f64, mu2: f64) -> Self {
        self.lambda1 = lambda1;
        self.mu1 = mu1;
        self.lambda2 = lambda2;
        self.mu2 = mu2;
        self
    }

    pub fn validate(&self, mesh: Option<&Mesh>) -> Result<(), ProblemError> {
        if !(self.p > 1.0) {
            return Err(ProblemError::BadExponent(self.p));
        }
        if !(self.q > 1.0) {
            return Err(ProblemError::BadExponent(self.q));
        }
        for (name, v) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
        ] {
            if v < 0.0 {
                return Err(ProblemError::NegativeParameter { name, value: v });
            }
        }
        for (name, w) in [
            ("a", &self.a),
            ("b", &self.b),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
        ] {
            if w.min() <= 0.0 {
                return Err(ProblemError::NonPositiveWeight { name, min: w.min() });
            }
            if let (WeightField::Nodal(f), Some(m)) = (w, mesh) {
                if f.on_mesh(m).is_err() {
                    return Err(ProblemError::NonPositiveWeight {
                        name,
                        min: f64::NAN,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn weight_bounds(&self) -> WeightBounds {
        WeightBounds {
            a1: self.a.min(),
            b1: self.b.min(),
            alpha1: self.alpha.min(),
            beta1: self.beta.min(),
        }
    }

    pub fn sum1(&self) -> f64 {
        self.lambda1 + self.mu1
    }

    pub fn sum2(&self) -> f64 {
        self.lambda2 + self.mu2
    }
}
