//! Nodal scalar fields on a mesh.

use std::fmt::Write as _;

use crate::fem::FemError;
use crate::mesh::Mesh;

/// A P1 nodal field. Carries the id of the mesh it lives on so operations
/// can reject cross-mesh arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    mesh_id: u64,
    values: Vec<f64>,
}

impl Field {
    pub fn new(mesh: &Mesh, values: Vec<f64>) -> Result<Self, FemError> {
        if values.len() != mesh.node_count() {
            return Err(FemError::Shape {
                expected: mesh.node_count(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FemError::NonFinite);
        }
        Ok(Field {
            mesh_id: mesh.id(),
            values,
        })
    }

    pub fn zeros(mesh: &Mesh) -> Self {
        Field {
            mesh_id: mesh.id(),
            values: vec![0.0; mesh.node_count()],
        }
    }

    pub fn constant(mesh: &Mesh, c: f64) -> Self {
        Field {
            mesh_id: mesh.id(),
            values: vec![c; mesh.node_count()],
        }
    }

    /// Field from a function of the node coordinates.
    pub fn from_fn(mesh: &Mesh, f: impl Fn([f64; 2]) -> f64) -> Self {
        Field {
            mesh_id: mesh.id(),
            values: mesh.coords().iter().map(|&c| f(c)).collect(),
        }
    }

    pub fn mesh_id(&self) -> u64 {
        self.mesh_id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Minimum over interior nodes.
    pub fn interior_min(&self, mesh: &Mesh) -> f64 {
        mesh.interior_nodes()
            .map(|i| self.values[i])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn on_mesh(&self, mesh: &Mesh) -> Result<(), FemError> {
        if self.mesh_id != mesh.id() {
            Err(FemError::MeshMismatch)
        } else {
            Ok(())
        }
    }

    pub fn is_zero_on_boundary(&self, mesh: &Mesh, tol: f64) -> bool {
        mesh.boundary_nodes()
            .iter()
            .all(|&b| self.values[b].abs() <= tol)
    }

    pub fn scale(&self, c: f64) -> Field {
        Field {
            mesh_id: self.mesh_id,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            mesh_id: self.mesh_id,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Nodal max distance to another field.
    pub fn max_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// True when `self <= other + tol` at every node.
    pub fn le_nodal(&self, other: &Field, tol: f64) -> bool {
        self.values
            .iter()
            .zip(&other.values)
            .all(|(a, b)| *a <= *b + tol)
    }

    /// CSV serialization: `node,x[,y],value` with one header line.
    pub fn to_csv(&self, mesh: &Mesh) -> String {
        let mut out = String::new();
        if mesh.dimension() == 1 {
            out.push_str("node,x,value\n");
            for (i, v) in self.values.iter().enumerate() {
                let _ = writeln!(out, "{},{:.17e},{:.17e}", i, mesh.node(i)[0], v);
            }
        } else {
            out.push_str("node,x,y,value\n");
            for (i, v) in self.values.iter().enumerate() {
                let [x, y] = mesh.node(i);
                let _ = writeln!(out, "{},{:.17e},{:.17e},{:.17e}", i, x, y, v);
            }
        }
        out
    }

    /// Parse a field back from the CSV produced by [`Field::to_csv`].
    pub fn from_csv(mesh: &Mesh, text: &str) -> Result<Self, FemError> {
        let mut values = Vec::with_capacity(mesh.node_count());
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 || line.trim().is_empty() {
                continue;
            }
            let last = line
                .rsplit(',')
                .next()
                .ok_or_else(|| FemError::Csv(format!("line {}: empty", lineno + 1)))?;
            let v: f64 = last
                .trim()
                .parse()
                .map_err(|e| FemError::Csv(format!("line {}: {e}", lineno + 1)))?;
            values.push(v);
        }
        Field::new(mesh, values)
    }
}
