//! Simplicial meshes of the supported computational domains.
//!
//! Three domain families are supported: the unit interval `(0,1)`, the unit
//! square `(0,1)^2`, and a regular-polygon approximation of the unit disk.
//! All meshes are P1-ready: each element carries its measure and the constant
//! gradients of its local basis functions, so downstream assembly never has
//! to touch geometry again.
//!
//! Boundary-strip queries (`boundary_strip`) measure distance to the
//! *analytic* boundary description rather than the discrete boundary, so the
//! strip is independent of the mesh resolution.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

static MESH_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid resolution {n}: need at least {min} elements")]
    InvalidResolution { n: usize, min: usize },
    #[error("invalid strip width {delta}: must lie in (0, {inradius})")]
    InvalidStrip { delta: f64, inradius: f64 },
    #[error("mesh i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed mesh text: {0}")]
    Parse(String),
}

/// Analytic description of the domain; the source of boundary distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// Interval `(0, length)`; the spec-facing constructors use `length = 1`.
    Interval { length: f64 },
    /// Unit square `(0,1)^2`.
    UnitSquare,
    /// Regular polygon with `vertices` corners inscribed in the unit circle.
    DiskPolygon { vertices: usize },
}

impl Domain {
    /// Distance from `x` to the analytic boundary.
    pub fn boundary_distance(&self, x: [f64; 2]) -> f64 {
        match *self {
            Domain::Interval { length } => x[0].min(length - x[0]).max(0.0),
            Domain::UnitSquare => {
                let dx = x[0].min(1.0 - x[0]);
                let dy = x[1].min(1.0 - x[1]);
                dx.min(dy).max(0.0)
            }
            Domain::DiskPolygon { vertices } => {
                // Interior distance to a regular polygon: min over the
                // supporting half-planes of the edges.
                let k = vertices as f64;
                let apothem = (std::f64::consts::PI / k).cos();
                let mut d = f64::INFINITY;
                for i in 0..vertices {
                    let theta = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / k;
                    let proj = x[0] * theta.cos() + x[1] * theta.sin();
                    d = d.min(apothem - proj);
                }
                d.max(0.0)
            }
        }
    }

    /// Inradius of the domain.
    pub fn inradius(&self) -> f64 {
        match *self {
            Domain::Interval { length } => 0.5 * length,
            Domain::UnitSquare => 0.5,
            Domain::DiskPolygon { vertices } => (std::f64::consts::PI / vertices as f64).cos(),
        }
    }

    /// Exact measure (length/area) of the domain.
    pub fn measure(&self) -> f64 {
        match *self {
            Domain::Interval { length } => length,
            Domain::UnitSquare => 1.0,
            Domain::DiskPolygon { vertices } => {
                let k = vertices as f64;
                0.5 * k * (2.0 * std::f64::consts::PI / k).sin()
            }
        }
    }
}

/// Per-element P1 geometry: measure plus the constant gradient of each local
/// basis function.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub measure: f64,
    /// `grads[v]` is the gradient of the hat function of local vertex `v`.
    /// For segments only the first two entries and the x component are used.
    pub grads: [[f64; 2]; 3],
}

/// Immutable simplicial mesh. Construction assigns a process-unique `id`
/// that fields carry around so cross-mesh operations can be rejected.
#[derive(Debug, Clone)]
pub struct Mesh {
    id: u64,
    domain: Domain,
    dimension: usize,
    coords: Vec<[f64; 2]>,
    /// Node indices, `verts_per_element` consecutive entries per element.
    connectivity: Vec<usize>,
    verts_per_element: usize,
    geometry: Vec<ElementGeometry>,
    boundary_nodes: Vec<usize>,
    is_boundary: Vec<bool>,
}

/// Partition of the node set into a boundary strip and its complement.
#[derive(Debug, Clone)]
pub struct NodeSet {
    pub indices: Vec<usize>,
    pub complement_indices: Vec<usize>,
}

/// Uniform mesh of the unit interval with `n` segments.
pub fn build_interval_mesh(n: usize) -> Result<Mesh, MeshError> {
    build_scaled_interval_mesh(n, 1.0)
}

/// Uniform mesh of `(0, length)`. The unit interval is the spec'd domain;
/// other lengths exist for scaling studies.
pub fn build_scaled_interval_mesh(n: usize, length: f64) -> Result<Mesh, MeshError> {
    if n < 2 {
        return Err(MeshError::InvalidResolution { n, min: 2 });
    }
    let h = length / n as f64;
    let coords: Vec<[f64; 2]> = (0..=n).map(|i| [i as f64 * h, 0.0]).collect();
    let mut connectivity = Vec::with_capacity(2 * n);
    let mut geometry = Vec::with_capacity(n);
    for e in 0..n {
        connectivity.push(e);
        connectivity.push(e + 1);
        geometry.push(ElementGeometry {
            measure: h,
            grads: [[-1.0 / h, 0.0], [1.0 / h, 0.0], [0.0, 0.0]],
        });
    }
    Ok(Mesh {
        id: MESH_ID.fetch_add(1, Ordering::Relaxed),
        domain: Domain::Interval { length },
        dimension: 1,
        coords,
        connectivity,
        verts_per_element: 2,
        geometry,
        boundary_nodes: vec![0, n],
        is_boundary: {
            let mut b = vec![false; n + 1];
            b[0] = true;
            b[n] = true;
            b
        },
    })
}

/// Structured triangulation of the unit square: `n x n` cells, each split
/// along the diagonal from its lower-left to upper-right corner.
pub fn build_square_mesh(n: usize) -> Result<Mesh, MeshError> {
    if n < 2 {
        return Err(MeshError::InvalidResolution { n, min: 2 });
    }
    let h = 1.0 / n as f64;
    let nodes_per_side = n + 1;
    let mut coords = Vec::with_capacity(nodes_per_side * nodes_per_side);
    for j in 0..nodes_per_side {
        for i in 0..nodes_per_side {
            coords.push([i as f64 * h, j as f64 * h]);
        }
    }
    let idx = |i: usize, j: usize| j * nodes_per_side + i;
    let mut connectivity = Vec::with_capacity(3 * 2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            connectivity.extend_from_slice(&[a, b, c]);
            connectivity.extend_from_slice(&[a, c, d]);
        }
    }
    let geometry = triangle_geometry(&coords, &connectivity);
    let mut is_boundary = vec![false; coords.len()];
    for (k, &[x, y]) in coords.iter().enumerate() {
        if x < 1e-14 || x > 1.0 - 1e-14 || y < 1e-14 || y > 1.0 - 1e-14 {
            is_boundary[k] = true;
        }
    }
    let boundary_nodes = is_boundary
        .iter()
        .enumerate()
        .filter_map(|(k, &b)| b.then_some(k))
        .collect();
    Ok(Mesh {
        id: MESH_ID.fetch_add(1, Ordering::Relaxed),
        domain: Domain::UnitSquare,
        dimension: 2,
        coords,
        connectivity,
        verts_per_element: 3,
        geometry,
        boundary_nodes,
        is_boundary,
    })
}

/// Polar mesh of a regular `vertices`-gon inscribed in the unit circle:
/// `rings` concentric rings of `vertices` nodes around a center node.
pub fn build_disk_mesh(rings: usize, vertices: usize) -> Result<Mesh, MeshError> {
    if rings < 2 {
        return Err(MeshError::InvalidResolution { n: rings, min: 2 });
    }
    if vertices < 3 {
        return Err(MeshError::InvalidResolution { n: vertices, min: 3 });
    }
    let k = vertices;
    let mut coords = vec![[0.0, 0.0]];
    for j in 1..=rings {
        let r = j as f64 / rings as f64;
        for i in 0..k {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
            coords.push([r * theta.cos(), r * theta.sin()]);
        }
    }
    let ring_node = |j: usize, i: usize| 1 + (j - 1) * k + (i % k);
    let mut connectivity = Vec::new();
    for i in 0..k {
        connectivity.extend_from_slice(&[0, ring_node(1, i), ring_node(1, i + 1)]);
    }
    for j in 1..rings {
        for i in 0..k {
            let (a, b) = (ring_node(j, i), ring_node(j, i + 1));
            let (c, d) = (ring_node(j + 1, i), ring_node(j + 1, i + 1));
            connectivity.extend_from_slice(&[a, d, c]);
            connectivity.extend_from_slice(&[a, b, d]);
        }
    }
    let geometry = triangle_geometry(&coords, &connectivity);
    let mut is_boundary = vec![false; coords.len()];
    for i in 0..k {
        is_boundary[ring_node(rings, i)] = true;
    }
    let boundary_nodes = is_boundary
        .iter()
        .enumerate()
        .filter_map(|(idx2, &b)| b.then_some(idx2))
        .collect();
    Ok(Mesh {
        id: MESH_ID.fetch_add(1, Ordering::Relaxed),
        domain: Domain::DiskPolygon { vertices },
        dimension: 2,
        coords,
        connectivity,
        verts_per_element: 3,
        geometry,
        boundary_nodes,
        is_boundary,
    })
}

fn triangle_geometry(coords: &[[f64; 2]], connectivity: &[usize]) -> Vec<ElementGeometry> {
    connectivity
        .chunks(3)
        .map(|tri| {
            let p = [coords[tri[0]], coords[tri[1]], coords[tri[2]]];
            let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
                - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
            let area = 0.5 * det.abs();
            debug_assert!(area > 0.0, "degenerate triangle");
            // Gradient of hat_i on a triangle: rotate the opposite edge.
            let mut grads = [[0.0; 2]; 3];
            for v in 0..3 {
                let a = p[(v + 1) % 3];
                let b = p[(v + 2) % 3];
                grads[v] = [(a[1] - b[1]) / det, (b[0] - a[0]) / det];
            }
            ElementGeometry {
                measure: area,
                grads,
            }
        })
        .collect()
}

impl Mesh {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn node_count(&self) -> usize {
        self.coords.len()
    }

    pub fn element_count(&self) -> usize {
        self.geometry.len()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn node(&self, i: usize) -> [f64; 2] {
        self.coords[i]
    }

    pub fn verts_per_element(&self) -> usize {
        self.verts_per_element
    }

    /// Node indices of element `e`.
    pub fn element(&self, e: usize) -> &[usize] {
        let v = self.verts_per_element;
        &self.connectivity[e * v..(e + 1) * v]
    }

    pub fn geometry(&self, e: usize) -> &ElementGeometry {
        &self.geometry[e]
    }

    pub fn element_measures(&self) -> impl Iterator<Item = f64> + '_ {
        self.geometry.iter().map(|g| g.measure)
    }

    pub fn total_measure(&self) -> f64 {
        self.geometry.iter().map(|g| g.measure).sum()
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.is_boundary[node]
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(|&i| !self.is_boundary[i])
    }

    pub fn inradius(&self) -> f64 {
        self.domain.inradius()
    }

    /// Analytic distance from node `i` to the domain boundary.
    pub fn boundary_distance(&self, i: usize) -> f64 {
        self.domain.boundary_distance(self.coords[i])
    }

    /// Nodes whose analytic boundary distance is at most `delta`, plus the
    /// complementary interior set.
    pub fn boundary_strip(&self, delta: f64) -> Result<NodeSet, MeshError> {
        let inradius = self.inradius();
        if !(delta > 0.0 && delta < inradius) {
            return Err(MeshError::InvalidStrip { delta, inradius });
        }
        let mut indices = Vec::new();
        let mut complement = Vec::new();
        for i in 0..self.node_count() {
            if self.boundary_distance(i) <= delta {
                indices.push(i);
            } else {
                complement.push(i);
            }
        }
        Ok(NodeSet {
            indices,
            complement_indices: complement,
        })
    }

    /// Plain-text serialization: nodes, elements, boundary list.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# nodes {} {}", self.node_count(), self.dimension);
        for c in &self.coords {
            if self.dimension == 1 {
                let _ = writeln!(out, "{:.17e}", c[0]);
            } else {
                let _ = writeln!(out, "{:.17e} {:.17e}", c[0], c[1]);
            }
        }
        let _ = writeln!(out, "# elements {}", self.element_count());
        for e in 0..self.element_count() {
            let nodes = self.element(e);
            let line: Vec<String> = nodes.iter().map(|n| n.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        let _ = writeln!(out, "# boundary {}", self.boundary_nodes.len());
        let line: Vec<String> = self.boundary_nodes.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
        out
    }
}

/// Convenience wrapper matching the free-function naming used by the CLI.
pub fn boundary_strip(mesh: &Mesh, delta: f64) -> Result<NodeSet, MeshError> {
    mesh.boundary_strip(delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_small() {
        let m = build_interval_mesh(2).unwrap();
        assert_eq!(m.node_count(), 3);
        assert_eq!(m.coords()[1][0], 0.5);
        assert_eq!(m.boundary_nodes(), &[0, 2]);
    }

    #[test]
    fn interval_measures() {
        let m = build_interval_mesh(4).unwrap();
        for mu in m.element_measures() {
            assert!((mu - 0.25).abs() < 1e-15);
        }
        assert!((m.total_measure() - 1.0).abs() < 1e-15);

        let m = build_interval_mesh(256).unwrap();
        assert_eq!(m.node_count(), 257);
        assert!((m.total_measure() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interval_too_coarse() {
        assert!(matches!(
            build_interval_mesh(1),
            Err(MeshError::InvalidResolution { .. })
        ));
    }

    #[test]
    fn square_counts_and_area() {
        let m = build_square_mesh(2).unwrap();
        assert_eq!(m.node_count(), 9);
        assert_eq!(m.element_count(), 8);
        assert_eq!(m.boundary_nodes().len(), 8);
        assert!((m.total_measure() - 1.0).abs() < 1e-15);

        let m = build_square_mesh(32).unwrap();
        assert_eq!(m.element_count(), 2048);
        assert!((m.total_measure() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_boundary_on_analytic_boundary() {
        let m = build_square_mesh(8).unwrap();
        for &b in m.boundary_nodes() {
            assert!(m.boundary_distance(b) < 1e-12);
        }
    }

    #[test]
    fn strip_interval() {
        let m = build_interval_mesh(4).unwrap();
        let s = m.boundary_strip(0.3).unwrap();
        assert_eq!(s.indices, vec![0, 1, 3, 4]);
        assert_eq!(s.complement_indices, vec![2]);
    }

    #[test]
    fn strip_exceeding_inradius() {
        let m = build_interval_mesh(4).unwrap();
        assert!(matches!(
            m.boundary_strip(0.6),
            Err(MeshError::InvalidStrip { .. })
        ));
        assert!(m.boundary_strip(0.499).is_ok());
    }

    #[test]
    fn strip_square_complement() {
        let m = build_square_mesh(4).unwrap();
        let s = m.boundary_strip(0.3).unwrap();
        for &i in &s.complement_indices {
            let [x, y] = m.node(i);
            assert!(x >= 0.3 - 1e-12 && x <= 0.7 + 1e-12);
            assert!(y >= 0.3 - 1e-12 && y <= 0.7 + 1e-12);
        }
        // partition property
        let mut all: Vec<usize> = s
            .indices
            .iter()
            .chain(s.complement_indices.iter())
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..m.node_count()).collect::<Vec<_>>());
    }

    #[test]
    fn strip_complement_shrinks_with_delta() {
        let m = build_square_mesh(16).unwrap();
        let mut last = usize::MAX;
        for k in 1..9 {
            let delta = 0.05 * k as f64;
            let s = m.boundary_strip(delta).unwrap();
            assert!(s.complement_indices.len() <= last);
            last = s.complement_indices.len();
        }
    }

    #[test]
    fn refinement_keeps_measure_and_boundary_geometry() {
        for n in [4, 8] {
            let coarse = build_square_mesh(n).unwrap();
            let fine = build_square_mesh(2 * n).unwrap();
            assert!((coarse.total_measure() - fine.total_measure()).abs() < 1e-12);
            for &b in fine.boundary_nodes() {
                assert!(fine.boundary_distance(b) < 1e-12);
            }
        }
    }

    #[test]
    fn disk_mesh_geometry() {
        let m = build_disk_mesh(8, 64).unwrap();
        let poly_area = m.domain().measure();
        assert!((m.total_measure() - poly_area).abs() < 1e-10 * poly_area);
        assert!((poly_area - std::f64::consts::PI).abs() < 0.01);
        for &b in m.boundary_nodes() {
            assert!(m.boundary_distance(b) < 1e-12);
        }
        assert!((m.inradius() - (std::f64::consts::PI / 64.0).cos()).abs() < 1e-15);
    }

    #[test]
    fn mesh_text_roundtrippable_header() {
        let m = build_interval_mesh(4).unwrap();
        let txt = m.to_text();
        assert!(txt.starts_with("# nodes 5 1\n"));
        assert!(txt.contains("# elements 4"));
        assert!(txt.contains("# boundary 2"));
    }
}
