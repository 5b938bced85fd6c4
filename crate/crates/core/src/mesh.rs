//! P1 triangulations of planar domains.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("degenerate rectangle [{x0}, {x1}] x [{y0}, {y1}] or empty subdivision")]
    DegenerateRect { x0: f64, y0: f64, x1: f64, y1: f64 },
    #[error("invalid disc parameters: radius {radius}, levels {levels}")]
    InvalidDisc { radius: f64, levels: usize },
    #[error("triangle {0} has non-positive signed area")]
    InvertedTriangle(usize),
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("boundary flag of vertex {0} disagrees with the edge topology")]
    BoundaryMismatch(usize),
    #[error("non-finite integrand on element {element}")]
    NonFinite { element: usize },
    #[error("expected {expected} nodal values, got {got}")]
    Length { expected: usize, got: usize },
}

/// Per-triangle constants: area and the (constant) gradients of the three
/// barycentric basis functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub area: f64,
    pub basis_gradients: [[f64; 2]; 3],
    pub centroid: [f64; 2],
}

/// A conforming triangulation with a Dirichlet mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    geometry: Vec<ElementGeometry>,
}

/// Quadrature on the reference triangle, in barycentric coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// Centroid rule, exact for degree 1.
    #[default]
    OnePoint,
    /// Interior three-point rule, exact for degree 2.
    ThreePoint,
}

const ONE_POINT: [([f64; 3], f64); 1] = [([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 1.0)];
const THREE_POINT: [([f64; 3], f64); 3] = [
    ([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], 1.0 / 3.0),
];

impl Quadrature {
    /// `(barycentric point, weight)` pairs; weights sum to 1.
    pub fn points(self) -> &'static [([f64; 3], f64)] {
        match self {
            Quadrature::OnePoint => &ONE_POINT,
            Quadrature::ThreePoint => &THREE_POINT,
        }
    }

    pub fn degree(self) -> usize {
        match self {
            Quadrature::OnePoint => 1,
            Quadrature::ThreePoint => 2,
        }
    }
}

/// The three-point rule used for every integrand that is nonlinear in `u`.
pub const VALUE_RULE: Quadrature = Quadrature::ThreePoint;

fn element_geometry(v: [[f64; 2]; 3]) -> ElementGeometry {
    let [a, b, c] = v;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let area = 0.5 * det;
    // grad(lambda_i) = rot90(opposite edge) / det
    let g = |p: [f64; 2], q: [f64; 2]| [(p[1] - q[1]) / det, (q[0] - p[0]) / det];
    ElementGeometry {
        area,
        basis_gradients: [g(b, c), g(c, a), g(a, b)],
        centroid: [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0],
    }
}

impl Mesh {
    /// Builds a mesh from raw parts and validates it.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<bool>,
    ) -> Result<Mesh, MeshError> {
        if boundary.len() != vertices.len() {
            return Err(MeshError::Length {
                expected: vertices.len(),
                got: boundary.len(),
            });
        }
        let geometry = triangles
            .iter()
            .map(|t| element_geometry([vertices[t[0]], vertices[t[1]], vertices[t[2]]]))
            .collect();
        let mesh = Mesh {
            vertices,
            triangles,
            boundary,
            geometry,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Checks orientation, edge manifoldness and that the boundary mask marks
    /// exactly the vertices on boundary edges.
    pub fn validate(&self) -> Result<(), MeshError> {
        for (i, g) in self.geometry.iter().enumerate() {
            if !(g.area > 0.0) {
                return Err(MeshError::InvertedTriangle(i));
            }
        }
        let mut edges: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let mut on_boundary = vec![false; self.vertices.len()];
        for (&(a, b), &n) in &edges {
            match n {
                1 => {
                    on_boundary[a] = true;
                    on_boundary[b] = true;
                }
                2 => {}
                _ => return Err(MeshError::NonManifoldEdge(a, b)),
            }
        }
        for (i, (&flag, &topo)) in self.boundary.iter().zip(&on_boundary).enumerate() {
            if flag != topo {
                return Err(MeshError::BoundaryMismatch(i));
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn geometry(&self) -> &[ElementGeometry] {
        &self.geometry
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    /// Indices of vertices not constrained by the Dirichlet condition.
    pub fn free_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&i| !self.boundary[i]).collect()
    }

    pub fn total_area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    /// Maps a barycentric point of triangle `t` to physical coordinates.
    pub fn map_point(&self, t: usize, bary: [f64; 3]) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let (a, b, c) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        [
            bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
            bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
        ]
    }

    /// `[x0, y0, x1, y1]` of the vertex cloud.
    pub fn bounding_box(&self) -> [f64; 4] {
        let mut bb = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for v in &self.vertices {
            bb[0] = bb[0].min(v[0]);
            bb[1] = bb[1].min(v[1]);
            bb[2] = bb[2].max(v[0]);
            bb[3] = bb[3].max(v[1]);
        }
        bb
    }

    /// Triangle containing `x` and the barycentric coordinates of `x` in it
    /// (linear scan; tolerance `1e-12` on the coordinates).
    pub fn locate(&self, x: [f64; 2]) -> Option<(usize, [f64; 3])> {
        for (t, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|v| self.vertices[v]);
            let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            let l1 = ((x[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (x[1] - a[1])) / det;
            let l2 = ((b[0] - a[0]) * (x[1] - a[1]) - (x[0] - a[0]) * (b[1] - a[1])) / det;
            let l0 = 1.0 - l1 - l2;
            if l0 >= -1e-12 && l1 >= -1e-12 && l2 >= -1e-12 {
                return Some((t, [l0, l1, l2]));
            }
        }
        None
    }
}

/// Structured triangulation of `[x0, x1] x [y0, y1]` with `nx * ny` cells,
/// each split along a diagonal whose direction alternates in a checkerboard
/// pattern. Halving the cell size refines the coarse triangles.
pub fn build_rect_mesh(
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    nx: usize,
    ny: usize,
) -> Result<Mesh, MeshError> {
    if !(x1 > x0 && y1 > y0) || nx == 0 || ny == 0 || !(x0.is_finite() && y0.is_finite() && x1.is_finite() && y1.is_finite())
    {
        return Err(MeshError::DegenerateRect { x0, y0, x1, y1 });
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut boundary = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = if j == ny { y1 } else { y0 + (y1 - y0) * j as f64 / ny as f64 };
        for i in 0..=nx {
            let x = if i == nx { x1 } else { x0 + (x1 - x0) * i as f64 / nx as f64 };
            vertices.push([x, y]);
            boundary.push(i == 0 || j == 0 || i == nx || j == ny);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    Mesh::new(vertices, triangles, boundary)
}

/// Polygonal disc: a centre vertex and `levels` concentric rings, ring `k`
/// carrying `6k` equally spaced vertices at radius `k * radius / levels`.
/// The outermost ring is the Dirichlet boundary.
pub fn build_disc_mesh(center: [f64; 2], radius: f64, levels: usize) -> Result<Mesh, MeshError> {
    if !(radius > 0.0) || !radius.is_finite() || levels == 0 {
        return Err(MeshError::InvalidDisc { radius, levels });
    }
    let ring_start = |k: usize| if k == 0 { 0 } else { 1 + 3 * k * (k - 1) };
    let n_vertices = ring_start(levels + 1);
    let mut vertices = Vec::with_capacity(n_vertices);
    let mut boundary = Vec::with_capacity(n_vertices);
    vertices.push(center);
    boundary.push(false);
    let tau = 2.0 * core::f64::consts::PI;
    for k in 1..=levels {
        let rho = if k == levels { radius } else { radius * k as f64 / levels as f64 };
        let n = 6 * k;
        for j in 0..n {
            let th = tau * j as f64 / n as f64;
            vertices.push([center[0] + rho * math::cos(th), center[1] + rho * math::sin(th)]);
            boundary.push(k == levels);
        }
    }
    let mut triangles = Vec::with_capacity(6 * levels * levels);
    for k in 1..=levels {
        let outer = |m: usize| ring_start(k) + m % (6 * k);
        let inner = |m: usize| {
            if k == 1 {
                0
            } else {
                ring_start(k - 1) + m % (6 * (k - 1))
            }
        };
        for s in 0..6 {
            for m in 0..k {
                triangles.push([outer(s * k + m), outer(s * k + m + 1), inner(s * (k - 1) + m)]);
            }
            for m in 0..k.saturating_sub(1) {
                triangles.push([
                    inner(s * (k - 1) + m),
                    outer(s * k + m + 1),
                    inner(s * (k - 1) + m + 1),
                ]);
            }
        }
    }
    Mesh::new(vertices, triangles, boundary)
}

/// A P1 function given by its nodal values.
///
/// Members of the zero-trace space have `values[v] == 0` at every boundary
/// vertex; see [`DiscreteFunction::satisfies_dirichlet`]. General nodal
/// functions (used for the Lebesgue-type norms) may be nonzero there.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunction<'m> {
    mesh: &'m Mesh,
    values: Vec<f64>,
}

impl<'m> DiscreteFunction<'m> {
    pub fn zeros(mesh: &'m Mesh) -> Self {
        DiscreteFunction {
            mesh,
            values: vec![0.0; mesh.num_vertices()],
        }
    }

    pub fn from_values(mesh: &'m Mesh, values: Vec<f64>) -> Result<Self, MeshError> {
        if values.len() != mesh.num_vertices() {
            return Err(MeshError::Length {
                expected: mesh.num_vertices(),
                got: values.len(),
            });
        }
        Ok(DiscreteFunction { mesh, values })
    }

    /// Nodal interpolant of `f`, boundary values included.
    pub fn interpolate(mesh: &'m Mesh, f: impl Fn([f64; 2]) -> f64) -> Self {
        DiscreteFunction {
            mesh,
            values: mesh.vertices().iter().map(|&p| f(p)).collect(),
        }
    }

    /// Nodal interpolant of `f` with the boundary values set to zero.
    pub fn interpolate_zero_trace(mesh: &'m Mesh, f: impl Fn([f64; 2]) -> f64) -> Self {
        let mut u = Self::interpolate(mesh, f);
        u.apply_dirichlet();
        u
    }

    pub fn apply_dirichlet(&mut self) {
        for (v, &b) in self.values.iter_mut().zip(self.mesh.boundary_mask()) {
            if b {
                *v = 0.0;
            }
        }
    }

    pub fn satisfies_dirichlet(&self) -> bool {
        self.values
            .iter()
            .zip(self.mesh.boundary_mask())
            .all(|(&v, &b)| !b || v == 0.0)
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        DiscreteFunction {
            mesh: self.mesh,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &DiscreteFunction<'_>) -> Self {
        DiscreteFunction {
            mesh: self.mesh,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    /// Value at a barycentric point of triangle `t`.
    pub fn value_at(&self, t: usize, bary: [f64; 3]) -> f64 {
        let [a, b, c] = self.mesh.triangles()[t];
        bary[0] * self.values[a] + bary[1] * self.values[b] + bary[2] * self.values[c]
    }

    /// Value at an arbitrary point of the mesh, `None` outside it.
    pub fn eval_point(&self, x: [f64; 2]) -> Option<f64> {
        self.mesh.locate(x).map(|(t, b)| self.value_at(t, b))
    }

    /// The constant gradient of the interpolant on triangle `t`.
    pub fn element_gradient(&self, t: usize) -> [f64; 2] {
        let tri = self.mesh.triangles()[t];
        let g = &self.mesh.geometry()[t].basis_gradients;
        let mut out = [0.0; 2];
        for k in 0..3 {
            let v = self.values[tri[k]];
            out[0] += v * g[k][0];
            out[1] += v * g[k][1];
        }
        out
    }
}

/// `sum_T area_T * sum_q w_q * density(x_q, T)`, summed in element order.
pub fn integrate(
    mesh: &Mesh,
    rule: Quadrature,
    mut density: impl FnMut([f64; 2], usize) -> f64,
) -> Result<f64, MeshError> {
    let mut total = 0.0;
    for (t, g) in mesh.geometry().iter().enumerate() {
        let mut local = 0.0;
        for &(bary, w) in rule.points() {
            let v = density(mesh.map_point(t, bary), t);
            if !v.is_finite() {
                return Err(MeshError::NonFinite { element: t });
            }
            local += w * v;
        }
        total += g.area * local;
    }
    Ok(total)
}
