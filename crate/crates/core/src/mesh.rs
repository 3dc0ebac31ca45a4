//! Conforming triangulations of polygonal domains.
//!
//! Cells are stored counter-clockwise. Local edge `i` of a cell is the edge
//! opposite local vertex `i`; this convention is relied upon by the
//! Crouzeix-Raviart basis in [`crate::discretisation`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::scalar::{cross, norm, sub, Scalar, Vec2};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("structured mesh needs at least one cell per side")]
    ZeroResolution,
    #[error("cell {cell} references vertex {vertex}, but the mesh has {count} vertices")]
    VertexOutOfRange { cell: usize, vertex: usize, count: usize },
    #[error("cell {cell} has non-positive signed area {area:e} (cells must be counter-clockwise)")]
    NonPositiveArea { cell: usize, area: f64 },
    #[error("edge ({a}, {b}) is shared by more than two cells")]
    NonManifoldEdge { a: usize, b: usize },
    #[error("mesh has no cells")]
    Empty,
    #[error("point ({x}, {y}) is not inside cell {cell}")]
    PointOutsideCell { cell: usize, x: f64, y: f64 },
    #[error("mesh file, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge<T> {
    /// Sorted vertex pair.
    pub vertices: [usize; 2],
    /// Adjacent cells; the second entry is `None` on boundary edges.
    pub cells: [Option<usize>; 2],
    pub midpoint: Vec2<T>,
    pub length: T,
    pub boundary: bool,
}

/// One edge of a cell, seen from that cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellEdge<T> {
    pub edge: usize,
    /// Outward unit normal with respect to the owning cell.
    pub normal: Vec2<T>,
}

#[derive(Debug, Clone)]
pub struct Mesh<T> {
    vertices: Vec<Vec2<T>>,
    cells: Vec<[usize; 3]>,
    edges: Vec<Edge<T>>,
    cell_edges: Vec<[CellEdge<T>; 3]>,
    areas: Vec<T>,
}

impl<T: Scalar> Mesh<T> {
    /// Builds the edge structure of a triangulation given by vertex coordinates
    /// and counter-clockwise vertex-index triples.
    pub fn new(vertices: Vec<Vec2<T>>, cells: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if cells.is_empty() {
            return Err(MeshError::Empty);
        }
        let mut areas = Vec::with_capacity(cells.len());
        for (c, tri) in cells.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(MeshError::VertexOutOfRange { cell: c, vertex: v, count: vertices.len() });
                }
            }
            let [p0, p1, p2] = tri.map(|v| vertices[v]);
            let area = cross(sub(p1, p0), sub(p2, p0)) / T::of(2.0);
            if !(area > T::zero()) {
                return Err(MeshError::NonPositiveArea { cell: c, area: area.to_f64_lossy() });
            }
            areas.push(area);
        }

        // canonical edge numbering: sorted vertex pairs in lexicographic order
        let mut incidence: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
        for (c, tri) in cells.iter().enumerate() {
            for i in 0..3 {
                incidence.entry(local_edge_key(tri, i)).or_default().push(c);
            }
        }
        let mut edges = Vec::with_capacity(incidence.len());
        let mut index = BTreeMap::new();
        for (key, adj) in &incidence {
            if adj.len() > 2 {
                return Err(MeshError::NonManifoldEdge { a: key[0], b: key[1] });
            }
            let (pa, pb) = (vertices[key[0]], vertices[key[1]]);
            let half = T::of(0.5);
            index.insert(*key, edges.len());
            edges.push(Edge {
                vertices: *key,
                cells: [Some(adj[0]), adj.get(1).copied()],
                midpoint: [(pa[0] + pb[0]) * half, (pa[1] + pb[1]) * half],
                length: norm(sub(pb, pa)),
                boundary: adj.len() == 1,
            });
        }

        let cell_edges = cells
            .iter()
            .map(|tri| {
                std::array::from_fn(|i| {
                    let a = vertices[tri[(i + 1) % 3]];
                    let b = vertices[tri[(i + 2) % 3]];
                    let d = sub(b, a);
                    let len = norm(d);
                    CellEdge { edge: index[&local_edge_key(tri, i)], normal: [d[1] / len, -d[0] / len] }
                })
            })
            .collect();

        Ok(Self { vertices, cells, edges, cell_edges, areas })
    }

    /// Uniform `n × n` triangulation of the unit square. Each square is split
    /// along its lower-left to upper-right diagonal.
    pub fn unit_square(n: usize) -> Result<Self, MeshError> {
        if n == 0 {
            return Err(MeshError::ZeroResolution);
        }
        let h = T::one() / T::of_usize(n);
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([T::of_usize(i) * h, T::of_usize(j) * h]);
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut cells = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                cells.push([v00, v10, v11]);
                cells.push([v00, v11, v01]);
            }
        }
        Self::new(vertices, cells)
    }

    /// Red refinement: every triangle is split into four similar children
    /// through its edge midpoints.
    pub fn refine_uniform(&self) -> Self {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(self.edges.iter().map(|e| e.midpoint));
        let mut cells = Vec::with_capacity(4 * self.cells.len());
        for (tri, ce) in self.cells.iter().zip(&self.cell_edges) {
            let [v0, v1, v2] = *tri;
            let [m0, m1, m2] = ce.map(|e| nv + e.edge);
            cells.push([v0, m2, m1]);
            cells.push([m2, v1, m0]);
            cells.push([m1, m0, v2]);
            cells.push([m0, m1, m2]);
        }
        Self::new(vertices, cells).expect("refinement of a valid mesh is valid")
    }

    pub fn vertices(&self) -> &[Vec2<T>] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn cell_edges(&self, cell: usize) -> &[CellEdge<T>; 3] {
        &self.cell_edges[cell]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn cell_area(&self, cell: usize) -> T {
        self.areas[cell]
    }

    pub fn cell_points(&self, cell: usize) -> [Vec2<T>; 3] {
        self.cells[cell].map(|v| self.vertices[v])
    }

    pub fn barycenter(&self, cell: usize) -> Vec2<T> {
        let [a, b, c] = self.cell_points(cell);
        let third = T::one() / T::of(3.0);
        [(a[0] + b[0] + c[0]) * third, (a[1] + b[1] + c[1]) * third]
    }

    pub fn cell_diameter(&self, cell: usize) -> T {
        self.cell_edges[cell].iter().map(|ce| self.edges[ce.edge].length).fold(T::zero(), T::max)
    }

    /// Mesh size `h`: the largest cell diameter.
    pub fn mesh_size(&self) -> T {
        (0..self.num_cells()).map(|c| self.cell_diameter(c)).fold(T::zero(), T::max)
    }

    pub fn total_area(&self) -> T {
        self.areas.iter().copied().sum()
    }

    /// `V - E + C`; equals 1 for a triangulation of a simply connected domain.
    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_cells() as i64
    }

    pub fn num_boundary_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.boundary).count()
    }

    /// Barycentric coordinates of `p` with respect to `cell`. Coordinate `i`
    /// belongs to local vertex `i`.
    pub fn barycentric(&self, cell: usize, p: Vec2<T>) -> [T; 3] {
        let [a, b, c] = self.cell_points(cell);
        let two_area = self.areas[cell] * T::of(2.0);
        let l0 = cross(sub(b, p), sub(c, p)) / two_area;
        let l1 = cross(sub(c, p), sub(a, p)) / two_area;
        [l0, l1, T::one() - l0 - l1]
    }

    /// Whether `p` lies in the closed cell, up to a relative tolerance.
    pub fn contains(&self, cell: usize, p: Vec2<T>) -> bool {
        let tol = T::of(1e3) * T::epsilon();
        self.barycentric(cell, p).iter().all(|&l| l >= -tol)
    }

    /// Checks the structural invariants; returns a description of the first
    /// violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (i, e) in self.edges.iter().enumerate() {
            let n_adj = e.cells.iter().flatten().count();
            if e.boundary != (n_adj == 1) {
                return Err(format!("edge {i}: boundary flag inconsistent with {n_adj} adjacent cells"));
            }
            let [a, b] = e.vertices.map(|v| self.vertices[v]);
            let tol = T::of(1e2) * T::epsilon();
            let mid = [(a[0] + b[0]) / T::of(2.0), (a[1] + b[1]) / T::of(2.0)];
            if (mid[0] - e.midpoint[0]).abs() > tol || (mid[1] - e.midpoint[1]).abs() > tol {
                return Err(format!("edge {i}: midpoint is not the mean of its endpoints"));
            }
            if let [Some(k), Some(l)] = e.cells {
                let nk = self.outward_normal(k, i);
                let nl = self.outward_normal(l, i);
                if (nk[0] + nl[0]).abs() > tol || (nk[1] + nl[1]).abs() > tol {
                    return Err(format!("edge {i}: normals of cells {k} and {l} are not opposite"));
                }
            }
        }
        if let Some(c) = self.areas.iter().position(|&a| !(a > T::zero())) {
            return Err(format!("cell {c} has non-positive area"));
        }
        Ok(())
    }

    fn outward_normal(&self, cell: usize, edge: usize) -> Vec2<T> {
        self.cell_edges[cell].iter().find(|ce| ce.edge == edge).expect("edge belongs to cell").normal
    }

    /// Writes the plain-text format: a `V C E` header line, then one `x y`
    /// line per vertex and one `i j k` line per cell.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<(), MeshError> {
        let mut s = String::new();
        writeln!(s, "{} {} {}", self.num_vertices(), self.num_cells(), self.num_edges()).unwrap();
        for v in &self.vertices {
            writeln!(s, "{} {}", v[0], v[1]).unwrap();
        }
        for c in &self.cells {
            writeln!(s, "{} {} {}", c[0], c[1], c[2]).unwrap();
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }

    /// Reads the format produced by [`Mesh::write_text`]. The edge count in
    /// the header must match the edges implied by the cells.
    pub fn read_text<R: BufRead>(input: R) -> Result<Self, MeshError> {
        let mut lines = input.lines().enumerate().filter_map(|(i, l)| match l {
            Ok(l) if l.trim().is_empty() => None,
            other => Some((i + 1, other)),
        });
        let parse_err = |line, msg: &str| MeshError::Parse { line, msg: msg.to_string() };

        let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
        let header = header?;
        let counts: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(ln, "header must be three integers `V C E`")))
            .collect::<Result<_, _>>()?;
        let [nv, nc, ne] = counts[..] else {
            return Err(parse_err(ln, "header must be three integers `V C E`"));
        };

        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = lines.next().ok_or_else(|| parse_err(0, "unexpected end of file in vertex block"))?;
            let xs: Vec<f64> = l?
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| parse_err(ln, "vertex line must be `x y`")))
                .collect::<Result<_, _>>()?;
            let [x, y] = xs[..] else { return Err(parse_err(ln, "vertex line must be `x y`")) };
            vertices.push([T::of(x), T::of(y)]);
        }
        let mut cells = Vec::with_capacity(nc);
        for _ in 0..nc {
            let (ln, l) = lines.next().ok_or_else(|| parse_err(0, "unexpected end of file in cell block"))?;
            let ids: Vec<usize> = l?
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| parse_err(ln, "cell line must be `i j k`")))
                .collect::<Result<_, _>>()?;
            let [i, j, k] = ids[..] else { return Err(parse_err(ln, "cell line must be `i j k`")) };
            cells.push([i, j, k]);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(parse_err(ln, "trailing data after cell block"));
        }
        let mesh = Self::new(vertices, cells)?;
        if mesh.num_edges() != ne {
            return Err(parse_err(1, &format!("header declares {ne} edges, cells define {}", mesh.num_edges())));
        }
        Ok(mesh)
    }
}

fn local_edge_key(tri: &[usize; 3], i: usize) -> [usize; 2] {
    let (a, b) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
    [a.min(b), a.max(b)]
}

/// Bucket grid for locating the cell containing a point.
#[derive(Debug, Clone)]
pub struct PointLocator {
    origin: [f64; 2],
    cell_size: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl PointLocator {
    pub fn new<T: Scalar>(mesh: &Mesh<T>) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in mesh.vertices() {
            for d in 0..2 {
                lo[d] = lo[d].min(v[d].to_f64_lossy());
                hi[d] = hi[d].max(v[d].to_f64_lossy());
            }
        }
        let side = (mesh.num_cells() as f64).sqrt().ceil().max(1.0) as usize;
        let dims = [side, side];
        let cell_size = [0, 1].map(|d| ((hi[d] - lo[d]) / side as f64).max(f64::MIN_POSITIVE));
        let mut buckets = vec![Vec::new(); side * side];
        let slot = |x: f64, d: usize| (((x - lo[d]) / cell_size[d]).floor().max(0.0) as usize).min(dims[d] - 1);
        for c in 0..mesh.num_cells() {
            let pts = mesh.cell_points(c);
            let (mut a, mut b) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for p in pts {
                for d in 0..2 {
                    a[d] = a[d].min(p[d].to_f64_lossy());
                    b[d] = b[d].max(p[d].to_f64_lossy());
                }
            }
            for j in slot(a[1], 1)..=slot(b[1], 1) {
                for i in slot(a[0], 0)..=slot(b[0], 0) {
                    buckets[j * dims[0] + i].push(c);
                }
            }
        }
        Self { origin: lo, cell_size, dims, buckets }
    }

    /// Returns the lowest-indexed cell containing `p`, if any.
    pub fn locate<T: Scalar>(&self, mesh: &Mesh<T>, p: Vec2<T>) -> Option<usize> {
        let idx = |d: usize| {
            let s = ((p[d].to_f64_lossy() - self.origin[d]) / self.cell_size[d]).floor();
            if s < -1.0 || s > self.dims[d] as f64 {
                None
            } else {
                Some((s.max(0.0) as usize).min(self.dims[d] - 1))
            }
        };
        let (i, j) = (idx(0)?, idx(1)?);
        self.buckets[j * self.dims[0] + i].iter().copied().find(|&c| mesh.contains(c, p))
    }
}
