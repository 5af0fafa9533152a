//! Structured simplicial meshes.
//!
//! All three domains are built from a uniform grid of spacing `h = 2^{-j}`.
//! Grid squares are split along the lower-left to upper-right diagonal and
//! grid cubes into six tetrahedra by the Kuhn (Freudenthal) rule, so every
//! mesh is conforming and its vertex coordinates are exact dyadic rationals.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Computational domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    /// `(0,1)²`
    UnitSquare,
    /// `(-1,1)² \ [-1,0]²`, re-entrant corner at the origin.
    LShape,
    /// `(0,1)³`
    UnitCube,
}

impl Domain {
    /// Spatial dimension.
    pub fn dim(self) -> usize {
        match self {
            Domain::UnitSquare | Domain::LShape => 2,
            Domain::UnitCube => 3,
        }
    }

    /// Lebesgue measure of the domain.
    pub fn measure(self) -> f64 {
        match self {
            Domain::UnitSquare | Domain::UnitCube => 1.0,
            Domain::LShape => 3.0,
        }
    }

    /// Largest accepted refinement level.
    pub fn max_level(self) -> u32 {
        match self {
            Domain::UnitSquare => 12,
            Domain::LShape => 10,
            Domain::UnitCube => 7,
        }
    }

    /// Short identifier used on the command line and in CSV output.
    pub fn id(self) -> &'static str {
        match self {
            Domain::UnitSquare => "square",
            Domain::LShape => "lshape",
            Domain::UnitCube => "cube",
        }
    }

    /// Inverse of [`Domain::id`].
    pub fn from_id(id: &str) -> Option<Self> {
        match id {
            "square" => Some(Domain::UnitSquare),
            "lshape" => Some(Domain::LShape),
            "cube" => Some(Domain::UnitCube),
            _ => None,
        }
    }

    /// Whether `x` lies on the boundary of the closed domain.
    ///
    /// Exact comparisons; intended for the dyadic grid coordinates produced
    /// by the builders.
    pub fn on_boundary(self, x: &[f64]) -> bool {
        match self {
            Domain::UnitSquare | Domain::UnitCube => x.iter().any(|&c| c == 0.0 || c == 1.0),
            Domain::LShape => {
                let (px, py) = (x[0], x[1]);
                px == -1.0
                    || px == 1.0
                    || py == -1.0
                    || py == 1.0
                    || (px == 0.0 && py <= 0.0)
                    || (py == 0.0 && px <= 0.0)
            }
        }
    }

    /// Build the level-`j` mesh of this domain.
    pub fn build(self, level: u32) -> Result<Mesh> {
        match self {
            Domain::UnitSquare => Mesh::unit_square(level),
            Domain::LShape => Mesh::lshape(level),
            Domain::UnitCube => Mesh::unit_cube(level),
        }
    }
}

/// A conforming simplicial mesh with boundary-vertex flags.
///
/// Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    domain: Domain,
    level: u32,
    /// Flat coordinates, `dim` entries per vertex.
    coords: Vec<f64>,
    /// Flat connectivity, `dim + 1` vertex indices per cell.
    cells: Vec<usize>,
    boundary: Vec<bool>,
}

impl Mesh {
    /// Unit square with `(2^j+1)²` vertices and `2·4^j` triangles.
    pub fn unit_square(level: u32) -> Result<Self> {
        check_level(Domain::UnitSquare, level)?;
        let n = 1usize << level;
        let h = 1.0 / n as f64;
        let stride = n + 1;
        let mut coords = Vec::with_capacity(2 * stride * stride);
        for j in 0..=n {
            for i in 0..=n {
                coords.push(i as f64 * h);
                coords.push(j as f64 * h);
            }
        }
        let mut cells = Vec::with_capacity(6 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v00 = j * stride + i;
                push_square(&mut cells, v00, v00 + 1, v00 + stride, v00 + stride + 1);
            }
        }
        Ok(Self::finish(Domain::UnitSquare, level, coords, cells))
    }

    /// L-shaped domain: the grid of spacing `2^{-j}` over `(-1,1)²` with the
    /// squares inside `[-1,0]²` removed.
    pub fn lshape(level: u32) -> Result<Self> {
        check_level(Domain::LShape, level)?;
        let n = 2usize << level;
        let h = 2.0 / n as f64;
        let half = n / 2;
        let stride = n + 1;
        // Squares with lower-left corner (i, j) and i < half, j < half are removed.
        let kept = |i: usize, j: usize| !(i < half && j < half);

        let mut index = alloc::vec![usize::MAX; stride * stride];
        let mut coords = Vec::new();
        for j in 0..=n {
            for i in 0..=n {
                // A grid point is used iff one of its (up to four) adjacent squares is kept.
                let used = [(0isize, 0isize), (-1, 0), (0, -1), (-1, -1)].iter().any(|&(di, dj)| {
                    let (ci, cj) = (i as isize + di, j as isize + dj);
                    ci >= 0
                        && cj >= 0
                        && (ci as usize) < n
                        && (cj as usize) < n
                        && kept(ci as usize, cj as usize)
                });
                if used {
                    index[j * stride + i] = coords.len() / 2;
                    coords.push(-1.0 + i as f64 * h);
                    coords.push(-1.0 + j as f64 * h);
                }
            }
        }
        let mut cells = Vec::new();
        for j in 0..n {
            for i in 0..n {
                if !kept(i, j) {
                    continue;
                }
                let g = |di: usize, dj: usize| index[(j + dj) * stride + i + di];
                push_square(&mut cells, g(0, 0), g(1, 0), g(0, 1), g(1, 1));
            }
        }
        Ok(Self::finish(Domain::LShape, level, coords, cells))
    }

    /// Unit cube, each grid cube split into six Kuhn tetrahedra.
    pub fn unit_cube(level: u32) -> Result<Self> {
        check_level(Domain::UnitCube, level)?;
        let n = 1usize << level;
        let h = 1.0 / n as f64;
        let s = n + 1;
        let mut coords = Vec::with_capacity(3 * s * s * s);
        for k in 0..=n {
            for j in 0..=n {
                for i in 0..=n {
                    coords.push(i as f64 * h);
                    coords.push(j as f64 * h);
                    coords.push(k as f64 * h);
                }
            }
        }
        let offsets = [1, s, s * s];
        const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut cells = Vec::with_capacity(24 * n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let base = (k * s + j) * s + i;
                    for perm in PERMS {
                        let v1 = base + offsets[perm[0]];
                        let v2 = v1 + offsets[perm[1]];
                        let v3 = v2 + offsets[perm[2]];
                        cells.extend_from_slice(&[base, v1, v2, v3]);
                    }
                }
            }
        }
        let mut mesh = Self::finish(Domain::UnitCube, level, coords, cells);
        // Odd permutations produce negatively oriented tetrahedra.
        for c in 0..mesh.num_cells() {
            if mesh.signed_volume(c) < 0.0 {
                mesh.cells.swap(4 * c + 2, 4 * c + 3);
            }
        }
        Ok(mesh)
    }

    fn finish(domain: Domain, level: u32, coords: Vec<f64>, cells: Vec<usize>) -> Self {
        let dim = domain.dim();
        let boundary = coords.chunks_exact(dim).map(|x| domain.on_boundary(x)).collect();
        Mesh { domain, level, coords, cells, boundary }
    }

    /// The domain this mesh discretizes.
    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Refinement level `j`.
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Spatial dimension.
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Nominal mesh size `h = 2^{-j}`.
    pub fn h(&self) -> f64 {
        1.0 / (1u64 << self.level) as f64
    }

    pub fn num_vertices(&self) -> usize {
        self.boundary.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len() / (self.dim() + 1)
    }

    /// Coordinates of vertex `i`.
    pub fn vertex(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[d * i..d * (i + 1)]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim())
    }

    /// Vertex indices of cell `c`.
    pub fn cell(&self, c: usize) -> &[usize] {
        let k = self.dim() + 1;
        &self.cells[k * c..k * (c + 1)]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.cells.chunks_exact(self.dim() + 1)
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary[i]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn num_boundary_vertices(&self) -> usize {
        self.boundary.iter().filter(|&&b| b).count()
    }

    /// Signed volume of cell `c` (positive for the orientation used here).
    pub fn signed_volume(&self, c: usize) -> f64 {
        let cell = self.cell(c);
        let x0 = self.vertex(cell[0]);
        match self.dim() {
            2 => {
                let (a, b) = (self.vertex(cell[1]), self.vertex(cell[2]));
                0.5 * ((a[0] - x0[0]) * (b[1] - x0[1]) - (a[1] - x0[1]) * (b[0] - x0[0]))
            }
            _ => {
                let e = |k: usize| {
                    let v = self.vertex(cell[k]);
                    [v[0] - x0[0], v[1] - x0[1], v[2] - x0[2]]
                };
                det3(e(1), e(2), e(3)) / 6.0
            }
        }
    }

    /// Check every structural invariant of the mesh.
    ///
    /// Verifies index ranges, positive orientation, boundary flags against
    /// the domain's coordinate test, total measure, and conformity (no face
    /// is shared by more than two cells and every unshared face lies on the
    /// boundary).
    pub fn validate(&self) -> Result<()> {
        let nv = self.num_vertices();
        let d = self.dim();
        let mut total = 0.0;
        for (c, cell) in self.cells().enumerate() {
            for (a, &va) in cell.iter().enumerate() {
                if va >= nv {
                    return Err(Error::param(format!("cell {c}: vertex {va} out of range")));
                }
                if cell[..a].contains(&va) {
                    return Err(Error::param(format!("cell {c}: repeated vertex {va}")));
                }
            }
            let vol = self.signed_volume(c);
            if vol <= 0.0 {
                return Err(Error::DegenerateCell { cell: c, volume: vol });
            }
            total += vol;
        }
        for (i, x) in self.vertices().enumerate() {
            if self.boundary[i] != self.domain.on_boundary(x) {
                return Err(Error::param(format!("vertex {i}: boundary flag mismatch")));
            }
        }
        let measure = self.domain.measure();
        if ((total - measure) / measure).abs() > 1e-12 {
            return Err(Error::param(format!("cell volumes sum to {total}, expected {measure}")));
        }

        let mut faces: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for cell in self.cells() {
            for skip in 0..=d {
                let mut face: Vec<usize> =
                    cell.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v).collect();
                face.sort_unstable();
                *faces.entry(face).or_insert(0) += 1;
            }
        }
        for (face, count) in &faces {
            if *count > 2 {
                return Err(Error::param(format!("face {face:?} shared by {count} cells")));
            }
            if *count == 1 && !face.iter().all(|&v| self.boundary[v]) {
                return Err(Error::param(format!("hanging interior face {face:?}")));
            }
        }
        Ok(())
    }
}

fn check_level(domain: Domain, level: u32) -> Result<()> {
    if level == 0 || level > domain.max_level() {
        return Err(Error::param(format!(
            "{} mesh level must be in 1..={}, got {level}",
            domain.id(),
            domain.max_level()
        )));
    }
    Ok(())
}

/// Two counter-clockwise triangles sharing the lower-left to upper-right diagonal.
fn push_square(cells: &mut Vec<usize>, v00: usize, v10: usize, v01: usize, v11: usize) {
    cells.extend_from_slice(&[v00, v10, v11, v00, v11, v01]);
}

pub(crate) fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}
