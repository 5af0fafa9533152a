//! P1 Lagrange finite elements.
//!
//! Element matrices are computed in closed form, so assembly introduces no
//! quadrature error. Dirichlet conditions are imposed by restricting every
//! linear system to the interior vertices; boundary values are exactly zero.

use alloc::vec;
use alloc::vec::Vec;

use crate::mesh::{det3, Mesh};
use crate::math::sqrt;
use crate::sparse::{cg_solve_in_place, CgOptions, SolveReport, SparseMatrix};
use crate::{Error, Result};

/// Nodal coefficient vector of a continuous piecewise-linear function.
#[derive(Debug, Clone, PartialEq)]
pub struct FeFunction {
    values: Vec<f64>,
}

impl FeFunction {
    pub fn zeros(num_vertices: usize) -> Self {
        FeFunction { values: vec![0.0; num_vertices] }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        FeFunction { values }
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

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest absolute nodal value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Index and magnitude of the largest absolute nodal value.
    pub fn argmax_abs(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .map(|v| v.abs())
            .enumerate()
            .fold(None, |best, (i, a)| match best {
                Some((_, b)) if b >= a => best,
                _ => Some((i, a)),
            })
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `self - other`, nodewise.
    pub fn sub(&self, other: &FeFunction) -> Result<FeFunction> {
        if self.len() != other.len() {
            return Err(Error::param("FeFunction length mismatch"));
        }
        Ok(FeFunction { values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() })
    }
}

/// Local mass and stiffness matrices of one simplex, row-major `(d+1)×(d+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementMatrices {
    pub volume: f64,
    pub mass: Vec<f64>,
    pub stiffness: Vec<f64>,
}

/// Gradients of the barycentric coordinates and the signed volume of a simplex
/// of dimension 1, 2 or 3.
fn barycentric_gradients(points: &[&[f64]]) -> ([[f64; 3]; 4], f64) {
    let d = points.len() - 1;
    let x0 = points[0];
    let mut g = [[0.0; 3]; 4];
    let volume = match d {
        1 => {
            let len = points[1][0] - x0[0];
            g[1][0] = 1.0 / len;
            len
        }
        2 => {
            let (a, c) = (points[1][0] - x0[0], points[1][1] - x0[1]);
            let (b, dd) = (points[2][0] - x0[0], points[2][1] - x0[1]);
            let det = a * dd - b * c;
            g[1] = [dd / det, -b / det, 0.0];
            g[2] = [-c / det, a / det, 0.0];
            det / 2.0
        }
        3 => {
            let e = |k: usize| [points[k][0] - x0[0], points[k][1] - x0[1], points[k][2] - x0[2]];
            let (e1, e2, e3) = (e(1), e(2), e(3));
            let det = det3(e1, e2, e3);
            let cross = |u: [f64; 3], v: [f64; 3]| {
                [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
            };
            let scale = |v: [f64; 3]| [v[0] / det, v[1] / det, v[2] / det];
            g[1] = scale(cross(e2, e3));
            g[2] = scale(cross(e3, e1));
            g[3] = scale(cross(e1, e2));
            det / 6.0
        }
        _ => panic!("simplices of dimension {d} are not supported"),
    };
    for k in 0..3 {
        g[0][k] = -(1..=d).map(|i| g[i][k]).sum::<f64>();
    }
    (g, volume)
}

/// Exact P1 element matrices for a simplex given by its `d+1` vertices (`d` ∈ {1,2,3}).
pub fn element_matrices(points: &[&[f64]]) -> Result<ElementMatrices> {
    let d = points.len().checked_sub(1).filter(|d| (1..=3).contains(d)).ok_or_else(|| Error::param("element must have 2, 3 or 4 vertices"))?;
    let (g, volume) = barycentric_gradients(points);
    if !(volume > 0.0) {
        return Err(Error::DegenerateCell { cell: 0, volume });
    }
    let k = d + 1;
    let mut mass = vec![0.0; k * k];
    let mut stiffness = vec![0.0; k * k];
    let m_off = volume / ((d + 1) * (d + 2)) as f64;
    for i in 0..k {
        for j in 0..k {
            mass[i * k + j] = if i == j { 2.0 * m_off } else { m_off };
            stiffness[i * k + j] = volume * (0..d).map(|c| g[i][c] * g[j][c]).sum::<f64>();
        }
    }
    Ok(ElementMatrices { volume, mass, stiffness })
}

/// Assembled operators on one mesh.
///
/// `mass` and `stiffness` act on all vertices; the `*_interior` matrices are
/// their principal submatrices on the interior vertices, which carry the
/// unknowns of every Dirichlet problem.
#[derive(Debug, Clone)]
pub struct FemOperators {
    mesh: Option<Mesh>,
    mass: SparseMatrix,
    stiffness: SparseMatrix,
    mass_interior: SparseMatrix,
    stiffness_interior: SparseMatrix,
    /// Row sums of the mass matrix, i.e. `∫ ψᵢ`.
    lumped_mass: Vec<f64>,
    interior: Vec<usize>,
    reduced: Vec<usize>,
    solver: CgOptions,
}

const NOT_INTERIOR: usize = usize::MAX;

impl FemOperators {
    /// Assemble the consistent mass and stiffness matrices of `mesh`.
    pub fn assemble(mesh: Mesh) -> Result<Self> {
        let nv = mesh.num_vertices();
        let mut pattern = vec![Vec::new(); nv];
        for cell in mesh.cells() {
            for &a in cell {
                pattern[a].extend_from_slice(cell);
            }
        }
        let mut mass = SparseMatrix::from_pattern(nv, pattern);
        let mut stiffness = mass.clone();
        let mut points: Vec<&[f64]> = Vec::with_capacity(4);
        for (c, cell) in mesh.cells().enumerate() {
            points.clear();
            points.extend(cell.iter().map(|&v| mesh.vertex(v)));
            let el = element_matrices(&points).map_err(|e| match e {
                Error::DegenerateCell { volume, .. } => Error::DegenerateCell { cell: c, volume },
                other => other,
            })?;
            let k = cell.len();
            for (i, &a) in cell.iter().enumerate() {
                for (j, &b) in cell.iter().enumerate() {
                    mass.add_to(a, b, el.mass[i * k + j]);
                    stiffness.add_to(a, b, el.stiffness[i * k + j]);
                }
            }
        }
        let boundary = mesh.boundary_mask().to_vec();
        let mut ops = Self::from_parts(mass, stiffness, &boundary)?;
        ops.mesh = Some(mesh);
        Ok(ops)
    }

    /// Operators from already assembled full matrices and a boundary mask.
    ///
    /// Such operators have no mesh attached.
    pub fn from_parts(mass: SparseMatrix, stiffness: SparseMatrix, boundary: &[bool]) -> Result<Self> {
        let n = boundary.len();
        if mass.nrows() != n || mass.ncols() != n || stiffness.nrows() != n || stiffness.ncols() != n {
            return Err(Error::param("mass, stiffness and boundary mask sizes differ"));
        }
        let interior: Vec<usize> = (0..n).filter(|&i| !boundary[i]).collect();
        let mut reduced = vec![NOT_INTERIOR; n];
        for (r, &v) in interior.iter().enumerate() {
            reduced[v] = r;
        }
        let lumped_mass = (0..n).map(|r| mass.row(r).map(|(_, v)| v).sum()).collect();
        Ok(FemOperators {
            mesh: None,
            mass_interior: mass.principal_submatrix(&interior),
            stiffness_interior: stiffness.principal_submatrix(&interior),
            mass,
            stiffness,
            lumped_mass,
            interior,
            reduced,
            solver: CgOptions::default(),
        })
    }

    /// Replace the linear solver settings used by every solve on these operators.
    pub fn with_solver(mut self, solver: CgOptions) -> Self {
        self.solver = solver;
        self
    }

    pub fn solver(&self) -> &CgOptions {
        &self.solver
    }

    pub fn mesh(&self) -> Option<&Mesh> {
        self.mesh.as_ref()
    }

    pub fn mass(&self) -> &SparseMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &SparseMatrix {
        &self.stiffness
    }

    pub fn mass_interior(&self) -> &SparseMatrix {
        &self.mass_interior
    }

    pub fn stiffness_interior(&self) -> &SparseMatrix {
        &self.stiffness_interior
    }

    pub fn lumped_mass(&self) -> &[f64] {
        &self.lumped_mass
    }

    pub fn num_vertices(&self) -> usize {
        self.reduced.len()
    }

    /// Interior vertex for each reduced unknown.
    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior
    }

    /// Reduced index of vertex `v`, `None` on the boundary.
    pub fn reduced_index(&self, v: usize) -> Option<usize> {
        Some(self.reduced[v]).filter(|&r| r != NOT_INTERIOR)
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.reduced[v] == NOT_INTERIOR
    }

    pub fn dim(&self) -> usize {
        self.mesh.as_ref().map_or(0, Mesh::dim)
    }

    fn check(&self, u: &FeFunction) -> Result<()> {
        if u.len() != self.num_vertices() {
            return Err(Error::param("function does not belong to this mesh"));
        }
        Ok(())
    }

    /// Interior nodal values of `u`.
    pub fn restrict(&self, u: &FeFunction) -> Result<Vec<f64>> {
        self.check(u)?;
        Ok(self.interior.iter().map(|&v| u.values[v]).collect())
    }

    /// Function with the given interior values and zero boundary values.
    pub fn extend(&self, interior: &[f64]) -> FeFunction {
        debug_assert_eq!(interior.len(), self.interior.len());
        let mut values = vec![0.0; self.num_vertices()];
        for (&v, &x) in self.interior.iter().zip(interior) {
            values[v] = x;
        }
        FeFunction { values }
    }

    /// Exact L² norm `sqrt(uᵀMu)` of a piecewise-linear function.
    pub fn l2_norm(&self, u: &FeFunction) -> Result<f64> {
        self.check(u)?;
        Ok(sqrt(self.mass.bilinear(&u.values, &u.values)?.max(0.0)))
    }

    /// `‖u - v‖_{L²}`.
    pub fn l2_distance(&self, u: &FeFunction, v: &FeFunction) -> Result<f64> {
        self.l2_norm(&u.sub(v)?)
    }

    /// L² norm of an interior-only coefficient vector.
    pub(crate) fn l2_norm_interior(&self, x: &[f64]) -> f64 {
        let mx = self.mass_interior.spmv(x).expect("interior vector length");
        sqrt(crate::sparse::dot(x, &mx).max(0.0))
    }

    /// Interior system matrix `a·M + b·K + c·W(w)`, where `W(w)` is the
    /// vertex-quadrature weighted mass `diag(wᵢ ∫ψᵢ)`. `weights` are full
    /// nodal values.
    ///
    /// Vertex quadrature makes the cell contributions of `W` diagonal, so
    /// summing them over cells gives `wᵢ` times the lumped mass.
    pub fn assemble_system(&self, a: f64, b: f64, c: f64, weights: Option<&[f64]>) -> Result<SparseMatrix> {
        let mut sys = self.mass_interior.lin_comb(a, &self.stiffness_interior, b)?;
        if let Some(w) = weights {
            if w.len() != self.num_vertices() {
                return Err(Error::param("weight vector does not belong to this mesh"));
            }
            for (r, &v) in self.interior.iter().enumerate() {
                sys.add_to(r, r, c * w[v] * self.lumped_mass[v]);
            }
        }
        Ok(sys)
    }

    /// The backward-Euler heat operator `M + τK` for step size `tau`.
    pub fn diffusion_operator(&self, tau: f64) -> Result<DiffusionOperator> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::param("time step must be positive and finite"));
        }
        Ok(DiffusionOperator { matrix: self.mass_interior.lin_comb(1.0, &self.stiffness_interior, tau)?, tau })
    }
}

/// Nodal interpolant of `f`, with boundary values forced to zero.
pub fn interpolate(mesh: &Mesh, f: impl Fn(&[f64]) -> f64) -> Result<FeFunction> {
    let mut u = interpolate_unconstrained(mesh, f)?;
    for (v, b) in u.values.iter_mut().zip(mesh.boundary_mask()) {
        if *b {
            *v = 0.0;
        }
    }
    Ok(u)
}

/// Nodal interpolant of `f` without Dirichlet forcing.
pub fn interpolate_unconstrained(mesh: &Mesh, f: impl Fn(&[f64]) -> f64) -> Result<FeFunction> {
    let mut values = Vec::with_capacity(mesh.num_vertices());
    for (i, x) in mesh.vertices().enumerate() {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite { index: i });
        }
        values.push(v);
    }
    Ok(FeFunction { values })
}

/// The system matrix `M + τK` of one implicit diffusion substep, built once
/// per step size and reused for every step.
#[derive(Debug, Clone)]
pub struct DiffusionOperator {
    matrix: SparseMatrix,
    tau: f64,
}

impl DiffusionOperator {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// Solve `(M + τK) x = rhs` on the interior unknowns, starting from `guess`.
    pub fn solve(&self, ops: &FemOperators, rhs: &[f64], guess: &mut [f64]) -> Result<SolveReport> {
        solve_checked(&self.matrix, rhs, guess, ops.solver(), "diffusion step")
    }

    /// Find `uⁿ ∈ V_h⁰` with `((uⁿ - u_half)/τ, v) + (∇uⁿ, ∇v) = 0` for all `v ∈ V_h⁰`.
    pub fn step(&self, ops: &FemOperators, u_half: &FeFunction) -> Result<(FeFunction, SolveReport)> {
        let (u, report, _) = self.step_measured(ops, u_half)?;
        Ok((u, report))
    }

    /// [`DiffusionOperator::step`] that also returns the L² norms of the
    /// interior part of `u_half` and of `uⁿ`.
    pub fn step_measured(&self, ops: &FemOperators, u_half: &FeFunction) -> Result<(FeFunction, SolveReport, [f64; 2])> {
        let mut x = ops.restrict(u_half)?;
        let rhs = ops.mass_interior.spmv(&x)?;
        let before = sqrt(crate::sparse::dot(&x, &rhs).max(0.0));
        let report = self.solve(ops, &rhs, &mut x)?;
        let after = ops.l2_norm_interior(&x);
        Ok((ops.extend(&x), report, [before, after]))
    }
}

pub(crate) fn solve_checked(
    matrix: &SparseMatrix,
    rhs: &[f64],
    guess: &mut [f64],
    opts: &CgOptions,
    context: &'static str,
) -> Result<SolveReport> {
    let report = cg_solve_in_place(matrix, rhs, guess, opts)?;
    if !report.converged {
        return Err(Error::Solver { context, report });
    }
    Ok(report)
}

/// One implicit diffusion substep `(M + τK) uⁿ = M u_half` on the interior.
pub fn diffusion_step(ops: &FemOperators, u_half: &FeFunction, tau: f64) -> Result<FeFunction> {
    Ok(ops.diffusion_operator(tau)?.step(ops, u_half)?.0)
}
