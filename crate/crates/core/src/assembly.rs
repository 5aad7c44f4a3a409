//! Global matrices and load vectors of the semi-discrete GFEM Burgers system
//!
//! ```text
//! M ċ = −(A(c) + K) c + f_N
//! ```
//!
//! with the boundary penalty pair `(M_D, f_D)` and the Newton tangent `Ã(c)`.
//! All integrals run element by element with one Gauss rule, using shape
//! values cached at the quadrature points; the enrichments are time
//! independent so the cache is built once per discretization.

use crate::enrichment::{DofMap, ShapeEval};
use crate::error::{Error, Result};
use crate::linalg::SystemMatrix;
use crate::mesh::Mesh1D;
use crate::problem::BoundaryValue;
use crate::quadrature::QuadRule;
use crate::solver::{linear_solve, LinearSolveConfig};

/// Coefficient vector in global DOF numbering.
pub type CoeffVector = Vec<f64>;

#[derive(Debug, Clone)]
struct ElementCache {
    dofs: Vec<usize>,
    /// per quadrature point: (x, jacobian-weighted weight)
    points: Vec<(f64, f64)>,
    /// `[q * dofs.len() + k]`
    values: Vec<f64>,
    derivs: Vec<f64>,
}

/// Mesh, DOF map and quadrature rule with precomputed element data.
#[derive(Debug, Clone)]
pub struct Discretization {
    mesh: Mesh1D,
    dofs: DofMap,
    rule: QuadRule,
    elements: Vec<ElementCache>,
    pattern: SystemMatrix,
}

impl Discretization {
    pub fn new(mesh: Mesh1D, dofs: DofMap, rule: QuadRule) -> Self {
        let elements = (0..mesh.n_elements())
            .map(|e| {
                let ed = dofs.element_dofs(&mesh, e);
                let (a, b) = mesh.element_bounds(e);
                let points: Vec<(f64, f64)> = rule.mapped(a, b).collect();
                let mut values = Vec::with_capacity(points.len() * ed.len());
                let mut derivs = Vec::with_capacity(points.len() * ed.len());
                for &(x, _) in &points {
                    for &d in &ed {
                        let s = dofs.shape_on_element(&mesh, d, e, x);
                        values.push(s.value);
                        derivs.push(s.derivative);
                    }
                }
                ElementCache {
                    dofs: ed,
                    points,
                    values,
                    derivs,
                }
            })
            .collect();
        let node_of: Vec<usize> = dofs.entries().iter().map(|e| e.node).collect();
        let pattern = SystemMatrix::with_pattern(dofs.node_major_order(), |i, j| {
            node_of[i].abs_diff(node_of[j]) <= 1
        });
        Discretization {
            mesh,
            dofs,
            rule,
            elements,
            pattern,
        }
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn dof_map(&self) -> &DofMap {
        &self.dofs
    }

    pub fn rule(&self) -> &QuadRule {
        &self.rule
    }

    pub fn total_dofs(&self) -> usize {
        self.dofs.total_dofs()
    }

    /// An all-zero matrix with this discretization's sparsity layout.
    pub fn zero_matrix(&self) -> SystemMatrix {
        self.pattern.zeros_like()
    }

    fn check_len(&self, c: &[f64]) -> Result<()> {
        if c.len() != self.total_dofs() {
            return Err(Error::DimensionMismatch {
                expected: self.total_dofs(),
                got: c.len(),
            });
        }
        Ok(())
    }

    /// Generic bilinear assembly: `K_ij += w · f(q, k_i, k_j)` per quadrature point.
    fn assemble_with(&self, mut f: impl FnMut(&ElementCache, usize, usize, usize) -> f64) -> SystemMatrix {
        let mut m = self.zero_matrix();
        for el in &self.elements {
            let nd = el.dofs.len();
            for (q, &(_, w)) in el.points.iter().enumerate() {
                for a in 0..nd {
                    for b in 0..nd {
                        let v = f(el, q * nd, a, b);
                        if v != 0.0 {
                            m.add(el.dofs[a], el.dofs[b], w * v);
                        }
                    }
                }
            }
        }
        m
    }

    /// `u_h` and `u_h'` at quadrature point `q` of element `el`.
    fn field_at(el: &ElementCache, base: usize, c: &[f64]) -> (f64, f64) {
        let mut u = 0.0;
        let mut du = 0.0;
        for (k, &d) in el.dofs.iter().enumerate() {
            u += el.values[base + k] * c[d];
            du += el.derivs[base + k] * c[d];
        }
        (u, du)
    }

    /// `M = ∫ φ φᵀ`.
    pub fn assemble_mass(&self) -> SystemMatrix {
        self.assemble_with(|el, base, a, b| el.values[base + a] * el.values[base + b])
    }

    /// `K = ν ∫ φ' φ'ᵀ`; the zero matrix when `ν = 0`.
    pub fn assemble_stiffness(&self, nu: f64) -> Result<SystemMatrix> {
        if !(nu >= 0.0) {
            return Err(Error::InvalidParameter(format!("viscosity must be >= 0, got {nu}")));
        }
        if nu == 0.0 {
            return Ok(self.zero_matrix());
        }
        Ok(self.assemble_with(|el, base, a, b| nu * el.derivs[base + a] * el.derivs[base + b]))
    }

    /// `A(c)_ij = ∫ φ_i u_h φ_j'`.
    pub fn assemble_advection(&self, c: &[f64]) -> Result<SystemMatrix> {
        self.assemble_advection_pair(c).map(|(a, _)| a)
    }

    /// `Ã(c)_ij = ∫ φ_i φ_j u_h'`.
    pub fn assemble_advection_tangent(&self, c: &[f64]) -> Result<SystemMatrix> {
        self.assemble_advection_pair(c).map(|(_, t)| t)
    }

    /// `A(c)` and `Ã(c)` in one pass over the quadrature points.
    pub fn assemble_advection_pair(&self, c: &[f64]) -> Result<(SystemMatrix, SystemMatrix)> {
        self.check_len(c)?;
        let mut adv = self.zero_matrix();
        let mut tan = self.zero_matrix();
        for el in &self.elements {
            let nd = el.dofs.len();
            for (q, &(_, w)) in el.points.iter().enumerate() {
                let base = q * nd;
                let (u, du) = Self::field_at(el, base, c);
                for a in 0..nd {
                    let pa = el.values[base + a] * w;
                    if pa == 0.0 {
                        continue;
                    }
                    for b in 0..nd {
                        adv.add(el.dofs[a], el.dofs[b], pa * u * el.derivs[base + b]);
                        tan.add(el.dofs[a], el.dofs[b], pa * el.values[base + b] * du);
                    }
                }
            }
        }
        Ok((adv, tan))
    }

    /// `A(c) c` without forming the matrix.
    pub fn advection_action(&self, c: &[f64]) -> Result<Vec<f64>> {
        self.check_len(c)?;
        let mut out = vec![0.0; self.total_dofs()];
        for el in &self.elements {
            let nd = el.dofs.len();
            for (q, &(_, w)) in el.points.iter().enumerate() {
                let base = q * nd;
                let (u, du) = Self::field_at(el, base, c);
                for a in 0..nd {
                    out[el.dofs[a]] += w * el.values[base + a] * u * du;
                }
            }
        }
        Ok(out)
    }

    /// Boundary penalty pair: `M_D = β Σ_b φ(x_b) φ(x_b)ᵀ`, `f_D = β Σ_b φ(x_b) g_b`.
    pub fn assemble_boundary_penalty(
        &self,
        dirichlet: &[BoundaryValue],
        beta: f64,
    ) -> Result<(SystemMatrix, CoeffVector)> {
        if !(beta > 0.0) {
            return Err(Error::InvalidParameter(format!("penalty parameter must be positive, got {beta}")));
        }
        let mut m = self.zero_matrix();
        let mut f = vec![0.0; self.total_dofs()];
        for bc in dirichlet {
            let support = self.point_shapes(bc.x)?;
            for &(i, si) in &support {
                f[i] += beta * si.value * bc.value;
                for &(j, sj) in &support {
                    m.add(i, j, beta * si.value * sj.value);
                }
            }
        }
        Ok((m, f))
    }

    /// `f_N = ν Σ_b n_b g_N(x_b) φ(x_b)` with outward normal `n_b`.
    pub fn assemble_neumann(
        &self,
        neumann: &[BoundaryValue],
        dirichlet: &[BoundaryValue],
        nu: f64,
    ) -> Result<CoeffVector> {
        let tol = 1e-12 * self.mesh.length();
        for n in neumann {
            if dirichlet.iter().any(|d| (d.x - n.x).abs() <= tol) {
                return Err(Error::BoundaryConflict(format!(
                    "x = {} is both Dirichlet and Neumann",
                    n.x
                )));
            }
        }
        let mut f = vec![0.0; self.total_dofs()];
        for n in neumann {
            let normal = if (n.x - self.mesh.lo()).abs() <= tol { -1.0 } else { 1.0 };
            for (i, s) in self.point_shapes(n.x)? {
                f[i] += nu * normal * n.value * s.value;
            }
        }
        Ok(f)
    }

    /// `∫ φ f`.
    pub fn load_vector(&self, f: impl Fn(f64) -> f64) -> CoeffVector {
        let mut out = vec![0.0; self.total_dofs()];
        for el in &self.elements {
            let nd = el.dofs.len();
            for (q, &(x, w)) in el.points.iter().enumerate() {
                let fx = f(x);
                for a in 0..nd {
                    out[el.dofs[a]] += w * fx * el.values[q * nd + a];
                }
            }
        }
        out
    }

    /// Nonzero shape functions at a single point.
    pub fn point_shapes(&self, x: f64) -> Result<Vec<(usize, ShapeEval)>> {
        let e = self.mesh.locate(x)?;
        Ok(self
            .dofs
            .element_dofs(&self.mesh, e)
            .into_iter()
            .map(|d| (d, self.dofs.shape_on_element(&self.mesh, d, e, x)))
            .filter(|(_, s)| s.value != 0.0 || s.derivative != 0.0)
            .collect())
    }

    /// `u_h(x)` and `u_h'(x)` for coefficients `c`.
    pub fn evaluate(&self, c: &[f64], x: f64) -> Result<(f64, f64)> {
        self.check_len(c)?;
        let mut u = 0.0;
        let mut du = 0.0;
        for (d, s) in self.point_shapes(x)? {
            u += s.value * c[d];
            du += s.derivative * c[d];
        }
        Ok((u, du))
    }

    /// Element-wise quadrature of `g(x, u_h, u_h')` with this discretization's rule.
    pub fn integrate_field(&self, c: &[f64], g: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for el in &self.elements {
            let nd = el.dofs.len();
            for (q, &(x, w)) in el.points.iter().enumerate() {
                let (u, du) = Self::field_at(el, q * nd, c);
                total += w * g(x, u, du);
            }
        }
        total
    }
}

/// L2 projection of `u_ic`: `(M + M_D) c⁰ = ∫ φ u_ic + f_D`.
///
/// Without a penalty the plain mass system is solved.
pub fn project_initial_condition(
    disc: &Discretization,
    u_ic: impl Fn(f64) -> f64,
    penalty: Option<(&[BoundaryValue], f64)>,
    linear: &LinearSolveConfig,
) -> Result<CoeffVector> {
    let mut m = disc.assemble_mass();
    let mut rhs = disc.load_vector(u_ic);
    if let Some((dirichlet, beta)) = penalty {
        let (md, fd) = disc.assemble_boundary_penalty(dirichlet, beta)?;
        m.add_scaled(1.0, &md);
        for (r, f) in rhs.iter_mut().zip(&fd) {
            *r += f;
        }
    }
    linear_solve(&m, &rhs, linear)
}
