//! Cubic Hermite discretisation of the clamped-free beam on [0, 1].
//!
//! Free degrees of freedom are ordered node by node, `[y(x₁), y_x(x₁), …,
//! y(x_N), y_x(x_N)]`; the clamped node x₀ = 0 carries no unknowns. The
//! moment feedback at x = 1 enters the weak form as a natural boundary term,
//! so the semi-discrete beam reads
//!
//! ```text
//! M·a + EI·K_b·y − ρ·ω²·M0·y + EI·f(bᵀv)·b = 0,    b = tip-slope trace
//! ```

mod banded;
pub mod shapes;

pub use banded::{BandedLdlt, SymBanded};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{validate_params, PhysicalParams};

/// Half-bandwidth of the assembled Hermite matrices.
pub const HALF_BANDWIDTH: usize = 3;

/// Uniform mesh of [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    n_elements: usize,
}

impl Grid {
    pub fn new(n_elements: usize) -> Result<Self> {
        if n_elements < 4 {
            return Err(Error::Config(format!("n_elements must be >= 4, got {n_elements}")));
        }
        Ok(Grid { n_elements })
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_elements as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.n_elements as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_elements).map(|i| self.node(i)).collect()
    }

    pub fn dof_count(&self) -> usize {
        2 * self.n_elements
    }

    /// (node, derivative order) of each free dof.
    pub fn dof_map(&self) -> Vec<(usize, u8)> {
        (1..=self.n_elements).flat_map(|i| [(i, 0), (i, 1)]).collect()
    }

    /// Free-dof index of (node, order), `None` for the clamped node.
    fn dof(&self, node: usize, order: usize) -> Option<usize> {
        (node > 0).then(|| 2 * (node - 1) + order)
    }

    /// Element containing `x` and the local coordinate ξ ∈ [0, 1].
    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.n_elements;
        let e = ((x * n as f64).floor() as usize).min(n - 1);
        (e, x * n as f64 - e as f64)
    }
}

/// Linear functional picking one free dof.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryTrace {
    pub index: usize,
}

impl BoundaryTrace {
    pub fn apply(&self, x: &DVector<f64>) -> f64 {
        x[self.index]
    }

    pub fn vector(&self, n: usize) -> DVector<f64> {
        let mut b = DVector::zeros(n);
        b[self.index] = 1.0;
        b
    }
}

/// Element bending matrix ∫ N_i'' N_j'' dx.
fn element_bending(h: f64) -> [[f64; 4]; 4] {
    let c = 1.0 / (h * h * h);
    let h2 = h * h;
    [
        [12.0 * c, 6.0 * h * c, -12.0 * c, 6.0 * h * c],
        [6.0 * h * c, 4.0 * h2 * c, -6.0 * h * c, 2.0 * h2 * c],
        [-12.0 * c, -6.0 * h * c, 12.0 * c, -6.0 * h * c],
        [6.0 * h * c, 2.0 * h2 * c, -6.0 * h * c, 4.0 * h2 * c],
    ]
}

/// Consistent element mass matrix ∫ N_i N_j dx.
fn element_mass(h: f64) -> [[f64; 4]; 4] {
    let c = h / 420.0;
    let h2 = h * h;
    [
        [156.0 * c, 22.0 * h * c, 54.0 * c, -13.0 * h * c],
        [22.0 * h * c, 4.0 * h2 * c, 13.0 * h * c, -3.0 * h2 * c],
        [54.0 * c, 13.0 * h * c, 156.0 * c, -22.0 * h * c],
        [-13.0 * h * c, -3.0 * h2 * c, -22.0 * h * c, 4.0 * h2 * c],
    ]
}

/// Hermite basis and its first three x-derivatives at local coordinate ξ.
fn basis(xi: f64, h: f64) -> [[f64; 4]; 4] {
    let (x2, x3) = (xi * xi, xi * xi * xi);
    [
        [1.0 - 3.0 * x2 + 2.0 * x3, h * (xi - 2.0 * x2 + x3), 3.0 * x2 - 2.0 * x3, h * (x3 - x2)],
        [
            (6.0 * x2 - 6.0 * xi) / h,
            1.0 - 4.0 * xi + 3.0 * x2,
            (6.0 * xi - 6.0 * x2) / h,
            3.0 * x2 - 2.0 * xi,
        ],
        [
            (12.0 * xi - 6.0) / (h * h),
            (6.0 * xi - 4.0) / h,
            (6.0 - 12.0 * xi) / (h * h),
            (6.0 * xi - 2.0) / h,
        ],
        [12.0 / (h * h * h), 6.0 / (h * h), -12.0 / (h * h * h), 6.0 / (h * h)],
    ]
}

const GAUSS4: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_93),
    (0.330_009_478_207_571_9, 0.326_072_577_431_273_07),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_07),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_93),
];

/// Assembled operators on the free dofs.
#[derive(Clone, Debug)]
pub struct Operators {
    pub grid: Grid,
    /// ρ-weighted consistent mass matrix M.
    pub mass: SymBanded,
    /// Unweighted bending matrix K_b (∫ y_xx v_xx).
    pub bending: SymBanded,
    /// Plain L² mass matrix M0.
    pub l2_mass: SymBanded,
    pub tip_slope: BoundaryTrace,
    pub tip_value: BoundaryTrace,
    pub ei: f64,
    pub rho: f64,
    mass_factor: BandedLdlt,
}

/// Cubic Hermite assembly. Rejects parameters violating positivity or the
/// smallness condition on ϖ.
pub fn assemble(params: &PhysicalParams, grid: &Grid) -> Result<Operators> {
    let report = validate_params(params);
    if !report.admissible {
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
        return Err(Error::Config(format!("non-admissible parameters: {}", failed.join(", "))));
    }
    let n = grid.dof_count();
    let h = grid.h();
    let ke = element_bending(h);
    let me = element_mass(h);
    let mut bending = SymBanded::zeros(n, HALF_BANDWIDTH);
    let mut l2_mass = SymBanded::zeros(n, HALF_BANDWIDTH);
    for e in 0..grid.n_elements() {
        let dofs = [grid.dof(e, 0), grid.dof(e, 1), grid.dof(e + 1, 0), grid.dof(e + 1, 1)];
        for a in 0..4 {
            for b in 0..=a {
                if let (Some(i), Some(j)) = (dofs[a], dofs[b]) {
                    bending.add(i, j, ke[a][b]);
                    l2_mass.add(i, j, me[a][b]);
                }
            }
        }
    }
    let mass = SymBanded::combine(&[(params.rho, &l2_mass)]);
    let mass_factor = mass.factor()?;
    Ok(Operators {
        grid: grid.clone(),
        mass,
        bending,
        l2_mass,
        tip_slope: BoundaryTrace { index: n - 1 },
        tip_value: BoundaryTrace { index: n - 2 },
        ei: params.ei,
        rho: params.rho,
        mass_factor,
    })
}

impl Operators {
    pub fn dof_count(&self) -> usize {
        self.grid.dof_count()
    }

    /// EI·K_b − ρ·ω²·M0
    pub fn stiffness(&self, omega: f64) -> SymBanded {
        SymBanded::combine(&[(self.ei, &self.bending), (-self.rho * omega * omega, &self.l2_mass)])
    }

    pub fn solve_mass(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.mass_factor.solve(rhs)
    }

    pub fn tip_slope_vector(&self) -> DVector<f64> {
        self.tip_slope.vector(self.dof_count())
    }

    /// ∫₀¹ x·v(x)·y_x(x) dx over the Hermite interpolants (exact: the
    /// integrand has degree 6 and the rule is exact to degree 7).
    pub fn moment_product(&self, v: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let grid = &self.grid;
        let h = grid.h();
        let mut total = 0.0;
        for e in 0..grid.n_elements() {
            let yl = local(grid, y, e);
            let vl = local(grid, v, e);
            for &(xi, w) in &GAUSS4 {
                let b = basis(xi, h);
                let x = grid.node(e) + xi * h;
                let vv: f64 = (0..4).map(|k| b[0][k] * vl[k]).sum();
                let yx: f64 = (0..4).map(|k| b[1][k] * yl[k]).sum();
                total += w * h * x * vv * yx;
            }
        }
        total
    }

    /// ∫₀¹ y_xx² dx, equal to yᵀK_b·y but summed as squares of element
    /// curvatures. The assembled form cancels terms of size |y|/h³ and loses
    /// digits that matter when energies are differenced over one step.
    pub fn bending_energy(&self, y: &DVector<f64>) -> f64 {
        let grid = &self.grid;
        let h = grid.h();
        let (left, right) = (basis(0.0, h)[2], basis(1.0, h)[2]);
        let mut total = 0.0;
        for e in 0..grid.n_elements() {
            let l = local(grid, y, e);
            let a: f64 = (0..4).map(|k| left[k] * l[k]).sum();
            let b: f64 = (0..4).map(|k| right[k] * l[k]).sum();
            // y_xx is linear on the element
            let (m, d) = (0.5 * (a + b), 0.5 * (a - b));
            total += h * (m * m + d * d / 3.0);
        }
        total
    }

    /// Value and first three derivatives of the interpolant at `x`.
    pub fn evaluate(&self, coeffs: &DVector<f64>, x: f64) -> [f64; 4] {
        evaluate(&self.grid, coeffs, x)
    }
}

fn local(grid: &Grid, c: &DVector<f64>, e: usize) -> [f64; 4] {
    let get = |node: usize, order: usize| grid.dof(node, order).map_or(0.0, |i| c[i]);
    [get(e, 0), get(e, 1), get(e + 1, 0), get(e + 1, 1)]
}

/// Value and first three derivatives of the Hermite interpolant at `x`.
pub fn evaluate(grid: &Grid, coeffs: &DVector<f64>, x: f64) -> [f64; 4] {
    let (e, xi) = grid.locate(x.clamp(0.0, 1.0));
    let b = basis(xi, grid.h());
    let l = local(grid, coeffs, e);
    let mut out = [0.0; 4];
    for (d, row) in b.iter().enumerate() {
        out[d] = (0..4).map(|k| row[k] * l[k]).sum();
    }
    out
}

/// Nodal interpolation of a function given with its derivative. The clamped
/// values at x = 0 are dropped.
pub fn interpolate(grid: &Grid, g: impl Fn(f64) -> (f64, f64)) -> DVector<f64> {
    let mut c = DVector::zeros(grid.dof_count());
    for i in 1..=grid.n_elements() {
        let (v, d) = g(grid.node(i));
        c[2 * (i - 1)] = v;
        c[2 * (i - 1) + 1] = d;
    }
    c
}

/// Eigenvalues (ascending) and, optionally, B-orthonormal eigenvectors of the
/// symmetric-definite pencil A·x = λ·B·x.
pub fn generalized_eigen(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    vectors: bool,
) -> Result<(DVector<f64>, Option<DMatrix<f64>>)> {
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("generalized eigen: B is not positive definite".into()))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::Numerical("generalized eigen: singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::Numerical("generalized eigen: singular Cholesky factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let n = c.nrows();
    let eig = nalgebra::SymmetricEigen::try_new(c, 1e-15, 10_000 + 100 * n)
        .ok_or_else(|| Error::Numerical(format!("symmetric eigen-solve did not converge (n = {n})")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vecs = if vectors {
        let u = DMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
        let phi = l
            .transpose()
            .solve_upper_triangular(&u)
            .ok_or_else(|| Error::Numerical("generalized eigen: back-substitution failed".into()))?;
        Some(phi)
    } else {
        None
    };
    Ok((values, vecs))
}

/// min over y of [EI·yᵀK_b·y − ρϖ²·yᵀM0·y] / yᵀM0·y. Positive values certify
/// that the energy quadratic form is a norm on the discrete space.
pub fn coercivity_min_eig(ops: &Operators, params: &PhysicalParams) -> Result<f64> {
    let a = SymBanded::combine(&[
        (params.ei, &ops.bending),
        (-params.rho * params.varpi * params.varpi, &ops.l2_mass),
    ]);
    let (vals, _) = generalized_eigen(&a.to_dense(), &ops.l2_mass.to_dense(), false)?;
    Ok(vals[0])
}

/// Smallest `count` eigenvalues of EI·K_b relative to M, ascending.
pub fn beam_modes(ops: &Operators, count: usize) -> Result<Vec<f64>> {
    if count > ops.dof_count() {
        return Err(Error::Config(format!(
            "requested {count} modes but the grid has only {} dofs",
            ops.dof_count()
        )));
    }
    let a = SymBanded::combine(&[(ops.ei, &ops.bending)]);
    let (vals, _) = generalized_eigen(&a.to_dense(), &ops.mass.to_dense(), false)?;
    Ok(vals.iter().take(count).copied().collect())
}

/// Static loads for the cantilever oracle.
#[derive(Clone, Debug, PartialEq)]
pub enum Load {
    /// Uniform distributed load q per unit length.
    Uniform(f64),
    /// Point force at the free end.
    TipForce(f64),
    /// Consistent nodal load vector on the free dofs.
    Nodal(DVector<f64>),
}

pub fn load_vector(grid: &Grid, load: &Load) -> DVector<f64> {
    let n = grid.dof_count();
    match load {
        Load::Uniform(q) => {
            let h = grid.h();
            let fe = [q * h / 2.0, q * h * h / 12.0, q * h / 2.0, -q * h * h / 12.0];
            let mut f = DVector::zeros(n);
            for e in 0..grid.n_elements() {
                let dofs = [grid.dof(e, 0), grid.dof(e, 1), grid.dof(e + 1, 0), grid.dof(e + 1, 1)];
                for (d, v) in dofs.iter().zip(fe) {
                    if let Some(i) = d {
                        f[*i] += v;
                    }
                }
            }
            f
        }
        Load::TipForce(p) => {
            let mut f = DVector::zeros(n);
            f[n - 2] = *p;
            f
        }
        Load::Nodal(f) => f.clone(),
    }
}

/// Solves EI·K_b·y = load.
pub fn static_solve(ops: &Operators, load: &Load) -> Result<DVector<f64>> {
    let f = load_vector(&ops.grid, load);
    let k = SymBanded::combine(&[(ops.ei, &ops.bending)]);
    let fac = k.factor()?;
    Ok(fac.solve(&f))
}
