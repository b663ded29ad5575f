//! Value types for states and operators on a finite Hilbert space.
//!
//! Everything here is a plain immutable value: operators and density matrices
//! are dense complex matrices (the system has eight levels, so sparsity buys
//! nothing), and all construction paths validate the physical invariants.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Basis states of the quantum dot molecule.
///
/// The ground manifold holds the singlet `S` and the triplet `{T0, T+, T-}`;
/// `{X-, X+, X1, X2}` are the optically excited states. The index order is
/// fixed and doubles as the matrix row/column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    S,
    T0,
    TPlus,
    TMinus,
    XMinus,
    XPlus,
    X1,
    X2,
}

impl Level {
    pub const COUNT: usize = 8;

    pub const ALL: [Level; 8] = [
        Level::S,
        Level::T0,
        Level::TPlus,
        Level::TMinus,
        Level::XMinus,
        Level::XPlus,
        Level::X1,
        Level::X2,
    ];

    pub fn index(self) -> usize {
        match self {
            Level::S => 0,
            Level::T0 => 1,
            Level::TPlus => 2,
            Level::TMinus => 3,
            Level::XMinus => 4,
            Level::XPlus => 5,
            Level::X1 => 6,
            Level::X2 => 7,
        }
    }

    pub fn from_index(index: usize) -> Option<Level> {
        Level::ALL.get(index).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            Level::S => "S",
            Level::T0 => "T0",
            Level::TPlus => "T+",
            Level::TMinus => "T-",
            Level::XMinus => "X-",
            Level::XPlus => "X+",
            Level::X1 => "X1",
            Level::X2 => "X2",
        }
    }

    /// True for the four ground states.
    pub fn is_ground(self) -> bool {
        matches!(self, Level::S | Level::T0 | Level::TPlus | Level::TMinus)
    }

    /// True for the triplet ground states `{T0, T+, T-}`. Emission into these
    /// states falls inside the broadband collection window.
    pub fn is_triplet(self) -> bool {
        matches!(self, Level::T0 | Level::TPlus | Level::TMinus)
    }
}

/// A dense complex square matrix acting on the Hilbert space. Houses both
/// Hamiltonians (rad/ns) and dimensionless jump operators.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexOperator {
    mat: DMatrix<Complex64>,
}

impl ComplexOperator {
    /// Wrap a square matrix. Panics on a non-square input, which is a
    /// programming error rather than a runtime condition.
    pub fn from_matrix(mat: DMatrix<Complex64>) -> Self {
        assert!(
            mat.is_square() && mat.nrows() >= 1,
            "operator matrix must be square and non-empty"
        );
        Self { mat }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_matrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_matrix(DMatrix::identity(dim, dim))
    }

    /// The rank-one operator `|i><j|`.
    pub fn ketbra(i: usize, j: usize, dim: usize) -> Result<Self> {
        let bad = if i >= dim { i } else { j };
        if i >= dim || j >= dim {
            return Err(CoreError::IndexOutOfRange { index: bad, dim });
        }
        let mut mat = DMatrix::zeros(dim, dim);
        mat[(i, j)] = Complex64::new(1.0, 0.0);
        Ok(Self { mat })
    }

    /// The projector `|i><i|`.
    pub fn projector(i: usize, dim: usize) -> Result<Self> {
        Self::ketbra(i, i, dim)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
        }
    }

    /// Largest entrywise deviation from the adjoint, `max |M - M^dag|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let adj = self.mat.adjoint();
        (&self.mat - adj)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }
}

/// Density matrix of the system: Hermitian, unit trace, positive semidefinite.
///
/// Construction validates all three invariants; the tolerances separate
/// integrator round-off from genuine model bugs.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Tolerance on `max |rho - rho^dag|`.
    pub const HERMITICITY_TOL: f64 = 1e-10;
    /// Tolerance on `|Tr rho - 1|`.
    pub const TRACE_TOL: f64 = 1e-8;
    /// Floor on the smallest eigenvalue of the Hermitized matrix.
    pub const EIGENVALUE_FLOOR: f64 = -1e-9;

    /// Validate and wrap a candidate density matrix.
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        if !mat.is_square() || mat.nrows() == 0 {
            return Err(CoreError::DimensionMismatch {
                context: "density matrix must be square and non-empty",
                expected: mat.nrows(),
                got: mat.ncols(),
            });
        }
        let dev = {
            let adj = mat.adjoint();
            (&mat - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
        };
        if dev >= Self::HERMITICITY_TOL {
            return Err(CoreError::NotHermitian {
                deviation: dev,
                tolerance: Self::HERMITICITY_TOL,
            });
        }
        let trace = mat.trace();
        if (trace.re - 1.0).abs() >= Self::TRACE_TOL || trace.im.abs() >= Self::TRACE_TOL {
            return Err(CoreError::InvariantViolation {
                t: 0.0,
                what: format!("trace {} deviates from 1 beyond {:.1e}", trace, Self::TRACE_TOL),
            });
        }
        let min_eig = min_eigenvalue_hermitian(&mat);
        if min_eig <= Self::EIGENVALUE_FLOOR {
            return Err(CoreError::InvariantViolation {
                t: 0.0,
                what: format!(
                    "smallest eigenvalue {min_eig:.3e} below floor {:.1e}",
                    Self::EIGENVALUE_FLOOR
                ),
            });
        }
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// Diagonal population of basis state `i`.
    pub fn population(&self, i: usize) -> f64 {
        self.mat[(i, i)].re
    }

    /// Off-diagonal element `rho_ij`.
    pub fn coherence(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    /// Smallest eigenvalue of the Hermitized matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue_hermitian(&self.mat)
    }
}

/// Smallest eigenvalue of `(M + M^dag)/2`, computed through the real symmetric
/// embedding `[[Re, -Im], [Im, Re]]`, whose spectrum doubles the Hermitian one.
pub(crate) fn min_eigenvalue_hermitian(mat: &DMatrix<Complex64>) -> f64 {
    let n = mat.nrows();
    let mut herm = mat.clone();
    let adj = mat.adjoint();
    herm += adj;
    herm *= Complex64::new(0.5, 0.0);

    let mut embed = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = herm[(i, j)];
            embed[(i, j)] = z.re;
            embed[(i + n, j + n)] = z.re;
            embed[(i, j + n)] = -z.im;
            embed[(i + n, j)] = z.im;
        }
    }
    embed
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// The pure state `|level><level|` in a `dim`-dimensional space.
pub fn pure_state(level: Level, dim: usize) -> Result<DensityMatrix> {
    let idx = level.index();
    if idx >= dim {
        return Err(CoreError::IndexOutOfRange { index: idx, dim });
    }
    let mut mat = DMatrix::zeros(dim, dim);
    mat[(idx, idx)] = Complex64::new(1.0, 0.0);
    DensityMatrix::new(mat)
}

/// `Tr(op * rho)`. Real to round-off when `op` is Hermitian.
pub fn expectation(op: &ComplexOperator, state: &DensityMatrix) -> Result<Complex64> {
    if op.dim() != state.dim() {
        return Err(CoreError::DimensionMismatch {
            context: "expectation operator vs state",
            expected: state.dim(),
            got: op.dim(),
        });
    }
    // Tr(A B) = sum_ij A_ij B_ji without forming the product.
    let n = op.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += op.matrix()[(i, j)] * state.matrix()[(j, i)];
        }
    }
    Ok(acc)
}

/// Convex combination of density matrices. Weights must be non-negative and
/// sum to 1 within 1e-12.
pub fn mixed(parts: &[(f64, DensityMatrix)]) -> Result<DensityMatrix> {
    if parts.is_empty() {
        return Err(CoreError::InvalidWeights {
            reason: "empty mixture".to_string(),
        });
    }
    let dim = parts[0].1.dim();
    let mut sum = 0.0;
    for (w, rho) in parts {
        if *w < 0.0 {
            return Err(CoreError::InvalidWeights {
                reason: format!("negative weight {w}"),
            });
        }
        if rho.dim() != dim {
            return Err(CoreError::DimensionMismatch {
                context: "mixture component",
                expected: dim,
                got: rho.dim(),
            });
        }
        sum += w;
    }
    if (sum - 1.0).abs() > 1e-12 {
        return Err(CoreError::InvalidWeights {
            reason: format!("weights sum to {sum}, expected 1"),
        });
    }
    let mut mat = DMatrix::<Complex64>::zeros(dim, dim);
    for (w, rho) in parts {
        mat += rho.matrix() * Complex64::new(*w, 0.0);
    }
    DensityMatrix::new(mat)
}

/// Flatten a complex matrix column-major into `[Re(vec m); Im(vec m)]`.
pub(crate) fn pack_matrix(mat: &DMatrix<Complex64>) -> DVector<f64> {
    let n2 = mat.nrows() * mat.ncols();
    let mut v = DVector::zeros(2 * n2);
    for (k, z) in mat.iter().enumerate() {
        v[k] = z.re;
        v[k + n2] = z.im;
    }
    v
}

/// Inverse of [`pack_matrix`] for a `dim x dim` matrix.
pub(crate) fn unpack_matrix(v: &DVector<f64>, dim: usize) -> DMatrix<Complex64> {
    let n2 = dim * dim;
    DMatrix::from_fn(dim, dim, |i, j| {
        let k = j * dim + i;
        Complex64::new(v[k], v[k + n2])
    })
}
