//! Compiles the three sparsity-regularized recovery problems into
//! standard-form LPs and decodes LP solutions back to the signal.
//!
//! Every builder minimizes `‖T X‖₁` subject to `A X = Y` for some linear
//! transform `T`:
//!
//! | formulation   | `T`                                   |
//! |---------------|---------------------------------------|
//! | `BasisL1`     | sparsifying basis `φ` (n×n)            |
//! | `PairwiseL1`  | edge incidence rows `x_i − x_j`        |
//! | `LaplacianL1` | graph Laplacian `L`                    |
//!
//! The free signal is split as `X = X⁺ − X⁻` and each entry of `T X` as
//! `u_e − v_e`, so the bound `δ_e ≥ |(T X)_e|` is carried by `δ_e = u_e + v_e`
//! (at an optimum one of the pair is zero). Variable layout, `p = rows(T)`:
//! `[X⁺(n), X⁻(n), u(p), v(p)]`.
//!
//! ```text
//!  A X⁺ − A X⁻            = Y
//!  T X⁺ − T X⁻ − u + v    = 0
//!  minimize 1ᵀu + 1ᵀv
//! ```
//!
//! [`recover`] solves the Lagrangian dual instead,
//!
//! ```text
//!  maximize Yᵀλ  s.t.  Aᵀλ = Tᵀμ,  −1 ≤ μ ≤ 1
//! ```
//!
//! which has only `n` equality rows however many edges the graph has; the
//! signal is read off the optimal multipliers. Variable layout of the dual:
//! `[λ⁺(k), λ⁻(k), μ + 1 (p)]`.

use thiserror::Error;

use crate::graph;
use crate::lp::{solve_lp, DenseMatrix, LpError, LpProblem, LpSolution, LpStatus};

pub type Edge = (usize, usize);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparsityError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("edge list is empty")]
    EmptyEdgeList,
    #[error("invalid edge ({0}, {1}) for {2} nodes")]
    InvalidEdge(usize, usize, usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("LP did not reach an optimum: {0:?}")]
    NotOptimal(LpStatus),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Received linear measurements `Y = A X`.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    matrix: DenseMatrix,
    values: Vec<f64>,
}

impl Measurement {
    pub fn new(matrix: DenseMatrix, values: Vec<f64>) -> Result<Self, SparsityError> {
        if matrix.rows() != values.len() {
            return Err(SparsityError::DimensionMismatch(format!(
                "{} measurement rows but {} values",
                matrix.rows(),
                values.len()
            )));
        }
        Ok(Self { matrix, values })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Signal length `n`.
    pub fn signal_len(&self) -> usize {
        self.matrix.cols()
    }

    /// Drops the listed signal entries (lost data): removes the matching
    /// columns of `A` and keeps `Y` as is.
    pub fn retain_columns(&self, keep: &[usize]) -> Measurement {
        Measurement {
            matrix: self.matrix.select_columns(keep),
            values: self.values.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CsFormulation {
    BasisL1(DenseMatrix),
    PairwiseL1(Vec<Edge>),
    LaplacianL1(Vec<Edge>),
}

impl CsFormulation {
    /// The primal LP in the layout described above.
    pub fn build(&self, meas: &Measurement) -> Result<LpProblem, SparsityError> {
        match self {
            CsFormulation::BasisL1(basis) => build_basis_l1(meas, basis),
            CsFormulation::PairwiseL1(edges) => build_pairwise_l1(meas, edges),
            CsFormulation::LaplacianL1(edges) => build_laplacian_l1(meas, edges),
        }
    }

    /// The dual LP; see [`decode_dual`].
    pub fn build_dual(&self, meas: &Measurement) -> Result<LpProblem, SparsityError> {
        build_dual_l1(meas, &self.transform(meas.signal_len())?)
    }

    /// The sparsifying transform `T` for signals of length `n`.
    pub fn transform(&self, n: usize) -> Result<DenseMatrix, SparsityError> {
        match self {
            CsFormulation::BasisL1(basis) => {
                if basis.rows() != n || basis.cols() != n {
                    return Err(SparsityError::DimensionMismatch(format!(
                        "basis is {}x{}, signal length {n}",
                        basis.rows(),
                        basis.cols()
                    )));
                }
                Ok(basis.clone())
            }
            CsFormulation::PairwiseL1(edges) => {
                validate_edges(edges, n)?;
                let mut incidence = DenseMatrix::zeros(edges.len(), n);
                for (e, &(i, j)) in edges.iter().enumerate() {
                    incidence[(e, i)] = 1.0;
                    incidence[(e, j)] = -1.0;
                }
                Ok(incidence)
            }
            CsFormulation::LaplacianL1(edges) => {
                validate_edges(edges, n)?;
                Ok(graph::laplacian_from_edges(n, edges))
            }
        }
    }
}

/// `min ‖φX‖₁ s.t. Y = AX`.
pub fn build_basis_l1(meas: &Measurement, basis: &DenseMatrix) -> Result<LpProblem, SparsityError> {
    let t = CsFormulation::BasisL1(basis.clone()).transform(meas.signal_len())?;
    build_transform_l1(meas, &t)
}

/// `min Σ_{ij∈E} |x_i − x_j| s.t. Y = AX`.
pub fn build_pairwise_l1(meas: &Measurement, edges: &[Edge]) -> Result<LpProblem, SparsityError> {
    let t = CsFormulation::PairwiseL1(edges.to_vec()).transform(meas.signal_len())?;
    build_transform_l1(meas, &t)
}

/// `min ‖LX‖₁ s.t. Y = AX` with `L` the Laplacian of `edges`.
pub fn build_laplacian_l1(meas: &Measurement, edges: &[Edge]) -> Result<LpProblem, SparsityError> {
    let t = CsFormulation::LaplacianL1(edges.to_vec()).transform(meas.signal_len())?;
    build_transform_l1(meas, &t)
}

/// Dual of `min ‖TX‖₁ s.t. Y = AX`, with `μ` shifted to `[0, 2]`:
///
/// ```text
///  Aᵀλ⁺ − Aᵀλ⁻ − Tᵀw = −Tᵀ1
///  minimize −Yᵀλ⁺ + Yᵀλ⁻,   0 ≤ w ≤ 2
/// ```
pub fn build_dual_l1(meas: &Measurement, transform: &DenseMatrix) -> Result<LpProblem, SparsityError> {
    let n = meas.signal_len();
    let k = meas.matrix().rows();
    let p = transform.rows();
    if transform.cols() != n {
        return Err(SparsityError::DimensionMismatch(format!(
            "transform has {} columns, signal length {n}",
            transform.cols()
        )));
    }
    let cols = 2 * k + p;
    let mut g = DenseMatrix::zeros(n, cols);
    let mut h = vec![0.0; n];
    for r in 0..k {
        for (i, &a) in meas.matrix().row(r).iter().enumerate() {
            g[(i, r)] = a;
            g[(i, k + r)] = -a;
        }
    }
    for e in 0..p {
        for (i, &t) in transform.row(e).iter().enumerate() {
            if t != 0.0 {
                g[(i, 2 * k + e)] = -t;
                h[i] -= t;
            }
        }
    }
    let mut c = vec![0.0; cols];
    for (r, &y) in meas.values().iter().enumerate() {
        c[r] = -y;
        c[k + r] = y;
    }
    let mut upper = vec![f64::INFINITY; cols];
    for u in &mut upper[2 * k..] {
        *u = 2.0;
    }
    Ok(LpProblem::new(c, g, h)?.with_upper_bounds(upper)?)
}

fn validate_edges(edges: &[Edge], n: usize) -> Result<(), SparsityError> {
    if edges.is_empty() {
        return Err(SparsityError::EmptyEdgeList);
    }
    let mut seen = std::collections::HashSet::with_capacity(edges.len());
    for &(i, j) in edges {
        if i >= j || j >= n {
            return Err(SparsityError::InvalidEdge(i, j, n));
        }
        if !seen.insert((i, j)) {
            return Err(SparsityError::DuplicateEdge(i, j));
        }
    }
    Ok(())
}

fn build_transform_l1(meas: &Measurement, transform: &DenseMatrix) -> Result<LpProblem, SparsityError> {
    let n = meas.signal_len();
    let k = meas.matrix().rows();
    let p = transform.rows();
    let rows = k + p;
    let cols = 2 * n + 2 * p;
    let mut g = DenseMatrix::zeros(rows, cols);
    let mut h = vec![0.0; rows];
    for r in 0..k {
        for (j, &a) in meas.matrix().row(r).iter().enumerate() {
            g[(r, j)] = a;
            g[(r, n + j)] = -a;
        }
        h[r] = meas.values()[r];
    }
    for e in 0..p {
        let row = k + e;
        for (j, &t) in transform.row(e).iter().enumerate() {
            if t != 0.0 {
                g[(row, j)] = t;
                g[(row, n + j)] = -t;
            }
        }
        g[(row, 2 * n + e)] = -1.0;
        g[(row, 2 * n + p + e)] = 1.0;
    }
    let mut c = vec![0.0; cols];
    for v in &mut c[2 * n..] {
        *v = 1.0;
    }
    Ok(LpProblem::new(c, g, h)?)
}

/// Reads `X = X⁺ − X⁻` from the first `2n` LP variables.
pub fn decode_solution(sol: &LpSolution, n: usize) -> Result<Vec<f64>, SparsityError> {
    if sol.status != LpStatus::Optimal {
        return Err(SparsityError::NotOptimal(sol.status));
    }
    if sol.values.len() < 2 * n {
        return Err(SparsityError::DimensionMismatch(format!(
            "{} LP values cannot hold a split signal of length {n}",
            sol.values.len()
        )));
    }
    Ok((0..n).map(|i| sol.values[i] - sol.values[n + i]).collect())
}

/// Reads the signal off a solved dual: `X = −π`.
pub fn decode_dual(sol: &LpSolution, n: usize) -> Result<Vec<f64>, SparsityError> {
    if sol.status != LpStatus::Optimal {
        // an unbounded dual means the measurements are inconsistent
        return Err(SparsityError::NotOptimal(sol.status));
    }
    if sol.duals.len() != n {
        return Err(SparsityError::DimensionMismatch(format!(
            "{} multipliers for a signal of length {n}",
            sol.duals.len()
        )));
    }
    Ok(sol.duals.iter().map(|v| -v).collect())
}

/// Builds, solves and decodes in one go (through the dual).
pub fn recover(meas: &Measurement, formulation: &CsFormulation, feas_tol: f64) -> Result<Vec<f64>, SparsityError> {
    let problem = formulation.build_dual(meas)?;
    let sol = solve_lp(&problem, feas_tol)?;
    decode_dual(&sol, meas.signal_len())
}

/// Same problem through the primal LP; slower on large graphs.
pub fn recover_primal(
    meas: &Measurement,
    formulation: &CsFormulation,
    feas_tol: f64,
) -> Result<Vec<f64>, SparsityError> {
    let problem = formulation.build(meas)?;
    let sol = solve_lp(&problem, feas_tol)?;
    decode_solution(&sol, meas.signal_len())
}
