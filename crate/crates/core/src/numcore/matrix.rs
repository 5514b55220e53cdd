use super::vector::check_finite;
use super::{norm2, NumError, ParamVector, SeededRng};

/// Hard cap on power-iteration sweeps.
pub const POWER_ITERATION_CAP: usize = 100_000;

const POWER_START_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

/// Dense symmetric matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SymmetricMatrix {
    /// Builds from row-major entries; symmetry must hold exactly.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self, NumError> {
        if dim == 0 {
            return Err(NumError::InvalidArgument(
                "matrix dimension must be positive",
            ));
        }
        if entries.len() != dim * dim {
            return Err(NumError::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        check_finite(&entries, "matrix entries")?;
        for i in 0..dim {
            for j in (i + 1)..dim {
                if entries[i * dim + j] != entries[j * dim + i] {
                    return Err(NumError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, NumError> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(NumError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::new(dim, entries)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self, NumError> {
        let dim = diag.len();
        let mut entries = vec![0.0; dim * dim];
        for (i, d) in diag.iter().enumerate() {
            entries[i * dim + i] = *d;
        }
        Self::new(dim, entries)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim]).expect("identity is symmetric")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    /// Diagonal entries when every off-diagonal entry is zero.
    pub fn diagonal(&self) -> Option<Vec<f64>> {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                if i != j && self.entries[i * n + j] != 0.0 {
                    return None;
                }
            }
        }
        Some((0..n).map(|i| self.entries[i * n + i]).collect())
    }

    pub fn matvec(&self, x: &ParamVector) -> Result<ParamVector, NumError> {
        if x.len() != self.dim {
            return Err(NumError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let out = (0..self.dim)
            .map(|i| self.row(i).iter().zip(x.iter()).map(|(q, v)| q * v).sum())
            .collect();
        ParamVector::new(out).map_err(|_| NumError::NonFinite {
            context: "matrix-vector product",
        })
    }

    /// `xᵀ Q x`.
    pub fn quadratic(&self, x: &ParamVector) -> Result<f64, NumError> {
        self.matvec(x)?.dot(x)
    }
}

/// Largest eigenvalue magnitude `max |λᵢ|` of `q`, i.e. the Lipschitz constant
/// of `x ↦ Qx`, by power iteration from a fixed pseudo-random start.
///
/// Iterates on `Q²` so that a tie between `λ` and `-λ` still converges.
/// Stops once the eigen-residual of `Q²` is within `tol` relative, or once the
/// estimate stagnates (near-degenerate top eigenvalues).
pub fn spd_max_eigenvalue(q: &SymmetricMatrix, tol: f64) -> Result<f64, NumError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(NumError::InvalidArgument("tolerance must be positive"));
    }
    let n = q.dim();
    if q.entries.iter().all(|&e| e == 0.0) {
        return Ok(0.0);
    }

    let mut rng = SeededRng::new(POWER_START_SEED);
    let start: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
    let mut v = normalized(ParamVector::new(start)?)?;
    let mut prev = f64::NAN;

    for _ in 0..POWER_ITERATION_CAP {
        let qv = q.matvec(&v)?;
        let sigma = qv.dot(&qv)?;
        if sigma == 0.0 {
            // Start landed in the null space; nudge along a fresh direction.
            let nudge: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
            v = normalized(v.add_scaled(1.0, &ParamVector::new(nudge)?)?)?;
            continue;
        }
        let qqv = q.matvec(&qv)?;
        let residual = norm2(&qqv.add_scaled(-sigma, &v)?);
        let estimate = sigma.sqrt();
        if residual <= tol * sigma || (estimate - prev).abs() <= 1e-3 * tol * estimate {
            return Ok(estimate);
        }
        prev = estimate;
        v = normalized(qqv)?;
    }
    Err(NumError::NoConvergence {
        iterations: POWER_ITERATION_CAP,
    })
}

fn normalized(v: ParamVector) -> Result<ParamVector, NumError> {
    let n = norm2(&v);
    if n == 0.0 {
        return Err(NumError::InvalidArgument(
            "cannot normalize the zero vector",
        ));
    }
    v.scale(1.0 / n)
}
