use serde::{Deserialize, Serialize};

use super::float::FMat;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Submultiplicative matrix norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Frobenius,
    /// Operator ∞-norm: max row sum of absolute values.
    RowSum,
    /// Operator 1-norm: max column sum of absolute values.
    ColSum,
    /// `‖D⁻¹AD‖_∞` with `D = diag(weights)`, weights strictly positive.
    ScaledRowSum(Vec<f64>),
}

impl NormKind {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if let NormKind::ScaledRowSum(w) = self {
            if w.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: w.len(),
                });
            }
            if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::InvalidArgument(
                    "scaling weights must be positive and finite".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &'static str {
        match self {
            NormKind::Frobenius => "frobenius",
            NormKind::RowSum => "row_sum",
            NormKind::ColSum => "col_sum",
            NormKind::ScaledRowSum(_) => "scaled_row_sum",
        }
    }
}

/// Dense square matrix of exact rationals, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    dim: usize,
    entries: Vec<Scalar>,
}

impl std::fmt::Debug for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix {
            dim,
            entries: vec![Scalar::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Scalar::one();
        }
        m
    }

    pub fn diag(values: &[Scalar]) -> Self {
        let mut m = Matrix::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.entries[i * values.len() + i] = v.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidRepresentation("empty matrix".into()));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::InvalidRepresentation(format!(
                    "matrix is not square: row of length {} in a {dim}-row matrix",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        Ok(Matrix { dim, entries })
    }

    /// Convenience constructor for integer matrices. Panics if not square.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&x| Scalar::from(x)).collect())
            .collect();
        Matrix::from_rows(rows).expect("square integer matrix")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Scalar) {
        self.entries[i * self.dim + j] = value;
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Scalar]> {
        self.entries.chunks(self.dim)
    }

    pub fn row_vecs(&self) -> Vec<Vec<Scalar>> {
        self.rows().map(|r| r.to_vec()).collect()
    }

    pub fn is_integer(&self) -> bool {
        self.entries.iter().all(Scalar::is_integer)
    }

    pub fn transpose(&self) -> Matrix {
        let d = self.dim;
        let mut t = Matrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                t.entries[j * d + i] = self.entries[i * d + j].clone();
            }
        }
        t
    }

    pub fn scale(&self, alpha: &Scalar) -> Matrix {
        Matrix {
            dim: self.dim,
            entries: self.entries.iter().map(|x| x * alpha).collect(),
        }
    }

    /// Exact product `self · other`.
    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let d = self.dim;
        let mut out = Matrix::zeros(d);
        for i in 0..d {
            for l in 0..d {
                let a = &self.entries[i * d + l];
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = &other.entries[l * d + j];
                    if !b.is_zero() {
                        out.entries[i * d + j] += &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `self · v` for a column vector.
    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        debug_assert_eq!(v.len(), self.dim);
        self.rows().map(|row| dot(row, v)).collect()
    }

    /// `uᵀ · self` for a row vector.
    pub fn vec_mul(&self, u: &[Scalar]) -> Vec<Scalar> {
        debug_assert_eq!(u.len(), self.dim);
        let d = self.dim;
        let mut out = vec![Scalar::zero(); d];
        for (i, ui) in u.iter().enumerate() {
            if ui.is_zero() {
                continue;
            }
            for j in 0..d {
                let a = &self.entries[i * d + j];
                if !a.is_zero() {
                    out[j] += &(ui * a);
                }
            }
        }
        out
    }

    pub fn to_float(&self) -> FMat {
        FMat::from_vec(self.dim, self.entries.iter().map(Scalar::to_f64).collect())
    }

    /// Matrix norm. Row and column sums are accumulated exactly before the
    /// conversion to float.
    pub fn norm(&self, kind: &NormKind) -> f64 {
        let d = self.dim;
        match kind {
            NormKind::RowSum => self
                .rows()
                .map(|r| r.iter().map(Scalar::abs).sum::<Scalar>().to_f64())
                .fold(0.0, f64::max),
            NormKind::ColSum => (0..d)
                .map(|j| {
                    (0..d)
                        .map(|i| self.get(i, j).abs())
                        .sum::<Scalar>()
                        .to_f64()
                })
                .fold(0.0, f64::max),
            NormKind::Frobenius => self
                .entries
                .iter()
                .map(|x| x * x)
                .sum::<Scalar>()
                .to_f64()
                .sqrt(),
            NormKind::ScaledRowSum(_) => self.to_float().norm(kind),
        }
    }
}

/// Multiplies two matrices, checking dimensions.
pub fn mat_mul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.mul(b)
}

/// Norm of `a` in the given kind.
pub fn mat_norm(a: &Matrix, kind: &NormKind) -> f64 {
    a.norm(kind)
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    let mut acc = Scalar::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += &(x * y);
        }
    }
    acc
}

pub fn unit_vector(dim: usize, index: usize) -> Vec<Scalar> {
    let mut e = vec![Scalar::zero(); dim];
    e[index] = Scalar::one();
    e
}

pub fn scalars_from_i64(values: &[i64]) -> Vec<Scalar> {
    values.iter().map(|&x| Scalar::from(x)).collect()
}
