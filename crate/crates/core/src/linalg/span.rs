//! Incremental exact Gaussian elimination.

use super::scalar::Scalar;

/// Outcome of offering a vector to an [`Echelon`].
#[derive(Debug, Clone, PartialEq)]
pub enum Insert {
    /// The vector was independent and became member `index`.
    Independent(usize),
    /// The vector equals `Σ coeffs[m] · member_m`.
    Dependent(Vec<Scalar>),
}

/// Row-echelon basis of a growing set of member vectors, tracking how each
/// reduced row is expressed in terms of the original members so that
/// dependent vectors can be written as exact combinations of members.
#[derive(Debug, Clone)]
pub struct Echelon {
    len: usize,
    rows: Vec<(usize, Vec<Scalar>)>,
    // transform[j] expresses rows[j] as a combination of members
    transform: Vec<Vec<Scalar>>,
    members: Vec<Vec<Scalar>>,
}

impl Echelon {
    pub fn new(len: usize) -> Self {
        Echelon {
            len,
            rows: Vec::new(),
            transform: Vec::new(),
            members: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn members(&self) -> &[Vec<Scalar>] {
        &self.members
    }

    /// Splits `v` into `Σ coeffs · members + residual`.
    pub fn reduce(&self, v: &[Scalar]) -> (Vec<Scalar>, Vec<Scalar>) {
        assert_eq!(v.len(), self.len, "vector length");
        let mut residual = v.to_vec();
        let mut coeffs = vec![Scalar::zero(); self.members.len()];
        for ((pivot, row), t) in self.rows.iter().zip(&self.transform) {
            if residual[*pivot].is_zero() {
                continue;
            }
            let factor = &residual[*pivot] / &row[*pivot];
            for (x, r) in residual.iter_mut().zip(row).skip(*pivot) {
                if !r.is_zero() {
                    *x -= &(&factor * r);
                }
            }
            for (c, tc) in coeffs.iter_mut().zip(t) {
                if !tc.is_zero() {
                    *c += &(&factor * tc);
                }
            }
        }
        (coeffs, residual)
    }

    /// Coefficients of `v` in the members, if `v` lies in their span.
    pub fn express(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        let (coeffs, residual) = self.reduce(v);
        residual.iter().all(Scalar::is_zero).then_some(coeffs)
    }

    pub fn insert(&mut self, v: Vec<Scalar>) -> Insert {
        let (coeffs, residual) = self.reduce(&v);
        match residual.iter().position(|x| !x.is_zero()) {
            None => Insert::Dependent(coeffs),
            Some(pivot) => {
                let index = self.members.len();
                let mut t: Vec<Scalar> = coeffs.into_iter().map(|c| -c).collect();
                t.push(Scalar::one());
                for old in &mut self.transform {
                    old.push(Scalar::zero());
                }
                self.rows.push((pivot, residual));
                self.transform.push(t);
                self.members.push(v);
                Insert::Independent(index)
            }
        }
    }
}

/// Exact rank of a set of vectors.
pub fn rank(vectors: &[Vec<Scalar>]) -> usize {
    let Some(first) = vectors.first() else {
        return 0;
    };
    let mut e = Echelon::new(first.len());
    for v in vectors {
        e.insert(v.clone());
    }
    e.rank()
}

/// Solves `Σ_j x_j · columns[j] = target` exactly when the columns are
/// independent and the target lies in their span.
pub fn solve_in_span(columns: &[Vec<Scalar>], target: &[Scalar]) -> Option<Vec<Scalar>> {
    let mut e = Echelon::new(target.len());
    for c in columns {
        if let Insert::Dependent(_) = e.insert(c.clone()) {
            return None;
        }
    }
    e.express(target)
}
