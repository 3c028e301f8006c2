use serde::{Deserialize, Serialize};

use super::{LinearRep, Provenance};
use crate::error::{Error, Result};
use crate::linalg::{scalars_from_i64, Matrix, Scalar};

/// Summary line for a built-in representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub k: u32,
    pub d: usize,
    pub provenance: Provenance,
    pub param: Option<String>,
    pub description: String,
}

impl CatalogEntry {
    /// `stern (k=2,d=2,basis)`; parameterised entries append `param x`.
    pub fn label(&self) -> String {
        match &self.param {
            Some(p) => format!(
                "{} (k={},d={},{},param {p})",
                self.name,
                self.k,
                self.d,
                self.provenance.as_str()
            ),
            None => format!(
                "{} (k={},d={},{})",
                self.name,
                self.k,
                self.d,
                self.provenance.as_str()
            ),
        }
    }
}

pub fn catalog_entries() -> Vec<CatalogEntry> {
    let entry = |name: &str, d, provenance, param: Option<&str>, description: &str| CatalogEntry {
        name: name.into(),
        k: 2,
        d,
        provenance,
        param: param.map(Into::into),
        description: description.into(),
    };
    vec![
        entry(
            "stern",
            2,
            Provenance::Basis,
            None,
            "Stern's diatomic sequence s(2n)=s(n), s(2n+1)=s(n)+s(n+1)",
        ),
        entry(
            "sum_of_digits_2",
            2,
            Provenance::Basis,
            None,
            "binary digit sum; unipotent matrix pair",
        ),
        entry("identity_n", 2, Provenance::Basis, None, "f(n) = n"),
        entry(
            "const_one_2x2",
            2,
            Provenance::Basis,
            None,
            "constant 1 with A_0 = A_1 = I_2, w = [1,0], v = [1,1]",
        ),
        entry(
            "paper_spanning_3x3",
            3,
            Provenance::Spanning,
            Some("x"),
            "constant 1 with A_0 = A_1 = diag(1,1,x): a spanning-set representation whose JSR is x",
        ),
    ]
}

/// Built-in representation by name. `paper_spanning_3x3` takes the rational
/// parameter `x` (default 2); other entries ignore it.
pub fn catalog(name: &str, x: Option<Scalar>) -> Result<LinearRep> {
    let rep = match name {
        "stern" => LinearRep::new(
            2,
            vec![
                Matrix::from_i64(&[&[1, 0], &[1, 1]]),
                Matrix::from_i64(&[&[1, 1], &[0, 1]]),
            ],
            scalars_from_i64(&[0, 1]),
            scalars_from_i64(&[1, 0]),
            Provenance::Basis,
        )?,
        "sum_of_digits_2" => LinearRep::new(
            2,
            vec![Matrix::identity(2), Matrix::from_i64(&[&[1, 1], &[0, 1]])],
            scalars_from_i64(&[0, 1]),
            scalars_from_i64(&[1, 0]),
            Provenance::Basis,
        )?,
        "identity_n" => LinearRep::new(
            2,
            vec![
                Matrix::from_i64(&[&[2, 0], &[0, 1]]),
                Matrix::from_i64(&[&[2, 1], &[0, 1]]),
            ],
            scalars_from_i64(&[0, 1]),
            scalars_from_i64(&[1, 0]),
            Provenance::Basis,
        )?,
        "const_one_2x2" => LinearRep::new(
            2,
            vec![Matrix::identity(2), Matrix::identity(2)],
            scalars_from_i64(&[1, 1]),
            scalars_from_i64(&[1, 0]),
            Provenance::Basis,
        )?,
        "paper_spanning_3x3" => {
            let x = x.unwrap_or_else(|| Scalar::from(2));
            let b = Matrix::diag(&[Scalar::one(), Scalar::one(), x]);
            LinearRep::new(
                2,
                vec![b.clone(), b],
                scalars_from_i64(&[1, 1, 0]),
                scalars_from_i64(&[1, 0, 0]),
                Provenance::Spanning,
            )?
        }
        other => return Err(Error::UnknownCatalogEntry(other.to_string())),
    };
    Ok(rep.with_name(name))
}
