//! JSON representation files.

use serde::{Deserialize, Serialize};

use super::{LinearRep, Provenance};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Scalar};

/// On-disk layout of a representation. Scalars are JSON integers or
/// lowest-terms `"p/q"` strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepFile {
    pub k: u32,
    pub d: usize,
    pub matrices: Vec<Vec<Vec<Scalar>>>,
    pub v: Vec<Scalar>,
    pub w: Vec<Scalar>,
    #[serde(default)]
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl RepFile {
    pub fn into_rep(self) -> Result<LinearRep> {
        if self.k < 2 {
            return Err(Error::InvalidRadix(self.k));
        }
        if self.matrices.len() != self.k as usize {
            return Err(Error::InvalidRepresentation(format!(
                "\"matrices\" has {} entries but k = {}",
                self.matrices.len(),
                self.k
            )));
        }
        let mut mats = Vec::with_capacity(self.matrices.len());
        for rows in self.matrices {
            if rows.len() != self.d || rows.iter().any(|r| r.len() != self.d) {
                return Err(Error::InvalidRepresentation(format!(
                    "matrix is not {0}x{0}",
                    self.d
                )));
            }
            mats.push(Matrix::from_rows(rows)?);
        }
        if self.v.len() != self.d || self.w.len() != self.d {
            return Err(Error::InvalidRepresentation(format!(
                "v and w must have length {}",
                self.d
            )));
        }
        let rep = LinearRep::new(self.k, mats, self.v, self.w, self.provenance)?;
        Ok(match self.name {
            Some(n) => rep.with_name(n),
            None => rep,
        })
    }
}

impl From<&LinearRep> for RepFile {
    fn from(rep: &LinearRep) -> Self {
        RepFile {
            k: rep.k(),
            d: rep.dim(),
            matrices: rep.mats().iter().map(Matrix::row_vecs).collect(),
            v: rep.v().to_vec(),
            w: rep.w().to_vec(),
            provenance: rep.provenance(),
            name: rep.name().map(String::from),
        }
    }
}

impl LinearRep {
    pub fn from_json(text: &str) -> Result<LinearRep> {
        serde_json::from_str::<RepFile>(text)?.into_rep()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RepFile::from(self)).expect("representation serializes")
    }
}
