//! Linear representations of k-regular sequences.
//!
//! A representation `(k, A_0..A_{k−1}, v, w)` evaluates
//! `f(n) = wᵀ·A_{i_0}·A_{i_1}·…·A_{i_s}·v` where `i_0` is the least
//! significant base-`k` digit of `n`. The empty word (n = 0) gives `wᵀv`.

mod catalog;
mod digits;
mod io;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use catalog::{catalog, catalog_entries, CatalogEntry};
pub use digits::{digits, digits_big, word_value, DigitWord};
pub use io::RepFile;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Basis,
    Spanning,
    #[default]
    Unknown,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Basis => "basis",
            Provenance::Spanning => "spanning",
            Provenance::Unknown => "unknown",
        }
    }
}

/// `(k, d, A_0..A_{k−1}, v, w)` plus a provenance tag.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRep {
    k: u32,
    mats: Vec<Matrix>,
    v: Vec<Scalar>,
    w: Vec<Scalar>,
    provenance: Provenance,
    name: Option<String>,
}

impl LinearRep {
    pub fn new(
        k: u32,
        mats: Vec<Matrix>,
        v: Vec<Scalar>,
        w: Vec<Scalar>,
        provenance: Provenance,
    ) -> Result<Self> {
        digits::check_radix(k)?;
        if mats.len() != k as usize {
            return Err(Error::InvalidRepresentation(format!(
                "expected {k} matrices, found {}",
                mats.len()
            )));
        }
        let d = v.len();
        if d == 0 {
            return Err(Error::InvalidRepresentation(
                "dimension must be at least 1".into(),
            ));
        }
        if w.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: w.len(),
            });
        }
        if let Some(m) = mats.iter().find(|m| m.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.dim(),
            });
        }
        Ok(LinearRep {
            k,
            mats,
            v,
            w,
            provenance,
            name: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn mats(&self) -> &[Matrix] {
        &self.mats
    }

    pub fn v(&self) -> &[Scalar] {
        &self.v
    }

    pub fn w(&self) -> &[Scalar] {
        &self.w
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn is_integer(&self) -> bool {
        self.mats.iter().all(Matrix::is_integer)
            && self.v.iter().all(Scalar::is_integer)
            && self.w.iter().all(Scalar::is_integer)
    }

    /// `A_{i_0}·…·A_{i_s}·x` for the word `[i_0, …, i_s]`.
    pub fn apply_word(&self, word: &DigitWord, x: &[Scalar]) -> Vec<Scalar> {
        word.digits()
            .iter()
            .rev()
            .fold(x.to_vec(), |acc, &i| self.mats[i as usize].mul_vec(&acc))
    }

    /// `yᵀ·A_{i_0}·…·A_{i_s}` for the word `[i_0, …, i_s]`.
    pub fn apply_word_row(&self, y: &[Scalar], word: &DigitWord) -> Vec<Scalar> {
        word.digits()
            .iter()
            .fold(y.to_vec(), |acc, &i| self.mats[i as usize].vec_mul(&acc))
    }

    /// Exact product matrix of a word; the identity for the empty word.
    pub fn word_matrix(&self, word: &DigitWord) -> Matrix {
        word.digits()
            .iter()
            .fold(Matrix::identity(self.dim()), |acc, &i| {
                acc.mul(&self.mats[i as usize]).unwrap()
            })
    }

    /// The state vector `A_{i_0}·…·A_{i_s}·v`; for a basis representation
    /// built from a kernel basis this is `[g_1(n), …, g_d(n)]ᵀ`.
    pub fn state(&self, n: u64) -> Vec<Scalar> {
        self.apply_word(&digits(n, self.k).unwrap(), &self.v)
    }

    pub fn eval_word(&self, word: &DigitWord) -> Scalar {
        dot(&self.w, &self.apply_word(word, &self.v))
    }

    pub fn eval(&self, n: u64) -> Scalar {
        self.eval_word(&digits(n, self.k).unwrap())
    }

    pub fn eval_big(&self, n: &num_bigint::BigUint) -> Scalar {
        self.eval_word(&digits_big(n, self.k).unwrap())
    }

    /// `f(0), …, f(count − 1)`, computed with one matrix-vector product per
    /// term via `state(n) = A_{n mod k}·state(⌊n/k⌋)`.
    pub fn eval_prefix(&self, count: u64) -> Vec<Scalar> {
        if self.is_integer() {
            self.eval_prefix_integer(count)
        } else {
            self.eval_prefix_rational(count)
        }
    }

    fn eval_prefix_rational(&self, count: u64) -> Vec<Scalar> {
        let k = self.k as u64;
        let keep = count.div_ceil(k) as usize;
        let mut states: Vec<Vec<Scalar>> = Vec::with_capacity(keep);
        let mut out = Vec::with_capacity(count as usize);
        for n in 0..count {
            let s = if n == 0 {
                self.v.clone()
            } else {
                self.mats[(n % k) as usize].mul_vec(&states[(n / k) as usize])
            };
            out.push(dot(&self.w, &s));
            if (n as usize) < keep {
                states.push(s);
            }
        }
        out
    }

    fn eval_prefix_integer(&self, count: u64) -> Vec<Scalar> {
        let to_int = |x: &Scalar| x.numer().clone();
        let d = self.dim();
        let mats: Vec<Vec<BigInt>> = self
            .mats
            .iter()
            .map(|m| m.entries().iter().map(to_int).collect())
            .collect();
        let w: Vec<BigInt> = self.w.iter().map(to_int).collect();
        let k = self.k as u64;
        let keep = count.div_ceil(k) as usize;
        let mut states: Vec<Vec<BigInt>> = Vec::with_capacity(keep);
        let mut out = Vec::with_capacity(count as usize);
        for n in 0..count {
            let s: Vec<BigInt> = if n == 0 {
                self.v.iter().map(to_int).collect()
            } else {
                let m = &mats[(n % k) as usize];
                let prev = &states[(n / k) as usize];
                (0..d)
                    .map(|i| {
                        let mut acc = BigInt::default();
                        for (a, x) in m[i * d..(i + 1) * d].iter().zip(prev) {
                            if a.sign() != num_bigint::Sign::NoSign
                                && x.sign() != num_bigint::Sign::NoSign
                            {
                                acc += a * x;
                            }
                        }
                        acc
                    })
                    .collect()
            };
            let mut value = BigInt::default();
            for (a, x) in w.iter().zip(&s) {
                value += a * x;
            }
            out.push(Scalar::from_integer(value));
            if (n as usize) < keep {
                states.push(s);
            }
        }
        out
    }

    /// Checks that padding the digit expansion with most-significant zeros
    /// never changes the value, on `samples` seeded random indices below
    /// `2^16` and pads of one to four zeros. Returns the first offending
    /// index.
    pub fn pad_invariance_violation(&self, samples: usize, seed: u64) -> Option<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut indices: Vec<u64> = vec![0, 1];
        indices.extend((0..samples).map(|_| rng.gen_range(0..1u64 << 16)));
        for n in indices {
            let word = digits(n, self.k).unwrap();
            let plain = self.eval_word(&word);
            for pad in 1..=4 {
                if self.eval_word(&word.padded(word.len() + pad)) != plain {
                    return Some(n);
                }
            }
        }
        None
    }

    /// Basis-provenance guard: the flag must be set and pad invariance must
    /// hold on 64 sampled indices.
    pub fn require_basis(&self) -> Result<()> {
        if self.provenance != Provenance::Basis {
            return Err(Error::NotBasis(format!(
                "provenance is {}",
                self.provenance.as_str()
            )));
        }
        if let Some(n) = self.pad_invariance_violation(64, 0x5eed) {
            return Err(Error::NotBasis(format!(
                "padding changes the value at n = {n}"
            )));
        }
        Ok(())
    }

    /// Representation of `n ↦ f(k^ell·n + r)`.
    ///
    /// The low digits of `k^ell·n + r` are those of `r` padded to `ell`
    /// digits, and they are consumed on the `w` side, so the new row vector
    /// is `wᵀ·A_{r_0}·…·A_{r_{ell−1}}`.
    pub fn kernel_subsequence_rep(&self, ell: u32, r: u64) -> Result<LinearRep> {
        let bound = (self.k as u128).checked_pow(ell).unwrap_or(u128::MAX);
        if r as u128 >= bound {
            return Err(Error::InvalidArgument(format!(
                "r = {r} must be below k^ell"
            )));
        }
        self.require_basis()?;
        let low = digits(r, self.k)?.padded(ell as usize);
        let w = self.apply_word_row(&self.w, &low);
        let mut out = LinearRep::new(
            self.k,
            self.mats.clone(),
            self.v.clone(),
            w,
            Provenance::Spanning,
        )?;
        out.name = self.name.as_ref().map(|n| format!("{n}[{ell},{r}]"));
        Ok(out)
    }
}

/// A prefix of a sequence `f(0), …, f(horizon − 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceOracle {
    terms: Vec<Scalar>,
}

impl SequenceOracle {
    pub fn from_terms(terms: Vec<Scalar>) -> Self {
        SequenceOracle { terms }
    }

    pub fn from_fn(horizon: u64, f: impl FnMut(u64) -> Scalar) -> Self {
        SequenceOracle {
            terms: (0..horizon).map(f).collect(),
        }
    }

    pub fn from_rep(rep: &LinearRep, horizon: u64) -> Self {
        SequenceOracle {
            terms: rep.eval_prefix(horizon),
        }
    }

    pub fn horizon(&self) -> u64 {
        self.terms.len() as u64
    }

    pub fn term(&self, n: u64) -> &Scalar {
        &self.terms[n as usize]
    }

    pub fn terms(&self) -> &[Scalar] {
        &self.terms
    }

    /// Parses one term per line (integers or `p/q`); blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let terms = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::parse)
            .collect::<Result<Vec<Scalar>>>()?;
        Ok(SequenceOracle { terms })
    }
}
