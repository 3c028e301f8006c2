use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite word over `{0, …, k−1}`, least-significant digit first.
///
/// As a number, `[i_0, i_1, …, i_s]` is `i_0 + i_1·k + … + i_s·k^s`; as a
/// product it is `A_{i_0}·A_{i_1}·…·A_{i_s}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DigitWord {
    radix: u32,
    digits: Vec<u32>,
}

pub(crate) fn check_radix(k: u32) -> Result<()> {
    if k < 2 {
        Err(Error::InvalidRadix(k))
    } else {
        Ok(())
    }
}

impl DigitWord {
    pub fn new(digits: Vec<u32>, radix: u32) -> Result<Self> {
        check_radix(radix)?;
        if let Some(&d) = digits.iter().find(|&&d| d >= radix) {
            return Err(Error::InvalidDigit { digit: d, radix });
        }
        Ok(DigitWord { radix, digits })
    }

    pub fn empty(radix: u32) -> Self {
        DigitWord {
            radix,
            digits: Vec::new(),
        }
    }

    pub fn radix(&self) -> u32 {
        self.radix
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// `[self]_k`; most-significant zeros do not change the value.
    pub fn value(&self) -> BigUint {
        let k = BigUint::from(self.radix);
        self.digits
            .iter()
            .rev()
            .fold(BigUint::zero(), |acc, &d| acc * &k + d)
    }

    pub fn value_u64(&self) -> Option<u64> {
        self.value().to_u64()
    }

    /// Appends `other` in the more-significant position.
    pub fn concat(&self, other: &DigitWord) -> DigitWord {
        debug_assert_eq!(self.radix, other.radix);
        let mut digits = self.digits.clone();
        digits.extend_from_slice(&other.digits);
        DigitWord {
            radix: self.radix,
            digits,
        }
    }

    pub fn repeat(&self, times: usize) -> DigitWord {
        DigitWord {
            radix: self.radix,
            digits: self.digits.repeat(times),
        }
    }

    /// Pads with most-significant zeros up to `len` digits.
    pub fn padded(&self, len: usize) -> DigitWord {
        let mut digits = self.digits.clone();
        if digits.len() < len {
            digits.resize(len, 0);
        }
        DigitWord {
            radix: self.radix,
            digits,
        }
    }

    /// Cyclic rotation by `shift` positions.
    pub fn rotated(&self, shift: usize) -> DigitWord {
        let mut digits = self.digits.clone();
        if !digits.is_empty() {
            let s = shift % digits.len();
            digits.rotate_left(s);
        }
        DigitWord {
            radix: self.radix,
            digits,
        }
    }

    /// Digit string, least-significant digit first. Radixes above 36 use
    /// comma-separated decimal digits.
    pub fn to_digit_string(&self) -> String {
        if self.radix <= 36 {
            self.digits
                .iter()
                .map(|&d| std::char::from_digit(d, self.radix).unwrap())
                .collect()
        } else {
            self.digits
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(",")
        }
    }

    pub fn parse_digit_string(s: &str, radix: u32) -> Result<Self> {
        check_radix(radix)?;
        let digits = if radix <= 36 {
            s.chars()
                .map(|c| {
                    c.to_digit(radix)
                        .ok_or(Error::InvalidArgument(format!("bad digit {c:?}")))
                })
                .collect::<Result<Vec<_>>>()?
        } else if s.is_empty() {
            Vec::new()
        } else {
            s.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::InvalidArgument(format!("bad digit {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        DigitWord::new(digits, radix)
    }
}

impl fmt::Debug for DigitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}_{}", self.digits, self.radix)
    }
}

impl Serialize for DigitWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_digit_string())
    }
}

/// Base-`k` digits of `n`, least-significant first; `0` maps to the empty word.
pub fn digits(n: u64, k: u32) -> Result<DigitWord> {
    check_radix(k)?;
    let mut out = Vec::new();
    let mut n = n;
    while n > 0 {
        out.push((n % k as u64) as u32);
        n /= k as u64;
    }
    Ok(DigitWord {
        radix: k,
        digits: out,
    })
}

/// Digits of an arbitrary-precision integer.
pub fn digits_big(n: &BigUint, k: u32) -> Result<DigitWord> {
    check_radix(k)?;
    let digits = if n.is_zero() {
        Vec::new()
    } else {
        n.to_radix_le(k).into_iter().map(u32::from).collect()
    };
    Ok(DigitWord { radix: k, digits })
}

/// `[word]_k`.
pub fn word_value(word: &DigitWord) -> BigUint {
    word.value()
}
