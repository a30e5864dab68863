//! Littlewood polynomials: coefficient sequences over {+1, -1}.
//!
//! Every polynomial is stored sign-normalized (leading coefficient `+1`);
//! `-p` has the same roots as `p`, so the normalized family of `2^(n-1)`
//! polynomials covers every root of every Littlewood polynomial with `n`
//! terms. Enumeration walks the free positions `0..n-1` in binary-reflected
//! Gray-code order, so neighbours differ in a single coefficient.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{param, Error, Result};

/// Largest supported term count; sign patterns are packed into one `u32`.
pub const MAX_TERMS: u32 = 32;

/// A sign-normalized Littlewood polynomial `sum a_i z^i` with `a_{n-1} = +1`.
///
/// Bit `i` of the packed pattern is set when `a_i = -1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector {
    n: u32,
    negative: u32,
}

impl SignVector {
    /// Builds a vector from explicit signs, index 0 (constant term) first.
    ///
    /// Any nonzero entries are accepted; the sequence is normalized so the
    /// leading coefficient is `+1`.
    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        let n = signs.len() as u32;
        check_terms(n)?;
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(param("Littlewood coefficients must be +1 or -1"));
        }
        let mut negative = 0u32;
        for (i, &s) in signs.iter().enumerate() {
            if s < 0 {
                negative |= 1 << i;
            }
        }
        Ok(Self::normalized(n, negative))
    }

    /// The vector at position `index` of the Gray-code enumeration.
    pub fn from_index(n: u32, index: u64) -> Result<Self> {
        check_terms(n)?;
        if index >= family_size(n) {
            return Err(param(format!("index {index} out of range for n={n}")));
        }
        Ok(Self { n, negative: gray(index) as u32 })
    }

    fn normalized(n: u32, negative: u32) -> Self {
        let full = mask(n);
        let lead = 1u32 << (n - 1);
        let negative = if negative & lead != 0 { !negative & full } else { negative & full };
        Self { n, negative }
    }

    /// Number of terms (`degree + 1`).
    pub fn terms(&self) -> u32 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.n as usize - 1
    }

    /// Position of this vector in the Gray-code enumeration of its family.
    pub fn index(&self) -> u64 {
        gray_inverse(self.negative as u64)
    }

    /// Packed sign pattern: bit `i` set iff `a_i = -1`.
    pub fn pattern(&self) -> u32 {
        self.negative
    }

    /// Coefficient `a_i` as `+1.0` or `-1.0`.
    pub fn coefficient(&self, i: usize) -> f64 {
        debug_assert!(i < self.n as usize);
        if self.negative >> i & 1 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn signs(&self) -> impl Iterator<Item = i8> + '_ {
        (0..self.n as usize).map(|i| self.coefficient(i) as i8)
    }

    /// Coefficients as floats, constant term first.
    pub fn coefficients(&self) -> Vec<f64> {
        (0..self.n as usize).map(|i| self.coefficient(i)).collect()
    }

    /// `p(z)` by Horner's scheme, highest degree first.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in (0..self.n as usize).rev() {
            acc = acc * z + self.coefficient(i);
        }
        acc
    }

    /// `p(z)` and `p'(z)` in one Horner pass.
    pub fn evaluate_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut value = Complex64::new(0.0, 0.0);
        let mut deriv = Complex64::new(0.0, 0.0);
        for i in (0..self.n as usize).rev() {
            deriv = deriv * z + value;
            value = value * z + self.coefficient(i);
        }
        (value, deriv)
    }

    /// Coefficients in reverse order, renormalized. Roots become `1/z`.
    pub fn reverse(&self) -> Self {
        let n = self.n;
        let reversed = self.negative.reverse_bits() >> (32 - n);
        Self::normalized(n, reversed)
    }

    /// Coefficients of `±p(-z)`, renormalized. Roots become `-z`.
    pub fn negate_variable(&self) -> Self {
        Self::normalized(self.n, self.negative ^ odd_mask(self.n))
    }
}

/// Bits flipped by [`SignVector::negate_variable`] once normalization is
/// folded in: the positions whose parity differs from the leading one.
pub(crate) fn negation_flips(n: u32) -> u32 {
    let odd = odd_mask(n);
    if n.is_multiple_of(2) {
        !odd & mask(n)
    } else {
        odd
    }
}

fn odd_mask(n: u32) -> u32 {
    0xAAAA_AAAA & mask(n)
}

fn mask(n: u32) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

fn gray(index: u64) -> u64 {
    index ^ (index >> 1)
}

fn gray_inverse(mut g: u64) -> u64 {
    let mut shift = 1;
    while shift < 64 {
        g ^= g >> shift;
        shift <<= 1;
    }
    g
}

fn check_terms(n: u32) -> Result<()> {
    if n == 0 || n > MAX_TERMS {
        return Err(param(format!("term count must be in 1..={MAX_TERMS}, got {n}")));
    }
    Ok(())
}

/// Number of normalized polynomials with `n` terms, `2^(n-1)`.
pub fn family_size(n: u32) -> u64 {
    1u64 << (n - 1)
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.signs() {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignVector({self})")
    }
}

impl FromStr for SignVector {
    type Err = Error;

    /// Parses `'+'`/`'-'` text, index 0 first. The typographic minus `−` is
    /// accepted as well.
    fn from_str(s: &str) -> Result<Self> {
        let signs = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' | '\u{2212}' => Ok(-1),
                other => Err(param(format!("unexpected character {other:?} in sign string"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        SignVector::from_signs(&signs)
    }
}

/// Streams the normalized family in Gray-code order.
///
/// Cursors can be restricted to an index range so a family can be split
/// across workers.
#[derive(Clone, Debug)]
pub struct EnumerationCursor {
    n: u32,
    index: u64,
    end: u64,
    current: u32,
}

impl EnumerationCursor {
    pub fn range(n: u32, range: Range<u64>) -> Result<Self> {
        check_terms(n)?;
        let size = family_size(n);
        if range.start > range.end || range.end > size {
            return Err(param(format!("range {range:?} out of bounds for n={n}")));
        }
        Ok(Self { n, index: range.start, end: range.end, current: gray(range.start) as u32 })
    }

    pub fn index(&self) -> u64 {
        self.index
    }
}

impl Iterator for EnumerationCursor {
    type Item = SignVector;

    fn next(&mut self) -> Option<SignVector> {
        if self.index >= self.end {
            return None;
        }
        let out = SignVector { n: self.n, negative: self.current };
        self.index += 1;
        // the next Gray word flips the bit at the lowest set bit of the index
        if self.index < self.end {
            self.current ^= 1 << self.index.trailing_zeros();
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.index) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for EnumerationCursor {}

/// All `2^(n-1)` normalized Littlewood polynomials with `n` terms.
pub fn enumerate(n: u32) -> Result<EnumerationCursor> {
    check_terms(n)?;
    EnumerationCursor::range(n, 0..family_size(n))
}
