//! Formal words over abstract generator symbols.
//!
//! A [`FormalWord`] is a freely reduced word in symbols `0, 1, 2, …` with
//! integer exponents. They are used as *witness expressions*: a membership
//! answer or a basis element is accompanied by a formal word which, evaluated
//! over the relevant generating set, reproduces the element. Free reduction
//! never changes the evaluated value, so it is always safe to apply.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::word::Word;

/// A freely reduced formal word: adjacent factors use distinct symbols and
/// no exponent is zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormalWord {
    factors: Vec<(usize, BigInt)>,
}

impl FormalWord {
    /// The empty formal word.
    pub fn identity() -> FormalWord {
        FormalWord::default()
    }

    /// The single symbol `sym`.
    pub fn generator(sym: usize) -> FormalWord {
        FormalWord::from_factors([(sym, BigInt::one())])
    }

    /// `sym^exp`.
    pub fn power(sym: usize, exp: BigInt) -> FormalWord {
        FormalWord::from_factors([(sym, exp)])
    }

    /// Builds a formal word with free reduction.
    pub fn from_factors<I: IntoIterator<Item = (usize, BigInt)>>(factors: I) -> FormalWord {
        let mut out: Vec<(usize, BigInt)> = Vec::new();
        for (sym, exp) in factors {
            if exp.is_zero() {
                continue;
            }
            match out.last_mut() {
                Some((top, top_exp)) if *top == sym => {
                    *top_exp += exp;
                    if top_exp.is_zero() {
                        out.pop();
                    }
                }
                _ => out.push((sym, exp)),
            }
        }
        FormalWord { factors: out }
    }

    pub fn factors(&self) -> &[(usize, BigInt)] {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn inverse(&self) -> FormalWord {
        FormalWord::from_factors(self.factors.iter().rev().map(|(s, e)| (*s, -e)))
    }

    pub fn concat(&self, other: &FormalWord) -> FormalWord {
        FormalWord::from_factors(self.factors.iter().chain(other.factors.iter()).cloned())
    }

    /// Concatenation of several formal words.
    pub fn concat_all<'a, I: IntoIterator<Item = &'a FormalWord>>(words: I) -> FormalWord {
        let mut factors = Vec::new();
        for w in words {
            factors.extend(w.factors.iter().cloned());
        }
        FormalWord::from_factors(factors)
    }

    /// The conjugate `self · other · self⁻¹`.
    pub fn conjugate(&self, other: &FormalWord) -> FormalWord {
        self.concat(other).concat(&self.inverse())
    }

    /// `self^exp`. Single-factor words stay symbolic; longer words are
    /// expanded, which requires a machine-sized exponent.
    pub fn pow(&self, exp: &BigInt) -> FormalWord {
        if exp.is_zero() || self.factors.is_empty() {
            return FormalWord::identity();
        }
        if self.factors.len() == 1 {
            let (sym, e) = &self.factors[0];
            return FormalWord::power(*sym, e * exp);
        }
        let n: u64 = exp
            .abs()
            .try_into()
            .unwrap_or_else(|_| panic!("formal power too large to expand"));
        let base = if exp.is_negative() {
            self.inverse()
        } else {
            self.clone()
        };
        let mut factors = Vec::new();
        for _ in 0..n {
            factors.extend(base.factors.iter().cloned());
        }
        FormalWord::from_factors(factors)
    }

    /// Replaces every symbol by a formal word.
    pub fn substitute<F: Fn(usize) -> FormalWord>(&self, map: F) -> FormalWord {
        let mut out = FormalWord::identity();
        for (sym, exp) in &self.factors {
            out = out.concat(&map(*sym).pow(exp));
        }
        out
    }

    /// Shifts every symbol index by `offset`.
    pub fn shift(&self, offset: usize) -> FormalWord {
        FormalWord {
            factors: self
                .factors
                .iter()
                .map(|(s, e)| (s + offset, e.clone()))
                .collect(),
        }
    }

    /// Evaluates the word over concrete group words (no normalisation; the
    /// caller canonicalises in the relevant ambient).
    pub fn evaluate(&self, gens: &[Word]) -> Word {
        let mut out = Word::identity();
        for (sym, exp) in &self.factors {
            let g = &gens[*sym];
            let part = if g.letters().len() == 1 {
                // A power of a single letter stays short no matter the
                // exponent.
                let l = &g.letters()[0];
                Word::power(l.vertex, &l.exp * exp)
            } else {
                let n: u64 = exp
                    .abs()
                    .try_into()
                    .unwrap_or_else(|_| panic!("witness exponent too large to expand"));
                let base = if exp.is_negative() { g.inverse() } else { g.clone() };
                let mut acc = Word::identity();
                for _ in 0..n {
                    acc = acc.concat(&base);
                }
                acc
            };
            out = out.concat(&part);
        }
        out
    }

    /// Exponent sums per symbol, over a symbol space of the given size.
    pub fn abelianization(&self, num_symbols: usize) -> Vec<BigInt> {
        let mut out = alloc::vec![BigInt::zero(); num_symbols];
        for (sym, exp) in &self.factors {
            out[*sym] += exp;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fw(parts: &[(usize, i64)]) -> FormalWord {
        FormalWord::from_factors(parts.iter().map(|&(s, e)| (s, BigInt::from(e))))
    }

    #[test]
    fn free_reduction() {
        assert_eq!(fw(&[(0, 1), (0, -1)]), FormalWord::identity());
        assert_eq!(fw(&[(0, 1), (1, 2), (1, -2), (0, 1)]), fw(&[(0, 2)]));
    }

    #[test]
    fn inverse_and_concat() {
        let w = fw(&[(0, 1), (1, -2)]);
        assert!(w.concat(&w.inverse()).is_identity());
        assert_eq!(w.inverse(), fw(&[(1, 2), (0, -1)]));
    }

    #[test]
    fn substitution() {
        let w = fw(&[(0, 2), (1, -1)]);
        let sub = w.substitute(|s| if s == 0 { fw(&[(5, 1)]) } else { fw(&[(6, 1), (7, 1)]) });
        assert_eq!(sub, fw(&[(5, 2), (7, -1), (6, -1)]));
    }

    #[test]
    fn evaluation() {
        use crate::word::Letter;
        let a = Word::generator(0);
        let b = Word::from_letters([
            Letter { vertex: 1, exp: BigInt::one() },
            Letter { vertex: 2, exp: BigInt::one() },
        ]);
        let w = fw(&[(0, 3), (1, -1)]);
        let v = w.evaluate(&[a, b]);
        // a^3 (bc)^-1 = a^3 c^-1 b^-1.
        assert_eq!(
            v,
            Word::from_letters([
                Letter { vertex: 0, exp: BigInt::from(3) },
                Letter { vertex: 2, exp: BigInt::from(-1) },
                Letter { vertex: 1, exp: BigInt::from(-1) },
            ])
        );
    }
}
