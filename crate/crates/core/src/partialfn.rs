//! Finite partial functions `ℕ ⇀ {0, 1}`.
//!
//! Keys are Cantor codes of `(element, payload)` pairs. The canonical code of
//! a function is base 3: digit `k` is 0 when key `k` is undefined, 1 when it
//! maps to bit 0 and 2 when it maps to bit 1. This is a bijection between
//! naturals and finite partial functions, so enumerating all of them is a
//! single counter.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::pairing;
use crate::wellorder::WellOrder;

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinitePartialFn {
    entries: BTreeMap<u64, bool>,
}

impl fmt::Debug for FinitePartialFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, b)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let (x, n) = pairing::split_key(*k);
            write!(f, "({x},{n})↦{}", u8::from(*b))?;
        }
        f.write_str("}")
    }
}

impl FromIterator<(u64, bool)> for FinitePartialFn {
    /// Later entries overwrite earlier ones.
    fn from_iter<I: IntoIterator<Item = (u64, bool)>>(iter: I) -> Self {
        FinitePartialFn { entries: iter.into_iter().collect() }
    }
}

impl FinitePartialFn {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn get(&self, key: u64) -> Option<bool> {
        self.entries.get(&key).copied()
    }

    pub fn contains_key(&self, key: u64) -> bool {
        self.entries.contains_key(&key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in ascending key order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, bool)> + '_ {
        self.entries.iter().map(|(k, b)| (*k, *b))
    }

    pub fn keys(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.keys().copied()
    }

    /// Keys mapped to 1.
    pub fn ones(&self) -> impl Iterator<Item = u64> + '_ {
        self.iter().filter(|(_, b)| *b).map(|(k, _)| k)
    }

    pub fn max_key(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    /// Adds an entry, failing if the key already carries the other bit.
    pub fn insert(&mut self, key: u64, bit: bool) -> Result<()> {
        match self.entries.get(&key) {
            Some(old) if *old != bit => Err(Error::IncompatibleEntries { key }),
            _ => {
                self.entries.insert(key, bit);
                Ok(())
            }
        }
    }

    pub fn with(mut self, key: u64, bit: bool) -> Result<Self> {
        self.insert(key, bit)?;
        Ok(self)
    }

    pub fn remove(&mut self, key: u64) -> Option<bool> {
        self.entries.remove(&key)
    }

    /// `self ⪯ other`: the graph of `self` is contained in that of `other`.
    pub fn leq(&self, other: &FinitePartialFn) -> bool {
        self.len() <= other.len() && self.iter().all(|(k, b)| other.get(k) == Some(b))
    }

    /// `self ⪯ Z` where `Z` is a total set given by its membership test.
    pub fn leq_set(&self, set: impl Fn(u64) -> bool) -> bool {
        self.iter().all(|(k, b)| set(k) == b)
    }

    /// The first key on which the two functions disagree.
    pub fn conflict(&self, other: &FinitePartialFn) -> Option<u64> {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.iter().find(|&(k, b)| large.get(k) == Some(!b)).map(|(k, _)| k)
    }

    pub fn compatible(&self, other: &FinitePartialFn) -> bool {
        self.conflict(other).is_none()
    }

    pub fn union(&self, other: &FinitePartialFn) -> Result<FinitePartialFn> {
        if let Some(key) = self.conflict(other) {
            return Err(Error::IncompatibleEntries { key });
        }
        let mut out = self.clone();
        out.entries.extend(other.iter());
        Ok(out)
    }

    /// Only the entries mapped to 1.
    pub fn positive_part(&self) -> FinitePartialFn {
        self.iter().filter(|(_, b)| *b).collect()
    }

    /// `f↾x`: entries whose key decodes to `(x', n)` with `x' ∈ X`, `x' < x`.
    pub fn restrict_below(&self, order: &WellOrder, x: u64) -> Result<FinitePartialFn> {
        if !order.contains(x) {
            return Err(Error::NotAMember { x });
        }
        Ok(self.restrict_below_unchecked(order, x))
    }

    pub(crate) fn restrict_below_unchecked(&self, order: &WellOrder, x: u64) -> FinitePartialFn {
        self.iter()
            .filter(|(k, _)| order.less(pairing::split_key(*k).0, x))
            .collect()
    }

    /// Whether `self` is an `x`-extension of `base`: `base ⪯ self`, and every
    /// new entry sits at an index `x' ≥ x` or outside the order and maps to 0.
    pub fn is_x_extension_of(&self, base: &FinitePartialFn, order: &WellOrder, x: u64) -> bool {
        base.leq(self)
            && self
                .iter()
                .filter(|(k, _)| !base.contains_key(*k))
                .all(|(k, b)| !b && outside_or_at_least(order, pairing::split_key(k).0, x))
    }

    /// Base-3 canonical code.
    pub fn encode(&self) -> BigUint {
        let Some(max) = self.max_key() else {
            return BigUint::default();
        };
        let mut digits = vec![0u8; max as usize + 1];
        for (k, b) in self.iter() {
            digits[k as usize] = if b { 2 } else { 1 };
        }
        // from_radix_le wants least significant digit first
        BigUint::from_radix_le(&digits, 3).expect("base-3 digits")
    }

    /// Canonical code when it fits in a `u64`.
    pub fn encode_u64(&self) -> Option<u64> {
        u64::try_from(self.encode()).ok()
    }

    pub fn decode(mut code: u64) -> FinitePartialFn {
        let mut out = FinitePartialFn::empty();
        let mut k = 0;
        while code > 0 {
            match code % 3 {
                1 => {
                    out.entries.insert(k, false);
                }
                2 => {
                    out.entries.insert(k, true);
                }
                _ => {}
            }
            code /= 3;
            k += 1;
        }
        out
    }

    pub fn decode_big(code: &BigUint) -> FinitePartialFn {
        code.to_radix_le(3)
            .into_iter()
            .enumerate()
            .filter(|(_, d)| *d != 0)
            .map(|(k, d)| (k as u64, d == 2))
            .collect()
    }
}

/// `x ≤ x'` in the order, or `x'` not in the order at all.
pub(crate) fn outside_or_at_least(order: &WellOrder, index: u64, x: u64) -> bool {
    !order.contains(index) || order.leq(x, index)
}
