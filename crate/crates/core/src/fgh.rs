//! The fast-growing hierarchy as a recursion along ω.
//!
//! `F₀(m) = m + 1` and `F_{k+1}(m) = F_k^{(m)}(m)`. Level `k` of the family
//! holds the graph of `F_k` as Cantor codes `pair(m, F_k(m))`. The base
//! predicates at level `k ≥ 1` read chains `m = m₀ → m₁ → … → m_m` off the
//! 1-entries at level `k − 1`:
//!
//! * `φ₀(pair(m, r), k, f)`: some complete chain ends at `r`;
//! * `ψ₀(pair(m, r), k, f)`: some complete chain ends somewhere else.
//!
//! Both only look at 1-entries, so they are monotone. They agree with the
//! true graph when level `k − 1` of `f` is the graph of a total function on
//! the chain, and may both fail otherwise.

use std::collections::BTreeSet;

use rustc_hash::FxHashMap as HashMap;
use std::sync::Arc;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::etr::Instance;
use crate::pairing;
use crate::partialfn::FinitePartialFn;
use crate::predicate::{probe, BasePredicatePair, SearchOutcome, SetOracle, Side};
use crate::verdict::Fuel;
use crate::wellorder::WellOrder;

/// Graph code of `(m, n)`; `None` if it overflows.
pub fn pair_code(m: u64, n: u64) -> Option<u64> {
    pairing::pair(m, n)
}

/// Inverse of [`pair_code`]. Cantor pairing is onto, so every code is valid.
pub fn unpair(code: u64) -> (u64, u64) {
    pairing::unpair(code)
}

/// Endpoints of all complete chains of length `steps` from `start`, using
/// the 1-entries of `f` at element `level` as edges.
pub fn chain_ends(f: &FinitePartialFn, level: u64, start: u64, steps: u64) -> BTreeSet<u64> {
    let mut succ: HashMap<u64, Vec<u64>> = HashMap::default();
    for k in f.ones() {
        let (idx, payload) = pairing::split_key(k);
        if idx == level {
            let (a, b) = pairing::unpair(payload);
            succ.entry(a).or_default().push(b);
        }
    }
    let step = |cur: &BTreeSet<u64>| -> BTreeSet<u64> {
        cur.iter().flat_map(|a| succ.get(a).into_iter().flatten().copied()).collect()
    };

    let mut cur = BTreeSet::from([start]);
    let mut seen: HashMap<BTreeSet<u64>, u64> = HashMap::default();
    let mut i = 0;
    while i < steps {
        if cur.is_empty() {
            return cur;
        }
        if let Some(&j) = seen.get(&cur) {
            // the sequence of frontiers is periodic from here on
            let left = (steps - i) % (i - j);
            for _ in 0..left {
                cur = step(&cur);
            }
            return cur;
        }
        seen.insert(cur.clone(), i);
        cur = step(&cur);
        i += 1;
    }
    cur
}

pub fn fgh_phi0(n: u64, k: u64, f: &FinitePartialFn) -> bool {
    let (m, r) = unpair(n);
    if k == 0 {
        return m.checked_add(1) == Some(r);
    }
    chain_ends(f, k - 1, m, m).contains(&r)
}

pub fn fgh_psi0(n: u64, k: u64, f: &FinitePartialFn) -> bool {
    let (m, r) = unpair(n);
    if k == 0 {
        return m.checked_add(1) != Some(r);
    }
    chain_ends(f, k - 1, m, m).iter().any(|&e| e != r)
}

/// The fast-growing hierarchy pair.
///
/// Its search follows chains through the oracle: from each chain node `a` it
/// probes `(k − 1, pair(a, b))` for `b` below a stage bound that doubles
/// until a chain of the right kind appears. Every chain whose values fit
/// under some bound is eventually found, so the search is complete.
#[derive(Debug, Clone, Copy, Default)]
pub struct FghPair;

impl BasePredicatePair for FghPair {
    fn name(&self) -> &str {
        "fgh"
    }

    fn holds(&self, side: Side, n: u64, x: u64, f: &FinitePartialFn) -> bool {
        match side {
            Side::Phi => fgh_phi0(n, x, f),
            Side::Psi => fgh_psi0(n, x, f),
        }
    }

    fn positive_only(&self) -> bool {
        true
    }

    fn search(
        &self,
        side: Side,
        n: u64,
        x: u64,
        oracle: &mut dyn SetOracle,
        fuel: &mut Fuel,
    ) -> Result<SearchOutcome> {
        chain_search(self, side, n, x, oracle, fuel)
    }
}

fn chain_search(
    pair: &dyn BasePredicatePair,
    side: Side,
    n: u64,
    x: u64,
    oracle: &mut dyn SetOracle,
    fuel: &mut Fuel,
) -> Result<SearchOutcome> {
    if !fuel.tick() {
        return Ok(SearchOutcome::Exhausted);
    }
    if pair.holds(side, n, x, &FinitePartialFn::empty()) {
        return Ok(SearchOutcome::Found(FinitePartialFn::empty()));
    }
    if x == 0 {
        // level 0 reads no oracle entries; nothing more can turn up
        fuel.exhaust();
        return Ok(SearchOutcome::Exhausted);
    }
    let level = x - 1;
    let (m, _) = unpair(n);
    // rows[a][b] is the oracle's answer at (level, pair(a, b))
    let mut rows: HashMap<u64, Vec<bool>> = HashMap::default();
    let mut bound = 1u64;
    loop {
        let mut found = FinitePartialFn::empty();
        let mut frontier = BTreeSet::from([m]);
        for _ in 0..m {
            let mut next = BTreeSet::new();
            for &a in &frontier {
                let row = rows.entry(a).or_default();
                while (row.len() as u64) < bound {
                    let b = row.len() as u64;
                    let Some(k) = pairing::pair(a, b).and_then(|p| pairing::key(level, p)) else {
                        break;
                    };
                    match probe(oracle, k, fuel)? {
                        Some(bit) => row.push(bit),
                        None => return Ok(SearchOutcome::Exhausted),
                    }
                }
                for (b, _) in row.iter().enumerate().filter(|(_, bit)| **bit) {
                    let b = b as u64;
                    let k = pairing::pair(a, b).and_then(|p| pairing::key(level, p)).expect("probed key");
                    found.insert(k, true)?;
                    next.insert(b);
                }
            }
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }
        if !fuel.tick() {
            return Ok(SearchOutcome::Exhausted);
        }
        if pair.holds(side, n, x, &found) {
            return Ok(SearchOutcome::Found(found));
        }
        bound = bound.saturating_mul(2);
    }
}

/// `ψ₀ := φ₀`: a pair whose premise fails at the first true fact.
#[derive(Debug, Clone, Copy, Default)]
pub struct BrokenFghPair;

impl BasePredicatePair for BrokenFghPair {
    fn name(&self) -> &str {
        "fgh-broken"
    }

    fn holds(&self, _side: Side, n: u64, x: u64, f: &FinitePartialFn) -> bool {
        fgh_phi0(n, x, f)
    }

    fn positive_only(&self) -> bool {
        true
    }

    fn search(
        &self,
        _side: Side,
        n: u64,
        x: u64,
        oracle: &mut dyn SetOracle,
        fuel: &mut Fuel,
    ) -> Result<SearchOutcome> {
        chain_search(self, Side::Phi, n, x, oracle, fuel)
    }
}

/// The hierarchy as an instance over ω.
pub fn fgh_instance() -> Instance {
    Instance::new(WellOrder::omega(), Arc::new(FghPair), "fgh")
}

pub fn broken_instance() -> Instance {
    Instance::new(WellOrder::omega(), Arc::new(BrokenFghPair), "fgh-broken")
}

/// Evaluates `F_k(m)` by the defining clauses, one step per application of
/// `F₀`.
pub fn direct_f(k: u64, m: u64, step_budget: u64) -> Result<BigUint> {
    let mut steps = 0u64;
    apply(k, BigUint::from(m), &mut steps, step_budget)
}

fn apply(k: u64, m: BigUint, steps: &mut u64, budget: u64) -> Result<BigUint> {
    if k == 0 {
        *steps += 1;
        if *steps > budget {
            return Err(Error::BudgetExhausted { budget });
        }
        return Ok(m + 1u32);
    }
    let mut value = m.clone();
    let mut i = BigUint::default();
    while i < m {
        value = apply(k - 1, value, steps, budget)?;
        i += 1u32;
    }
    Ok(value)
}

/// `F_k(m)` as a `u64`, when it fits and the budget allows.
pub fn direct_f_u64(k: u64, m: u64, step_budget: u64) -> Option<u64> {
    direct_f(k, m, step_budget).ok().and_then(|v| u64::try_from(v).ok())
}
