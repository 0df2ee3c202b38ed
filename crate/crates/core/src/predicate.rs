//! Σ⁰₁ formulas through their Kleene normal forms.
//!
//! A formula `φ(n, x, Z)` is represented by a decidable base predicate
//! `φ₀(n, x, f)` on finite partial functions, with
//! `φ(n, x, Z) ⟺ ∃f ⪯ Z. φ₀(n, x, f)`. Base predicates must be monotone in
//! `f`; [`check_monotone`] samples for violations.
//!
//! Evaluating `φ` against a set means searching for a finite witness below
//! it. That search is a method of [`BasePredicatePair`] so that an instance
//! can direct its oracle probes at the keys that matter instead of scanning
//! all keys in order. The default is the generic prefix scan.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::pairing;
use crate::partialfn::FinitePartialFn;
use crate::verdict::{Fuel, Verdict};
use crate::wellorder::WellOrder;

/// Which formula of the pair: `φ` (membership) or `ψ` (non-membership).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Phi,
    Psi,
}

impl Side {
    pub fn bit(self) -> bool {
        self == Side::Phi
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Side::Phi
        } else {
            Side::Psi
        }
    }

    pub fn other(self) -> Self {
        Self::from_bit(!self.bit())
    }
}

/// A set `Z ⊆ ℕ` queried one key at a time.
pub trait SetOracle {
    /// `Some(bit)` if `key ∈ Z` was decided, `None` if the answer could not
    /// be determined within `fuel`.
    fn lookup(&mut self, key: u64, fuel: &mut Fuel) -> Result<Option<bool>>;
}

/// A total set given by a membership function.
pub struct SetFn<F>(pub F);

impl<F: FnMut(u64) -> bool> SetOracle for SetFn<F> {
    fn lookup(&mut self, key: u64, _fuel: &mut Fuel) -> Result<Option<bool>> {
        Ok(Some((self.0)(key)))
    }
}

/// Probes `key`, paying one unit of fuel for the probe itself.
pub fn probe(oracle: &mut dyn SetOracle, key: u64, fuel: &mut Fuel) -> Result<Option<bool>> {
    if !fuel.tick() {
        return Ok(None);
    }
    oracle.lookup(key, fuel)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    /// A function below the oracle set on which the base predicate holds.
    Found(FinitePartialFn),
    Exhausted,
}

/// Extension search result: see [`BasePredicatePair::extension_witness`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtensionSearch {
    Found(FinitePartialFn),
    /// No extension of the allowed shape satisfies the predicate.
    NoneExists,
    Exhausted,
}

/// The pair `(φ₀, ψ₀)` of base predicates defining one recursion.
pub trait BasePredicatePair: Send + Sync {
    fn name(&self) -> &str;

    /// `φ₀(n, x, f)` or `ψ₀(n, x, f)`. Must be total and monotone in `f`.
    fn holds(&self, side: Side, n: u64, x: u64, f: &FinitePartialFn) -> bool;

    /// True when both predicates only look at the 1-entries of `f`. This
    /// makes searches over 0-bit extensions decidable and lets `φ` be decided
    /// outright on explicit finite sets.
    fn positive_only(&self) -> bool {
        false
    }

    /// Searches for `f ⪯ Z` with `side`'s base predicate true at `(n, x)`.
    ///
    /// The result must be built from probed answers only. The default scans
    /// keys `0, 1, 2, …`, testing the predicate on each prefix of `Z`, which
    /// by monotonicity finds a witness whenever one exists.
    fn search(
        &self,
        side: Side,
        n: u64,
        x: u64,
        oracle: &mut dyn SetOracle,
        fuel: &mut Fuel,
    ) -> Result<SearchOutcome> {
        let mut prefix = FinitePartialFn::empty();
        let mut next = 0u64;
        loop {
            if !fuel.tick() {
                return Ok(SearchOutcome::Exhausted);
            }
            if self.holds(side, n, x, &prefix) {
                return Ok(SearchOutcome::Found(prefix));
            }
            match probe(oracle, next, fuel)? {
                Some(bit) => prefix.insert(next, bit)?,
                None => return Ok(SearchOutcome::Exhausted),
            }
            next += 1;
        }
    }

    /// Searches for an extension `h ⊇ base` adding only 0-bits at keys for
    /// which `eligible` holds, with `side`'s predicate true at `(n, x)`.
    ///
    /// The default adds eligible keys in ascending order, one per unit of
    /// fuel; positive-only pairs answer immediately.
    fn extension_witness(
        &self,
        side: Side,
        n: u64,
        x: u64,
        base: &FinitePartialFn,
        eligible: &dyn Fn(u64) -> bool,
        fuel: &mut Fuel,
    ) -> ExtensionSearch {
        if self.positive_only() {
            if !fuel.tick() {
                return ExtensionSearch::Exhausted;
            }
            return if self.holds(side, n, x, base) {
                ExtensionSearch::Found(base.clone())
            } else {
                ExtensionSearch::NoneExists
            };
        }
        let mut h = base.clone();
        let mut next = 0u64;
        loop {
            if !fuel.tick() {
                return ExtensionSearch::Exhausted;
            }
            if self.holds(side, n, x, &h) {
                return ExtensionSearch::Found(h);
            }
            while h.contains_key(next) || !eligible(next) {
                next += 1;
            }
            h.insert(next, false).expect("fresh key");
            next += 1;
        }
    }
}

impl fmt::Debug for dyn BasePredicatePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BasePredicatePair({})", self.name())
    }
}

/// A pair given by two closures. Neither search hook is overridden.
pub struct FnPair<P, Q> {
    name: String,
    phi0: P,
    psi0: Q,
}

impl<P, Q> FnPair<P, Q>
where
    P: Fn(u64, u64, &FinitePartialFn) -> bool + Send + Sync,
    Q: Fn(u64, u64, &FinitePartialFn) -> bool + Send + Sync,
{
    pub fn new(name: impl Into<String>, phi0: P, psi0: Q) -> Self {
        FnPair { name: name.into(), phi0, psi0 }
    }
}

impl<P, Q> BasePredicatePair for FnPair<P, Q>
where
    P: Fn(u64, u64, &FinitePartialFn) -> bool + Send + Sync,
    Q: Fn(u64, u64, &FinitePartialFn) -> bool + Send + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn holds(&self, side: Side, n: u64, x: u64, f: &FinitePartialFn) -> bool {
        match side {
            Side::Phi => (self.phi0)(n, x, f),
            Side::Psi => (self.psi0)(n, x, f),
        }
    }
}

/// A pair that is not monotone: `φ₀` holds when `f` has an even number of
/// entries, `ψ₀` when the number is odd. Useful only as a negative example.
pub fn parity_pair() -> impl BasePredicatePair {
    FnPair::new(
        "parity",
        |_n: u64, _x: u64, f: &FinitePartialFn| f.len().is_multiple_of(2),
        |_n: u64, _x: u64, f: &FinitePartialFn| f.len() % 2 == 1,
    )
}

/// Drops entries from a witness, highest key first, while the predicate
/// still holds. The result is the least-coded witness among the subsets of
/// `witness`. `None` if fuel runs out.
pub fn minimize_witness(
    pair: &dyn BasePredicatePair,
    side: Side,
    n: u64,
    x: u64,
    witness: FinitePartialFn,
    fuel: &mut Fuel,
) -> Option<FinitePartialFn> {
    let mut current = witness;
    let keys: Vec<u64> = current.keys().collect();
    for k in keys.into_iter().rev() {
        if !fuel.tick() {
            return None;
        }
        let bit = current.remove(k).expect("present");
        if !pair.holds(side, n, x, &current) {
            current.insert(k, bit).expect("restoring");
        }
    }
    Some(current)
}

/// Evaluates `φ(n, x, Z)` (or `ψ`) by witness search. Never answers `No`: a
/// Σ⁰₁ statement has no finite refutation in general.
pub fn sigma1_eval(
    side: Side,
    pair: &dyn BasePredicatePair,
    n: u64,
    x: u64,
    oracle: &mut dyn SetOracle,
    fuel: &mut Fuel,
) -> Result<Verdict<FinitePartialFn>> {
    match pair.search(side, n, x, oracle, fuel)? {
        SearchOutcome::Found(g) => Ok(match minimize_witness(pair, side, n, x, g, fuel) {
            Some(w) => Verdict::Yes(w),
            None => Verdict::Unknown,
        }),
        SearchOutcome::Exhausted => Ok(Verdict::Unknown),
    }
}

/// Witnesses found for the two sides at the first dovetailing stage where
/// either search succeeded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dovetailed {
    pub phi: Option<FinitePartialFn>,
    pub psi: Option<FinitePartialFn>,
}

/// Runs the `φ` and `ψ` searches alternately with budgets 1, 2, 4, … until
/// one of them succeeds. At that stage both sides have been run with the
/// same budget, so a double witness is always reported. `None` when fuel
/// runs out first.
pub fn dovetail(
    pair: &dyn BasePredicatePair,
    n: u64,
    x: u64,
    oracle: &mut dyn SetOracle,
    fuel: &mut Fuel,
) -> Result<Option<Dovetailed>> {
    let mut stage = 1u64;
    loop {
        if fuel.is_empty() {
            return Ok(None);
        }
        let last = stage >= fuel.left();
        let phi = fuel.with_budget(stage, |f| sigma1_eval(Side::Phi, pair, n, x, oracle, f))?;
        let psi = fuel.with_budget(stage, |f| sigma1_eval(Side::Psi, pair, n, x, oracle, f))?;
        if phi.is_yes() || psi.is_yes() {
            let take = |v: Verdict<FinitePartialFn>| match v {
                Verdict::Yes(w) => Some(w),
                _ => None,
            };
            return Ok(Some(Dovetailed { phi: take(phi), psi: take(psi) }));
        }
        if last {
            return Ok(None);
        }
        stage = stage.saturating_mul(2);
    }
}

/// A finite family `Y` given explicitly on a window: the listed elements and
/// payloads below `bound`. Everything outside the stored keys is absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitFamily {
    elements: BTreeSet<u64>,
    bound: u64,
    keys: BTreeSet<u64>,
}

impl ExplicitFamily {
    pub fn new(elements: impl IntoIterator<Item = u64>, bound: u64) -> Self {
        ExplicitFamily { elements: elements.into_iter().collect(), bound, keys: BTreeSet::new() }
    }

    pub fn elements(&self) -> &BTreeSet<u64> {
        &self.elements
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Adds `(x, n)`. Returns false, changing nothing, outside the window.
    pub fn insert(&mut self, x: u64, n: u64) -> bool {
        if !self.elements.contains(&x) || n >= self.bound {
            return false;
        }
        match pairing::key(x, n) {
            Some(k) => {
                self.keys.insert(k);
                true
            }
            None => false,
        }
    }

    pub fn remove(&mut self, x: u64, n: u64) -> bool {
        pairing::key(x, n).is_some_and(|k| self.keys.remove(&k))
    }

    /// Flips membership of `(x, n)`.
    pub fn toggle(&mut self, x: u64, n: u64) {
        if !self.remove(x, n) {
            self.insert(x, n);
        }
    }

    pub fn contains(&self, x: u64, n: u64) -> bool {
        pairing::key(x, n).is_some_and(|k| self.keys.contains(&k))
    }

    pub fn keys(&self) -> &BTreeSet<u64> {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// The section `Y_x`.
    pub fn section(&self, x: u64) -> BTreeSet<u64> {
        self.keys
            .iter()
            .map(|k| pairing::split_key(*k))
            .filter(|(i, _)| *i == x)
            .map(|(_, n)| n)
            .collect()
    }

    /// Keys of `Y^x`: members with index below `x` in `order`.
    pub fn below(&self, order: &WellOrder, x: u64) -> BTreeSet<u64> {
        self.keys
            .iter()
            .copied()
            .filter(|k| order.less(pairing::split_key(*k).0, x))
            .collect()
    }

    /// The whole family as a total set.
    pub fn oracle(&self) -> SetFn<impl FnMut(u64) -> bool + '_> {
        SetFn(move |k| self.keys.contains(&k))
    }
}

/// The finite set `keys` as a function mapping each of them to 1.
fn ones(keys: &BTreeSet<u64>) -> FinitePartialFn {
    keys.iter().map(|k| (*k, true)).collect()
}

/// Checks `H_φ(X, Y)` on the window of `family`: for each listed element
/// `x ∈ X` and `n < bound`, `(x, n) ∈ Y ⟺ φ(n, x, Y^x)`. Stored keys whose
/// element is outside `X` are mismatches too.
///
/// `Yes` carries the number of checked pairs, `No` the first mismatching key.
/// For positive-only pairs `φ` is decided on the finite set directly;
/// otherwise an absent key whose `φ` search fails stays `Unknown`.
pub fn h_condition_check(
    pair: &dyn BasePredicatePair,
    order: &WellOrder,
    family: &ExplicitFamily,
    fuel: &mut Fuel,
) -> Result<Verdict<u64>> {
    if let Some(k) = family.keys().iter().find(|k| !order.contains(pairing::split_key(**k).0)) {
        return Ok(Verdict::No(*k));
    }
    let mut elements: Vec<u64> = family.elements().iter().copied().filter(|x| order.contains(*x)).collect();
    elements.sort_by(|a, b| order_cmp(order, *a, *b));

    let mut checked = 0u64;
    let mut undecided = false;
    for x in elements {
        let below = family.below(order, x);
        let below_fn = ones(&below);
        for n in 0..family.bound() {
            let Some(k) = pairing::key(x, n) else { continue };
            let phi = if pair.positive_only() {
                fuel.tick().then(|| pair.holds(Side::Phi, n, x, &below_fn))
            } else {
                let mut oracle = SetFn(|q: u64| below.contains(&q));
                match sigma1_eval(Side::Phi, pair, n, x, &mut oracle, fuel)? {
                    Verdict::Yes(_) => Some(true),
                    _ => None,
                }
            };
            match (family.keys().contains(&k), phi) {
                (true, Some(false)) | (false, Some(true)) => return Ok(Verdict::No(k)),
                (_, None) => undecided = true,
                _ => checked += 1,
            }
        }
    }
    Ok(if undecided { Verdict::Unknown } else { Verdict::Yes(checked) })
}

fn order_cmp(order: &WellOrder, a: u64, b: u64) -> std::cmp::Ordering {
    if a == b {
        std::cmp::Ordering::Equal
    } else if order.less(a, b) {
        std::cmp::Ordering::Less
    } else {
        std::cmp::Ordering::Greater
    }
}

/// Why a premise check came out true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PremiseHolds {
    /// `H_φ(X↾x, Z)` failed at this key, so the implication holds vacuously.
    Vacuous { counterexample: u64 },
    /// The antecedent held and every payload below the bound got exactly one
    /// of `φ`, `ψ`.
    Verified { payloads: u64 },
}

/// A payload where `φ` and `ψ` both hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PremiseViolated {
    pub n: u64,
    pub phi_witness: FinitePartialFn,
    pub psi_witness: FinitePartialFn,
}

/// Bounded check of `H_φ(X↾x, Z) → ∀n < n_bound (φ(n,x,Z) ↔ ¬ψ(n,x,Z))`.
///
/// The payloads are dovetailed together: at budgets 1, 2, 4, … every
/// unresolved payload runs both searches, so a double witness at one payload
/// is not hidden behind an unresolved smaller one. This confirms or refutes
/// the premise on the tested window only.
pub fn premise_check(
    pair: &dyn BasePredicatePair,
    order: &WellOrder,
    x: u64,
    z: &ExplicitFamily,
    n_bound: u64,
    fuel: &mut Fuel,
) -> Result<Verdict<PremiseHolds, PremiseViolated>> {
    let segment = order.restrict(x)?;
    match h_condition_check(pair, &segment, z, fuel)? {
        Verdict::No(k) => return Ok(Verdict::Yes(PremiseHolds::Vacuous { counterexample: k })),
        Verdict::Unknown => return Ok(Verdict::Unknown),
        Verdict::Yes(_) => {}
    }

    let mut unresolved: Vec<u64> = (0..n_bound).collect();
    let mut stage = 1u64;
    while !unresolved.is_empty() {
        if fuel.is_empty() {
            return Ok(Verdict::Unknown);
        }
        let last = stage >= fuel.left();
        let mut still = Vec::new();
        for &n in &unresolved {
            let mut oracle = z.oracle();
            let phi = fuel.with_budget(stage, |f| sigma1_eval(Side::Phi, pair, n, x, &mut oracle, f))?;
            let psi = fuel.with_budget(stage, |f| sigma1_eval(Side::Psi, pair, n, x, &mut oracle, f))?;
            match (phi, psi) {
                (Verdict::Yes(phi_witness), Verdict::Yes(psi_witness)) => {
                    return Ok(Verdict::No(PremiseViolated { n, phi_witness, psi_witness }));
                }
                (Verdict::Unknown, Verdict::Unknown) => still.push(n),
                _ => {}
            }
        }
        unresolved = still;
        if last && !unresolved.is_empty() {
            return Ok(Verdict::Unknown);
        }
        stage = stage.saturating_mul(2);
    }
    Ok(Verdict::Yes(PremiseHolds::Verified { payloads: n_bound }))
}

/// A sampled failure of monotonicity: `f ⪯ g`, the predicate holds on `f`
/// but not on `g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneCounterexample {
    pub side: Side,
    pub n: u64,
    pub x: u64,
    pub f: FinitePartialFn,
    pub g: FinitePartialFn,
}

/// Samples `samples` random `(n, x, f ⪯ g)` and tests both base predicates
/// for monotonicity. `Yes` carries the number of samples.
///
/// Sampled functions mix random entries with runs of 1-entries that look
/// like function graphs (`(x', pair(a, b))` chains), so predicates that read
/// chains get exercised on non-trivial inputs.
pub fn check_monotone(
    pair: &dyn BasePredicatePair,
    samples: u64,
    seed: u64,
) -> Verdict<u64, MonotoneCounterexample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let x = rng.gen_range(0..4);
        let n = pairing::pair(rng.gen_range(0..6), rng.gen_range(0..16)).expect("small");
        let f = random_fn(&mut rng, &FinitePartialFn::empty());
        let g = random_fn(&mut rng, &f);
        for side in [Side::Phi, Side::Psi] {
            if pair.holds(side, n, x, &f) && !pair.holds(side, n, x, &g) {
                return Verdict::No(MonotoneCounterexample { side, n, x, f, g });
            }
        }
    }
    Verdict::Yes(samples)
}

fn random_fn(rng: &mut ChaCha8Rng, base: &FinitePartialFn) -> FinitePartialFn {
    let mut entries: BTreeMap<u64, bool> = base.iter().collect();
    let mut add = |k: u64, bit: bool| {
        entries.entry(k).or_insert(bit);
    };
    if rng.gen_bool(0.6) {
        let level = rng.gen_range(0..4);
        let mut a = rng.gen_range(0..6);
        for _ in 0..rng.gen_range(1..10) {
            let b = a + rng.gen_range(0..4);
            add(key(level, pairing::pair(a, b).expect("small")), true);
            a = b;
        }
    }
    for _ in 0..rng.gen_range(0..6) {
        let k = key(rng.gen_range(0..5), pairing::pair(rng.gen_range(0..12), rng.gen_range(0..24)).expect("small"));
        add(k, rng.gen_bool(0.6));
    }
    if rng.gen_bool(0.2) {
        add(rng.gen_range(0..64), rng.gen_bool(0.5));
    }
    entries.into_iter().collect()
}

fn key(x: u64, n: u64) -> u64 {
    pairing::key(x, n).expect("small key")
}
