//! The approximation engine.
//!
//! `(x, n)` belongs to `Y` when `φ₀(n, x, f)` holds for some
//! `x`-approximation `f`, and is outside `Y` when `ψ₀(n, x, g)` holds for
//! some `x`-approximation `g`. The engine finds such approximations by
//! searching for a witness `g ⪯ Y^x` (probing `Y^x` through recursive
//! membership queries) and then extending `g` entry by entry into an
//! approximation, recursing at each smaller index. Every result is checked
//! against both a certificate carried through the construction and an
//! independent verification of the approximation conditions.
//!
//! Memoized results record the fuel they cost. A result is reused, for one
//! unit of fuel, only while at least that much fuel is left; otherwise the
//! fuel is drained and the caller sees `Unknown`. So an answer obtained with
//! some fuel is obtained with any larger fuel, on a fresh engine or not.

use std::collections::{BTreeMap, BTreeSet};

use rustc_hash::FxHashMap as HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pairing::split_key;
use crate::partialfn::{outside_or_at_least, FinitePartialFn};
use crate::predicate::{dovetail, BasePredicatePair, Dovetailed, ExtensionSearch, SetOracle, Side};
use crate::verdict::{Fuel, Verdict};
use crate::wellorder::WellOrder;

use super::instance::Instance;
use super::trace::{EventKind, TraceEvent, TraceSink};

/// A partial function together with, for every entry below `x`, the
/// extension that witnesses it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub f: FinitePartialFn,
    pub x: u64,
    pub witnesses: BTreeMap<u64, FinitePartialFn>,
}

impl Certificate {
    pub fn empty(x: u64) -> Self {
        Certificate { f: FinitePartialFn::empty(), x, witnesses: BTreeMap::new() }
    }

    /// The certificate for `f↾y` as a `y`-approximation.
    pub fn restrict(&self, order: &WellOrder, y: u64) -> Certificate {
        Certificate {
            f: self.f.restrict_below_unchecked(order, y),
            x: y,
            witnesses: self
                .witnesses
                .iter()
                .filter(|(k, _)| order.less(split_key(**k).0, y))
                .map(|(k, h)| (*k, h.clone()))
                .collect(),
        }
    }

    /// Checks both approximation conditions using the stored witnesses.
    pub fn check(&self, pair: &dyn BasePredicatePair, order: &WellOrder) -> bool {
        let below: BTreeSet<u64> = self
            .f
            .keys()
            .filter(|k| order.less(split_key(*k).0, self.x))
            .collect();
        if self.witnesses.keys().copied().collect::<BTreeSet<_>>() != below {
            return false;
        }
        self.f.iter().all(|(k, bit)| {
            let (idx, n) = split_key(k);
            if outside_or_at_least(order, idx, self.x) {
                return !bit;
            }
            let h = &self.witnesses[&k];
            h.is_x_extension_of(&self.f.restrict_below_unchecked(order, idx), order, idx)
                && pair.holds(Side::from_bit(bit), n, idx, h)
        })
    }
}

/// Why a function is not an `x`-approximation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApproxFailure {
    /// Entry at an index `≥ x` (or outside the order) that maps to 1.
    NonzeroOutsideRange { key: u64 },
    /// Entry below `x` whose bit has no witnessing extension.
    Unwitnessed { key: u64 },
}

/// Result of a construction: the approximation and the predicate it
/// satisfies at the queried `(x, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Built {
    pub certificate: Certificate,
    pub side: Side,
}

/// Decided payloads of one section and those left undetermined.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Section {
    pub members: BTreeSet<u64>,
    pub residue: Vec<u64>,
}

#[derive(Clone)]
struct Memo<T> {
    value: T,
    cost: u64,
}

/// `Some(Some(v))` on a usable hit, `Some(None)` when the hit's cost exceeds
/// what is left (the fuel is drained), `None` on a miss.
fn recall<T: Clone>(memo: Option<&Memo<T>>, fuel: &mut Fuel) -> Option<Option<T>> {
    let m = memo?;
    if fuel.left() >= m.cost.max(1) && fuel.tick() {
        Some(Some(m.value.clone()))
    } else {
        fuel.exhaust();
        Some(None)
    }
}

pub struct Engine {
    instance: Instance,
    memo: HashMap<(u64, u64), Memo<Verdict<FinitePartialFn>>>,
    approx_memo: HashMap<(FinitePartialFn, u64), Memo<Verdict<Certificate, ApproxFailure>>>,
    candidate_memo: HashMap<(u64, u64), Memo<Dovetailed>>,
    build_memo: HashMap<(FinitePartialFn, u64, u64), Memo<Built>>,
    trace: Option<TraceSink>,
}

impl Engine {
    pub fn new(instance: Instance) -> Self {
        Engine {
            instance,
            memo: HashMap::default(),
            approx_memo: HashMap::default(),
            candidate_memo: HashMap::default(),
            build_memo: HashMap::default(),
            trace: None,
        }
    }

    pub fn with_trace(mut self, sink: TraceSink) -> Self {
        self.trace = Some(sink);
        self
    }

    pub fn take_trace(&mut self) -> Option<TraceSink> {
        self.trace.take()
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    fn pair(&self) -> Arc<dyn BasePredicatePair> {
        self.instance.pair.clone()
    }

    fn order(&self) -> WellOrder {
        self.instance.order.clone()
    }

    fn require_member(&self, x: u64) -> Result<()> {
        if self.instance.order.contains(x) {
            Ok(())
        } else {
            Err(Error::NotAMember { x })
        }
    }

    fn emit(
        &mut self,
        event: EventKind,
        x: u64,
        n: Option<u64>,
        f: Option<&FinitePartialFn>,
        verdict: Option<&'static str>,
        fuel: &Fuel,
    ) {
        if let Some(sink) = self.trace.as_mut() {
            sink.emit(&TraceEvent {
                event,
                x: Some(x),
                n,
                f_code: f.map(|f| f.encode().to_string()),
                verdict,
                fuel_left: fuel.left(),
            });
        }
    }

    /// Decides whether `f` is an `x`-approximation.
    ///
    /// Condition (i), that entries at indices `≥ x` or outside the order map
    /// to 0, is checked outright. For condition (ii) each entry below `x`
    /// needs an extension of `f↾x'` by 0-bits at indices `≥ x'` on which the
    /// matching base predicate holds; that search is bounded by `fuel`.
    pub fn is_x_approximation(
        &mut self,
        f: &FinitePartialFn,
        x: u64,
        fuel: &mut Fuel,
    ) -> Result<Verdict<Certificate, ApproxFailure>> {
        self.require_member(x)?;
        self.emit(EventKind::ApproxCheck, x, None, Some(f), None, fuel);
        let memo_key = (f.clone(), x);
        if let Some(hit) = recall(self.approx_memo.get(&memo_key), fuel) {
            let v = hit.unwrap_or(Verdict::Unknown);
            self.emit(EventKind::ApproxVerdict, x, None, Some(f), Some(v.label()), fuel);
            return Ok(v);
        }
        let before = fuel.left();
        let v = self.verify_conditions(f, x, fuel);
        if v.is_decided() {
            self.approx_memo.insert(memo_key, Memo { value: v.clone(), cost: before - fuel.left() });
        }
        self.emit(EventKind::ApproxVerdict, x, None, Some(f), Some(v.label()), fuel);
        Ok(v)
    }

    fn verify_conditions(&self, f: &FinitePartialFn, x: u64, fuel: &mut Fuel) -> Verdict<Certificate, ApproxFailure> {
        let order = &self.instance.order;
        let pair = &*self.instance.pair;
        for (k, bit) in f.iter() {
            if bit && outside_or_at_least(order, split_key(k).0, x) {
                return Verdict::No(ApproxFailure::NonzeroOutsideRange { key: k });
            }
        }
        let mut witnesses = BTreeMap::new();
        for (k, bit) in f.iter() {
            let (idx, n) = split_key(k);
            if !order.less(idx, x) {
                continue;
            }
            let base = f.restrict_below_unchecked(order, idx);
            let eligible = |q: u64| outside_or_at_least(order, split_key(q).0, idx);
            match pair.extension_witness(Side::from_bit(bit), n, idx, &base, &eligible, fuel) {
                ExtensionSearch::Found(h) => {
                    witnesses.insert(k, h);
                }
                ExtensionSearch::NoneExists => return Verdict::No(ApproxFailure::Unwitnessed { key: k }),
                ExtensionSearch::Exhausted => return Verdict::Unknown,
            }
        }
        Verdict::Yes(Certificate { f: f.clone(), x, witnesses })
    }

    /// Decides `(x, n) ∈ Y`. `Yes` and `No` carry the verified
    /// `x`-approximation on which `φ₀`, respectively `ψ₀`, holds.
    pub fn membership(&mut self, x: u64, n: u64, fuel: &mut Fuel) -> Result<Verdict<FinitePartialFn>> {
        self.require_member(x)?;
        self.emit(EventKind::MemberQuery, x, Some(n), None, None, fuel);
        if let Some(hit) = recall(self.memo.get(&(x, n)), fuel) {
            let v = hit.unwrap_or(Verdict::Unknown);
            self.emit_member_verdict(x, n, &v, fuel);
            return Ok(v);
        }
        let before = fuel.left();
        let v = match self.build_from(Certificate::empty(x), n, fuel)? {
            Some(Built { certificate, side: Side::Phi }) => Verdict::Yes(certificate.f),
            Some(Built { certificate, side: Side::Psi }) => Verdict::No(certificate.f),
            None => Verdict::Unknown,
        };
        if v.is_decided() {
            self.memo.insert((x, n), Memo { value: v.clone(), cost: before - fuel.left() });
        }
        self.emit_member_verdict(x, n, &v, fuel);
        Ok(v)
    }

    fn emit_member_verdict(&mut self, x: u64, n: u64, v: &Verdict<FinitePartialFn>, fuel: &Fuel) {
        let f = match v {
            Verdict::Yes(f) | Verdict::No(f) => Some(f),
            Verdict::Unknown => None,
        };
        let f = f.cloned();
        self.emit(EventKind::MemberVerdict, x, Some(n), f.as_ref(), Some(v.label()), fuel);
    }

    /// Extends the `x`-approximation `h` to one that decides `(x, n)`:
    /// `Yes` when `φ₀` holds on the result, `No` when `ψ₀` does.
    pub fn build_approximation(
        &mut self,
        h: &FinitePartialFn,
        x: u64,
        n: u64,
        fuel: &mut Fuel,
    ) -> Result<Verdict<Certificate>> {
        self.require_member(x)?;
        let start = match self.is_x_approximation(h, x, fuel)? {
            Verdict::Yes(cert) => cert,
            Verdict::No(_) => return Err(Error::NotAnApproximation { x, f: h.clone() }),
            Verdict::Unknown => return Ok(Verdict::Unknown),
        };
        Ok(match self.build_from(start, n, fuel)? {
            Some(Built { certificate, side: Side::Phi }) => Verdict::Yes(certificate),
            Some(Built { certificate, side: Side::Psi }) => Verdict::No(certificate),
            None => Verdict::Unknown,
        })
    }

    /// Payloads below `n_bound` in the section at `x`, each decided with its
    /// own `fuel_per_query`.
    pub fn section(&mut self, x: u64, n_bound: u64, fuel_per_query: u64) -> Result<Section> {
        self.require_member(x)?;
        let mut out = Section::default();
        for n in 0..n_bound {
            match self.membership(x, n, &mut Fuel::new(fuel_per_query))? {
                Verdict::Yes(_) => {
                    out.members.insert(n);
                }
                Verdict::No(_) => {}
                Verdict::Unknown => out.residue.push(n),
            }
        }
        Ok(out)
    }

    /// Witnesses `g ⪯ Y^x` for `φ` and `ψ` at `(x, n)`.
    fn candidates(&mut self, x: u64, n: u64, fuel: &mut Fuel) -> Result<Option<Dovetailed>> {
        if let Some(hit) = recall(self.candidate_memo.get(&(x, n)), fuel) {
            return Ok(hit);
        }
        let before = fuel.left();
        let pair = self.pair();
        let out = dovetail(&*pair, n, x, &mut EngineOracle { engine: self, x }, fuel)?;
        if let Some(d) = &out {
            self.candidate_memo.insert((x, n), Memo { value: d.clone(), cost: before - fuel.left() });
        }
        Ok(out)
    }

    fn build_from(&mut self, start: Certificate, n: u64, fuel: &mut Fuel) -> Result<Option<Built>> {
        let x = start.x;
        let memo_key = (start.f.clone(), x, n);
        if let Some(hit) = recall(self.build_memo.get(&memo_key), fuel) {
            return Ok(hit);
        }
        let before = fuel.left();
        let Some(found) = self.candidates(x, n, fuel)? else {
            return Ok(None);
        };

        let pair = self.pair();
        let order = self.order();
        let mut built: Vec<(Side, Certificate)> = Vec::new();
        for (side, g) in [(Side::Phi, found.phi), (Side::Psi, found.psi)] {
            let Some(g) = g else { continue };
            match self.extend(start.clone(), &g, fuel)? {
                Some(cert) => built.push((side, cert)),
                None => return Ok(None),
            }
        }
        let on = |side: Side| built.iter().find(|(_, c)| pair.holds(side, n, x, &c.f)).map(|(_, c)| c.f.clone());
        if let (Some(phi_witness), Some(psi_witness)) = (on(Side::Phi), on(Side::Psi)) {
            return Err(self.violation(x, n, phi_witness, psi_witness, fuel));
        }
        let (side, certificate) = built.swap_remove(0);
        if !pair.holds(side, n, x, &certificate.f) || !certificate.check(&*pair, &order) {
            return Err(Error::NotAnApproximation { x, f: certificate.f });
        }
        match self.is_x_approximation(&certificate.f, x, fuel)? {
            Verdict::Yes(_) => {}
            Verdict::No(_) => return Err(Error::NotAnApproximation { x, f: certificate.f }),
            Verdict::Unknown => return Ok(None),
        }
        let out = Built { certificate, side };
        self.build_memo.insert(memo_key, Memo { value: out.clone(), cost: before - fuel.left() });
        Ok(Some(out))
    }

    /// Extends `start` step by step until it contains `g`.
    ///
    /// Entries at indices `≥ x` get bit 0 directly. For an entry `(y, m)`
    /// below `x` a `y`-approximation `f'` extending `start↾y` that decides
    /// `(y, m)` is built recursively, and the next stage is
    /// `(f'↾y) ∪ current ∪ {(y, m) ↦ bit}`. The certificate is updated by
    /// the four cases for an existing entry at index `x'`: `x' < y` takes
    /// the witness from `f'`; the new entry is witnessed by `f'` itself;
    /// `x' = y` joins its witness with `f'↾y`; `y < x'` additionally adds the
    /// new entry.
    fn extend(&mut self, start: Certificate, g: &FinitePartialFn, fuel: &mut Fuel) -> Result<Option<Certificate>> {
        let x = start.x;
        let order = self.order();
        let mut cur = start;
        for (k, bit) in g.iter() {
            let (y, m) = split_key(k);
            if let Some(old) = cur.f.get(k) {
                if old != bit {
                    let mine = cur.witnesses.get(&k).cloned().unwrap_or_else(|| cur.f.clone());
                    return self.contradict_membership(y, m, Side::from_bit(old), mine, fuel);
                }
                continue;
            }
            if outside_or_at_least(&order, y, x) {
                // probes at these keys always answer "absent"
                cur.f.insert(k, false)?;
                let f = cur.f.clone();
                self.emit(EventKind::BuildStep, y, Some(m), Some(&f), Some("no"), fuel);
                continue;
            }
            let base = cur.restrict(&order, y);
            let Some(sub) = self.build_from(base, m, fuel)? else {
                return Ok(None);
            };
            if sub.side.bit() != bit {
                return self.contradict_membership(y, m, sub.side, sub.certificate.f, fuel);
            }
            cur = combine(&cur, &sub.certificate, k, bit, &order)?;
            let f = cur.f.clone();
            self.emit(EventKind::BuildStep, y, Some(m), Some(&f), Some(if bit { "yes" } else { "no" }), fuel);
        }
        Ok(Some(cur))
    }

    /// `mine` is a verified `y`-level witness for `side` at `(y, m)` that
    /// disagrees with the membership answer there.
    fn contradict_membership(
        &mut self,
        y: u64,
        m: u64,
        side: Side,
        mine: FinitePartialFn,
        fuel: &mut Fuel,
    ) -> Result<Option<Certificate>> {
        let theirs = match self.membership(y, m, fuel)? {
            Verdict::Yes(f) | Verdict::No(f) => f,
            Verdict::Unknown => return Ok(None),
        };
        let (phi, psi) = match side {
            Side::Phi => (mine, theirs),
            Side::Psi => (theirs, mine),
        };
        Err(self.violation(y, m, phi, psi, fuel))
    }

    fn violation(
        &mut self,
        x: u64,
        n: u64,
        phi_witness: FinitePartialFn,
        psi_witness: FinitePartialFn,
        fuel: &Fuel,
    ) -> Error {
        self.emit(EventKind::PremiseViolation, x, Some(n), Some(&phi_witness), None, fuel);
        Error::PremiseViolation { x, n, phi_witness, psi_witness }
    }
}

fn combine(
    cur: &Certificate,
    sub: &Certificate,
    k: u64,
    bit: bool,
    order: &WellOrder,
) -> Result<Certificate> {
    let y = sub.x;
    let sub_low = sub.f.restrict_below_unchecked(order, y);
    let mut f = sub_low.union(&cur.f)?;
    f.insert(k, bit)?;

    let mut witnesses = sub.witnesses.clone();
    witnesses.insert(k, sub.f.clone());
    for (k2, h) in &cur.witnesses {
        let idx = split_key(*k2).0;
        if order.less(idx, y) {
            continue;
        }
        let mut h2 = sub_low.union(h)?;
        if idx != y {
            h2.insert(k, bit)?;
        }
        witnesses.insert(*k2, h2);
    }
    Ok(Certificate { f, x: cur.x, witnesses })
}

/// `Y^x` seen through the engine's own membership answers.
struct EngineOracle<'a> {
    engine: &'a mut Engine,
    x: u64,
}

impl SetOracle for EngineOracle<'_> {
    fn lookup(&mut self, key: u64, fuel: &mut Fuel) -> Result<Option<bool>> {
        let (y, m) = split_key(key);
        if self.engine.instance.order.less(y, self.x) {
            if let Some(hit) = self.engine.memo.get(&(y, m)) {
                let decision = hit.value.decision();
                return Ok(match recall(Some(&Memo { value: (), cost: hit.cost }), fuel) {
                    Some(Some(())) => decision,
                    _ => None,
                });
            }
            Ok(self.engine.membership(y, m, fuel)?.decision())
        } else {
            Ok(Some(false))
        }
    }
}
