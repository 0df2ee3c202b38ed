//! Membership by direct recursion on the defining equivalence
//! `(x, n) ∈ Y ⟺ φ(n, x, Y^x)`, with no approximations involved.
//!
//! Used as an independent check on the engine.

use rustc_hash::FxHashMap as HashMap;

use crate::error::{Error, Result};
use crate::pairing::split_key;
use crate::partialfn::FinitePartialFn;
use crate::predicate::{dovetail, SetOracle};
use crate::verdict::{Fuel, Verdict};

use super::instance::Instance;

pub struct DirectEvaluator<'a> {
    instance: &'a Instance,
    depth_budget: u32,
    memo: HashMap<(u64, u64), (Verdict<FinitePartialFn>, u64)>,
}

impl<'a> DirectEvaluator<'a> {
    /// Nested queries deeper than `depth_budget` are treated as undetermined.
    pub fn new(instance: &'a Instance, depth_budget: u32) -> Self {
        DirectEvaluator { instance, depth_budget, memo: HashMap::default() }
    }

    /// `Yes` carries a `φ₀` witness `⪯ Y^x`, `No` a `ψ₀` witness.
    pub fn membership(&mut self, x: u64, n: u64, fuel: &mut Fuel) -> Result<Verdict<FinitePartialFn>> {
        if !self.instance.order.contains(x) {
            return Err(Error::NotAMember { x });
        }
        self.query(x, n, self.depth_budget, fuel)
    }

    fn query(&mut self, x: u64, n: u64, depth: u32, fuel: &mut Fuel) -> Result<Verdict<FinitePartialFn>> {
        if let Some((v, cost)) = self.memo.get(&(x, n)) {
            if fuel.left() >= (*cost).max(1) && fuel.tick() {
                return Ok(v.clone());
            }
            fuel.exhaust();
            return Ok(Verdict::Unknown);
        }
        let before = fuel.left();
        let pair = self.instance.pair.clone();
        let found = dovetail(&*pair, n, x, &mut DirectOracle { eval: self, x, depth }, fuel)?;
        let v = match found {
            None => return Ok(Verdict::Unknown),
            Some(d) => match (d.phi, d.psi) {
                (Some(phi_witness), Some(psi_witness)) => {
                    return Err(Error::PremiseViolation { x, n, phi_witness, psi_witness })
                }
                (Some(w), None) => Verdict::Yes(w),
                (None, Some(w)) => Verdict::No(w),
                (None, None) => Verdict::Unknown,
            },
        };
        if v.is_decided() {
            self.memo.insert((x, n), (v.clone(), before - fuel.left()));
        }
        Ok(v)
    }
}

struct DirectOracle<'e, 'a> {
    eval: &'e mut DirectEvaluator<'a>,
    x: u64,
    depth: u32,
}

impl SetOracle for DirectOracle<'_, '_> {
    fn lookup(&mut self, key: u64, fuel: &mut Fuel) -> Result<Option<bool>> {
        let (y, m) = split_key(key);
        if !self.eval.instance.order.less(y, self.x) {
            return Ok(Some(false));
        }
        if self.depth == 0 {
            return Ok(None);
        }
        if let Some((v, cost)) = self.eval.memo.get(&(y, m)) {
            if fuel.left() >= (*cost).max(1) && fuel.tick() {
                return Ok(v.decision());
            }
            fuel.exhaust();
            return Ok(None);
        }
        Ok(self.eval.query(y, m, self.depth - 1, fuel)?.decision())
    }
}

pub fn direct_membership(
    instance: &Instance,
    x: u64,
    n: u64,
    depth_budget: u32,
    fuel: &mut Fuel,
) -> Result<Verdict<FinitePartialFn>> {
    DirectEvaluator::new(instance, depth_budget).membership(x, n, fuel)
}
