use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::pairing;
use crate::partialfn::FinitePartialFn;
use crate::predicate::{BasePredicatePair, SearchOutcome, SetOracle, Side};
use crate::verdict::Fuel;
use crate::wellorder::{lift_to_top, WellOrder, TOP};

/// One recursion: a well order and the base predicates run along it.
#[derive(Clone)]
pub struct Instance {
    pub order: WellOrder,
    pub pair: Arc<dyn BasePredicatePair>,
    pub label: String,
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Instance({}, {:?}, {})", self.label, self.order, self.pair.name())
    }
}

impl Instance {
    pub fn new(order: WellOrder, pair: Arc<dyn BasePredicatePair>, label: impl Into<String>) -> Self {
        Instance { order, pair, label: label.into() }
    }

    /// The same recursion over `X ∪ {⊤}`.
    ///
    /// Element `c` of `X` becomes `c + 1` (keys re-encoded to match) and `⊤`
    /// has code 0. The section at `⊤` is empty, so a `⊤`-approximation is an
    /// approximation of the whole family.
    pub fn with_top(&self) -> Instance {
        Instance {
            order: self.order.add_top(),
            pair: Arc::new(TopLifted { inner: self.pair.clone(), name: format!("{}+⊤", self.pair.name()) }),
            label: format!("{}+⊤", self.label),
        }
    }
}

/// Key of `(c, n)` in `X` re-encoded for `X ∪ {⊤}`.
pub fn lift_key(k: u64) -> Option<u64> {
    let (x, n) = pairing::split_key(k);
    pairing::key(lift_to_top(x), n)
}

/// Inverse of [`lift_key`]; `None` for keys at `⊤` itself.
pub fn lower_key(k: u64) -> Option<u64> {
    let (x, n) = pairing::split_key(k);
    if x == TOP {
        return None;
    }
    pairing::key(x - 1, n)
}

fn lower(f: &FinitePartialFn) -> FinitePartialFn {
    f.iter().filter_map(|(k, b)| lower_key(k).map(|k| (k, b))).collect()
}

fn lift(f: &FinitePartialFn) -> FinitePartialFn {
    f.iter().filter_map(|(k, b)| lift_key(k).map(|k| (k, b))).collect()
}

struct TopLifted {
    inner: Arc<dyn BasePredicatePair>,
    name: String,
}

struct LoweredOracle<'a> {
    lifted: &'a mut dyn SetOracle,
}

impl SetOracle for LoweredOracle<'_> {
    fn lookup(&mut self, key: u64, fuel: &mut Fuel) -> Result<Option<bool>> {
        match lift_key(key) {
            Some(k) => self.lifted.lookup(k, fuel),
            None => Ok(None),
        }
    }
}

impl BasePredicatePair for TopLifted {
    fn name(&self) -> &str {
        &self.name
    }

    fn holds(&self, side: Side, n: u64, x: u64, f: &FinitePartialFn) -> bool {
        if x == TOP {
            return side == Side::Psi;
        }
        self.inner.holds(side, n, x - 1, &lower(f))
    }

    fn positive_only(&self) -> bool {
        self.inner.positive_only()
    }

    fn search(
        &self,
        side: Side,
        n: u64,
        x: u64,
        oracle: &mut dyn SetOracle,
        fuel: &mut Fuel,
    ) -> Result<SearchOutcome> {
        if x == TOP {
            if side == Side::Psi && fuel.tick() {
                return Ok(SearchOutcome::Found(FinitePartialFn::empty()));
            }
            fuel.exhaust();
            return Ok(SearchOutcome::Exhausted);
        }
        let mut lowered = LoweredOracle { lifted: oracle };
        Ok(match self.inner.search(side, n, x - 1, &mut lowered, fuel)? {
            SearchOutcome::Found(g) => SearchOutcome::Found(lift(&g)),
            SearchOutcome::Exhausted => SearchOutcome::Exhausted,
        })
    }
}
