//! Well orders on natural-number codes.
//!
//! A [`WellOrder`] is a decidable field together with a decidable strict
//! order. Well-foundedness is not checked: every constructor here provably
//! yields a well order, and [`WellOrder::custom`] trusts its caller.
//!
//! Code schemes of the structured constructors:
//!
//! * [`WellOrder::add_top`]: the new top element has code [`TOP`] (0) and a
//!   member `c` of the original order gets code `c + 1`.
//! * [`WellOrder::lex_product`]: members are Cantor codes `pair(a, b)` with
//!   `a` from the first factor, `b` from the second, ordered by `a` first.
//!   The order type is (second factor) · (first factor), so
//!   `lex_product(finite(2), omega())` has type ω·2.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pairing;

/// Code of the top element added by [`WellOrder::add_top`].
pub const TOP: u64 = 0;

type MemberFn = dyn Fn(u64) -> bool + Send + Sync;
type LessFn = dyn Fn(u64, u64) -> bool + Send + Sync;

#[derive(Clone)]
enum Repr {
    Finite(u64),
    Omega,
    Restrict { base: WellOrder, bound: u64 },
    Top(WellOrder),
    Lex(WellOrder, WellOrder),
    Custom { member: Arc<MemberFn>, less: Arc<LessFn> },
}

#[derive(Clone)]
pub struct WellOrder {
    repr: Arc<Repr>,
    description: String,
}

impl fmt::Debug for WellOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WellOrder({})", self.description)
    }
}

impl WellOrder {
    fn from_repr(repr: Repr, description: String) -> Self {
        WellOrder { repr: Arc::new(repr), description }
    }

    /// `{0, …, n-1}` in numeric order.
    pub fn finite(n: u64) -> Self {
        Self::from_repr(Repr::Finite(n), format!("{n}"))
    }

    /// All naturals in numeric order.
    pub fn omega() -> Self {
        Self::from_repr(Repr::Omega, "ω".to_string())
    }

    /// A user-supplied order. `less` must be a strict linear order on the
    /// members and must be well-founded; neither is checked.
    pub fn custom(
        description: impl Into<String>,
        member: impl Fn(u64) -> bool + Send + Sync + 'static,
        less: impl Fn(u64, u64) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self::from_repr(
            Repr::Custom { member: Arc::new(member), less: Arc::new(less) },
            description.into(),
        )
    }

    /// The initial segment `{x' ∈ X | x' < x}`.
    pub fn restrict(&self, x: u64) -> Result<Self> {
        if !self.contains(x) {
            return Err(Error::NotAMember { x });
        }
        Ok(Self::from_repr(
            Repr::Restrict { base: self.clone(), bound: x },
            format!("{}↾{x}", self.description),
        ))
    }

    /// `X ∪ {⊤}` with a new maximal element, re-encoded as described in the
    /// module docs.
    pub fn add_top(&self) -> Self {
        Self::from_repr(Repr::Top(self.clone()), format!("{}+⊤", self.description))
    }

    pub fn lex_product(&self, other: &WellOrder) -> Self {
        Self::from_repr(
            Repr::Lex(self.clone(), other.clone()),
            format!("{}×{}", self.description, other.description),
        )
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn contains(&self, c: u64) -> bool {
        match &*self.repr {
            Repr::Finite(n) => c < *n,
            Repr::Omega => true,
            Repr::Restrict { base, bound } => base.contains(c) && base.less(c, *bound),
            Repr::Top(base) => c == TOP || base.contains(c - 1),
            Repr::Lex(a, b) => {
                let (i, j) = pairing::unpair(c);
                a.contains(i) && b.contains(j)
            }
            Repr::Custom { member, .. } => member(c),
        }
    }

    /// Strict order; false unless both codes are members.
    pub fn less(&self, a: u64, b: u64) -> bool {
        match &*self.repr {
            Repr::Finite(n) => a < b && b < *n,
            Repr::Omega => a < b,
            Repr::Restrict { base, .. } => self.contains(a) && self.contains(b) && base.less(a, b),
            Repr::Top(base) => {
                if a == TOP {
                    false
                } else if b == TOP {
                    base.contains(a - 1)
                } else {
                    base.less(a - 1, b - 1)
                }
            }
            Repr::Lex(x, y) => {
                if !self.contains(a) || !self.contains(b) {
                    return false;
                }
                let (a1, a2) = pairing::unpair(a);
                let (b1, b2) = pairing::unpair(b);
                x.less(a1, b1) || (a1 == b1 && y.less(a2, b2))
            }
            Repr::Custom { member, less } => member(a) && member(b) && less(a, b),
        }
    }

    /// `a ≤ b`; false unless both codes are members.
    pub fn leq(&self, a: u64, b: u64) -> bool {
        (a == b && self.contains(a)) || self.less(a, b)
    }

    /// Code of `⊤` when this order was built by [`WellOrder::add_top`].
    pub fn top(&self) -> Option<u64> {
        matches!(&*self.repr, Repr::Top(_)).then_some(TOP)
    }

    /// Members with code below `code_bound`, sorted by the order.
    pub fn members_below_code(&self, code_bound: u64) -> Vec<u64> {
        let mut members: Vec<u64> = (0..code_bound).filter(|&c| self.contains(c)).collect();
        members.sort_by(|&a, &b| {
            if a == b {
                std::cmp::Ordering::Equal
            } else if self.less(a, b) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        });
        members
    }
}

/// Re-encodes a member of `X` as a member of `add_top(X)`.
pub fn lift_to_top(c: u64) -> u64 {
    c + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lex(a: u64, b: u64) -> u64 {
        pairing::pair(a, b).unwrap()
    }

    #[test]
    fn finite_orders() {
        let empty = WellOrder::finite(0);
        assert!((0..10).all(|c| !empty.contains(c)));
        let three = WellOrder::finite(3);
        assert!(three.less(1, 2));
        assert!(!three.less(2, 1));
        assert!(!three.contains(3));
        assert!(!three.less(1, 3));
    }

    #[test]
    fn omega_is_numeric() {
        let w = WellOrder::omega();
        assert!((0..1000).all(|k| w.contains(k)));
        assert!(w.less(5, 7));
        assert!(!w.less(7, 5));
        assert!(!w.less(5, 5));
    }

    #[test]
    fn restriction() {
        let r = WellOrder::omega().restrict(3).unwrap();
        assert_eq!(r.members_below_code(100), vec![0, 1, 2]);
        let empty = WellOrder::finite(5).restrict(0).unwrap();
        assert!(empty.members_below_code(100).is_empty());
        assert_eq!(WellOrder::finite(5).restrict(6).unwrap_err(), Error::NotAMember { x: 6 });
    }

    #[test]
    fn restriction_field_is_the_initial_segment() {
        let orders = [
            WellOrder::finite(7),
            WellOrder::finite(3).add_top(),
            WellOrder::finite(3).lex_product(&WellOrder::finite(4)),
        ];
        for order in &orders {
            for x in order.members_below_code(64) {
                let r = order.restrict(x).unwrap();
                for c in 0..64 {
                    assert_eq!(r.contains(c), order.less(c, x), "{order:?} x={x} c={c}");
                }
            }
        }
    }

    #[test]
    fn top_extension() {
        let x = WellOrder::finite(2);
        let t = x.add_top();
        assert!(t.contains(TOP));
        assert_eq!(t.top(), Some(TOP));
        // order-isomorphic to 3 elements: ⊤ last
        assert_eq!(t.members_below_code(10), vec![1, 2, TOP]);
        let three = WellOrder::finite(3).members_below_code(10);
        assert_eq!(three.len(), 3);
        for c in x.members_below_code(10) {
            assert!(t.less(lift_to_top(c), TOP));
            assert!(!t.less(TOP, lift_to_top(c)));
        }
        // restricting to ⊤ recovers X through the shift
        let below = t.restrict(TOP).unwrap();
        let recovered: Vec<u64> = below.members_below_code(10).iter().map(|c| c - 1).collect();
        assert_eq!(recovered, x.members_below_code(10));
    }

    #[test]
    fn top_over_omega() {
        let t = WellOrder::omega().add_top();
        for c in 0..200 {
            assert!(t.less(lift_to_top(c), TOP));
        }
    }

    #[test]
    fn lex_product_has_type_omega_times_two() {
        let p = WellOrder::finite(2).lex_product(&WellOrder::omega());
        for n in 0..100 {
            assert!(p.less(lex(0, n), lex(1, 0)));
            assert!(!p.less(lex(1, 0), lex(0, n)));
        }
        assert!(p.less(lex(0, 5), lex(0, 7)));
        assert!(!p.less(lex(1, 0), lex(0, 9)));
        assert!(!p.contains(lex(2, 0)));
    }

    fn check_linear(order: &WellOrder, members: &[u64], seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..1000 {
            let a = members[rng.gen_range(0..members.len())];
            let b = members[rng.gen_range(0..members.len())];
            let c = members[rng.gen_range(0..members.len())];
            assert!(!order.less(a, a));
            if a != b {
                assert!(order.less(a, b) ^ order.less(b, a));
            }
            if order.less(a, b) && order.less(b, c) {
                assert!(order.less(a, c));
            }
        }
    }

    #[test]
    fn trichotomy_and_transitivity() {
        let orders = [
            WellOrder::finite(20),
            WellOrder::omega(),
            WellOrder::omega().add_top(),
            WellOrder::finite(3).lex_product(&WellOrder::omega()),
            WellOrder::omega().lex_product(&WellOrder::finite(4)).add_top(),
        ];
        for (i, order) in orders.iter().enumerate() {
            let members: Vec<u64> = (0..400).filter(|&c| order.contains(c)).collect();
            check_linear(order, &members, i as u64);
        }
    }

    #[test]
    fn no_short_descending_chain_escapes_finite_restrictions() {
        // bounded probe of well-foundedness: random descending walks must
        // stop within the size of the field
        let order = WellOrder::finite(4).lex_product(&WellOrder::finite(5)).add_top();
        let members = order.members_below_code(200);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let mut cur = members[rng.gen_range(0..members.len())];
            let mut steps = 0;
            loop {
                let below: Vec<u64> = members.iter().copied().filter(|&c| order.less(c, cur)).collect();
                if below.is_empty() {
                    break;
                }
                cur = below[rng.gen_range(0..below.len())];
                steps += 1;
                assert!(steps <= members.len());
            }
        }
    }

    #[test]
    fn less_implies_membership() {
        let order = WellOrder::finite(3).lex_product(&WellOrder::finite(2));
        for a in 0..50 {
            for b in 0..50 {
                if order.less(a, b) {
                    assert!(order.contains(a) && order.contains(b));
                }
            }
        }
    }
}
