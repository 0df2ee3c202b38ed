//! Tri-state verdicts and the fuel that bounds every search.

/// Answer to a semi-decidable question.
///
/// `Yes` and `No` carry their witnesses; `Unknown` means the fuel ran out
/// before either was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict<Y, N = Y> {
    Yes(Y),
    No(N),
    Unknown,
}

impl<Y, N> Verdict<Y, N> {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes(_))
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Verdict::No(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown)
    }

    pub fn is_decided(&self) -> bool {
        !self.is_unknown()
    }

    /// `Some(true)` for `Yes`, `Some(false)` for `No`.
    pub fn decision(&self) -> Option<bool> {
        match self {
            Verdict::Yes(_) => Some(true),
            Verdict::No(_) => Some(false),
            Verdict::Unknown => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Yes(_) => "yes",
            Verdict::No(_) => "no",
            Verdict::Unknown => "unknown",
        }
    }
}

/// Step budget. One unit pays for one base-predicate evaluation or one
/// oracle probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fuel {
    limit: u64,
    left: u64,
}

impl Fuel {
    pub fn new(limit: u64) -> Self {
        Fuel { limit, left: limit }
    }

    pub fn left(&self) -> u64 {
        self.left
    }

    pub fn spent(&self) -> u64 {
        self.limit - self.left
    }

    pub fn is_empty(&self) -> bool {
        self.left == 0
    }

    /// Takes one unit. Returns `false` (taking nothing) when empty.
    pub fn tick(&mut self) -> bool {
        self.consume(1)
    }

    /// Takes `amount` units if that many are left.
    pub fn consume(&mut self, amount: u64) -> bool {
        if self.left >= amount {
            self.left -= amount;
            true
        } else {
            false
        }
    }

    /// Drains the remaining fuel.
    pub fn exhaust(&mut self) {
        self.left = 0;
    }

    /// Runs `f` with at most `budget` units drawn from `self`, charging what
    /// it spent.
    pub fn with_budget<T>(&mut self, budget: u64, f: impl FnOnce(&mut Fuel) -> T) -> T {
        let mut child = Fuel::new(budget.min(self.left));
        let out = f(&mut child);
        self.left -= child.spent();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn child_budget_is_charged_to_parent() {
        let mut fuel = Fuel::new(10);
        let spent = fuel.with_budget(4, |c| {
            while c.tick() {}
            c.spent()
        });
        assert_eq!(spent, 4);
        assert_eq!(fuel.left(), 6);
        fuel.with_budget(100, |c| assert_eq!(c.left(), 6));
    }

    #[test]
    fn empty_fuel_refuses_ticks() {
        let mut fuel = Fuel::new(0);
        assert!(!fuel.tick());
        assert_eq!(fuel.spent(), 0);
    }

    #[test]
    fn decisions() {
        assert_eq!(Verdict::<u8>::Yes(1).decision(), Some(true));
        assert_eq!(Verdict::<u8>::No(1).decision(), Some(false));
        assert_eq!(Verdict::<u8>::Unknown.decision(), None);
    }
}
