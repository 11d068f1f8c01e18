//! Eventually periodic symbol streams over {0, inf} recording which
//! essential singularity each iterate is near.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One symbol of an essential itinerary: inside (`Zero`) or outside (`Inf`)
/// the unit circle. Ties `|z| = 1` count as `Zero`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EssSymbol {
    Zero,
    Inf,
}

impl EssSymbol {
    pub fn of_log_modulus(l: f64) -> Self {
        if l > 0.0 {
            EssSymbol::Inf
        } else {
            EssSymbol::Zero
        }
    }

    /// Single-character display: `0` or `i`.
    pub fn as_char(self) -> char {
        match self {
            EssSymbol::Zero => '0',
            EssSymbol::Inf => 'i',
        }
    }
}

/// An eventually periodic sequence over {0, inf}: a finite prefix followed
/// by a repeating nonempty cycle. Symbol `n` is `prefix[n]` for
/// `n < prefix.len()` and cycles afterwards.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EssentialItinerary {
    prefix: Vec<EssSymbol>,
    cycle: Vec<EssSymbol>,
}

impl EssentialItinerary {
    pub fn new(prefix: Vec<EssSymbol>, cycle: Vec<EssSymbol>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::InvalidParameter(
                "itinerary cycle must be nonempty".into(),
            ));
        }
        Ok(EssentialItinerary { prefix, cycle })
    }

    pub fn all_inf() -> Self {
        EssentialItinerary {
            prefix: Vec::new(),
            cycle: vec![EssSymbol::Inf],
        }
    }

    pub fn all_zero() -> Self {
        EssentialItinerary {
            prefix: Vec::new(),
            cycle: vec![EssSymbol::Zero],
        }
    }

    /// The alternating itinerary (inf, 0, inf, 0, ...).
    pub fn alternating() -> Self {
        EssentialItinerary {
            prefix: Vec::new(),
            cycle: vec![EssSymbol::Inf, EssSymbol::Zero],
        }
    }

    pub fn symbol(&self, n: usize) -> EssSymbol {
        if n < self.prefix.len() {
            self.prefix[n]
        } else {
            self.cycle[(n - self.prefix.len()) % self.cycle.len()]
        }
    }

    pub fn prefix(&self) -> &[EssSymbol] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[EssSymbol] {
        &self.cycle
    }

    /// Bernoulli shift: drop the head of the prefix, or rotate the cycle
    /// when the prefix is empty.
    pub fn shift(&self) -> Self {
        if self.prefix.is_empty() {
            let mut cycle = self.cycle.clone();
            cycle.rotate_left(1);
            EssentialItinerary {
                prefix: Vec::new(),
                cycle,
            }
        } else {
            EssentialItinerary {
                prefix: self.prefix[1..].to_vec(),
                cycle: self.cycle.clone(),
            }
        }
    }

    /// The smallest repeating block of the cycle.
    fn primitive_cycle(&self) -> Vec<EssSymbol> {
        let n = self.cycle.len();
        'outer: for d in 1..=n {
            if n % d != 0 {
                continue;
            }
            for i in d..n {
                if self.cycle[i] != self.cycle[i - d] {
                    continue 'outer;
                }
            }
            return self.cycle[..d].to_vec();
        }
        self.cycle.clone()
    }

    /// Lexicographically minimal rotation of the primitive cycle; two
    /// eventually periodic sequences have a common shift exactly when these
    /// normal forms agree.
    fn normal_form(&self) -> Vec<EssSymbol> {
        let prim = self.primitive_cycle();
        let key = |s: &EssSymbol| match s {
            EssSymbol::Zero => 0u8,
            EssSymbol::Inf => 1u8,
        };
        let mut best = prim.clone();
        for r in 1..prim.len() {
            let mut rot = prim.clone();
            rot.rotate_left(r);
            if rot.iter().map(key).lt(best.iter().map(key)) {
                best = rot;
            }
        }
        best
    }

    /// True when some shifts of `self` and `other` agree as infinite
    /// sequences.
    pub fn equivalent(&self, other: &EssentialItinerary) -> bool {
        self.normal_form() == other.normal_form()
    }
}

impl std::fmt::Display for EssentialItinerary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for s in &self.prefix {
            write!(f, "{}", s.as_char())?;
        }
        write!(f, "(")?;
        for s in &self.cycle {
            write!(f, "{}", s.as_char())?;
        }
        write!(f, ")*")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use EssSymbol::{Inf, Zero};

    #[test]
    fn prefix_is_dropped_by_equivalence() {
        let a = EssentialItinerary::new(vec![], vec![Inf]).unwrap();
        let b = EssentialItinerary::new(vec![Zero], vec![Inf]).unwrap();
        assert!(a.equivalent(&b));
    }

    #[test]
    fn rotations_are_equivalent() {
        let a = EssentialItinerary::new(vec![], vec![Inf, Zero]).unwrap();
        let b = EssentialItinerary::new(vec![], vec![Zero, Inf]).unwrap();
        assert!(a.equivalent(&b));
    }

    #[test]
    fn different_cycles_are_not_equivalent() {
        let a = EssentialItinerary::new(vec![], vec![Inf, Zero]).unwrap();
        let b = EssentialItinerary::new(vec![], vec![Inf, Inf, Zero]).unwrap();
        assert!(!a.equivalent(&b));
        // Brute-force cross-check: no shifts agree on the first 12 symbols.
        for m in 0..4 {
            for n in 0..4 {
                let mut sa = a.clone();
                for _ in 0..m {
                    sa = sa.shift();
                }
                let mut sb = b.clone();
                for _ in 0..n {
                    sb = sb.shift();
                }
                let agree = (0..12).all(|k| sa.symbol(k) == sb.symbol(k));
                assert!(!agree, "shifts {m},{n} unexpectedly agree");
            }
        }
    }

    #[test]
    fn shift_rotates_pure_cycles() {
        let a = EssentialItinerary::new(vec![], vec![Inf, Zero]).unwrap();
        let s = a.shift();
        assert_eq!(s.symbol(0), Zero);
        assert_eq!(s.symbol(1), Inf);
        assert!(a.equivalent(&s));
    }

    #[test]
    fn symbols_follow_prefix_then_cycle() {
        let e = EssentialItinerary::new(vec![Zero, Zero], vec![Inf, Zero]).unwrap();
        let got: Vec<_> = (0..6).map(|n| e.symbol(n)).collect();
        assert_eq!(got, vec![Zero, Zero, Inf, Zero, Inf, Zero]);
    }

    #[test]
    fn empty_cycle_rejected() {
        assert!(EssentialItinerary::new(vec![Zero], vec![]).is_err());
    }
}
