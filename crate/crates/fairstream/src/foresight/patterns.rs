//! Allocation table for a pair of goods (g, g') and two agents.
//!
//! A pattern is which of the two goods an agent values at alpha. The table
//! names the good agent 1 receives; agent 2 receives the other one.

use serde::{Deserialize, Serialize};

/// An agent's view of (g, g'): `g_high`, `next_high`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pattern {
    pub g_high: bool,
    pub next_high: bool,
}

impl Pattern {
    pub const LL: Pattern = Pattern::new(false, false);
    pub const LH: Pattern = Pattern::new(false, true);
    pub const HL: Pattern = Pattern::new(true, false);
    pub const HH: Pattern = Pattern::new(true, true);

    pub const fn new(g_high: bool, next_high: bool) -> Self {
        Pattern { g_high, next_high }
    }

    /// Two letters for (g, g'): `H` for alpha, `L` for beta.
    pub fn code(self) -> String {
        let c = |b: bool| if b { 'H' } else { 'L' };
        format!("{}{}", c(self.g_high), c(self.next_high))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairRule {
    /// Agent 1 takes g.
    FirstTakesG,
    /// Agent 1 takes g'.
    FirstTakesNext,
    /// g low and g' high for both; the counter decides who gets g'.
    ContestedNext,
    /// g high and g' low for both; the counter decides who gets g.
    ContestedG,
}

/// (agent 1 pattern, agent 2 pattern, rule), all sixteen combinations.
pub const PATTERN_TABLE: [(Pattern, Pattern, PairRule); 16] = {
    use PairRule::*;
    use Pattern as P;
    [
        (P::LL, P::LL, FirstTakesG),
        (P::LH, P::LL, FirstTakesNext),
        (P::HL, P::LL, FirstTakesG),
        (P::HH, P::LL, FirstTakesG),
        (P::LL, P::LH, FirstTakesG),
        (P::LH, P::LH, ContestedNext),
        (P::HL, P::LH, FirstTakesG),
        (P::HH, P::LH, FirstTakesG),
        (P::LL, P::HL, FirstTakesNext),
        (P::LH, P::HL, FirstTakesNext),
        (P::HL, P::HL, ContestedG),
        (P::HH, P::HL, FirstTakesNext),
        (P::LL, P::HH, FirstTakesNext),
        (P::LH, P::HH, FirstTakesNext),
        (P::HL, P::HH, FirstTakesG),
        (P::HH, P::HH, FirstTakesG),
    ]
};

pub fn lookup(first: Pattern, second: Pattern) -> PairRule {
    PATTERN_TABLE
        .iter()
        .find(|(a, b, _)| *a == first && *b == second)
        .map(|e| e.2)
        .expect("table covers all patterns")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternRow {
    pub agent1: String,
    pub agent2: String,
    pub rule: PairRule,
}

/// The table as serializable rows.
pub fn table_rows() -> Vec<PatternRow> {
    PATTERN_TABLE
        .iter()
        .map(|(a, b, r)| PatternRow {
            agent1: a.code(),
            agent2: b.code(),
            rule: *r,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_matches_table() {
        let fixture: Vec<PatternRow> =
            serde_json::from_str(include_str!("../../fixtures/pattern_table.json")).unwrap();
        assert_eq!(fixture, table_rows());
    }

    #[test]
    fn every_pattern_pair_once() {
        let pats = [Pattern::LL, Pattern::LH, Pattern::HL, Pattern::HH];
        for a in pats {
            for b in pats {
                let hits = PATTERN_TABLE
                    .iter()
                    .filter(|e| e.0 == a && e.1 == b)
                    .count();
                assert_eq!(hits, 1);
            }
        }
    }

    #[test]
    fn uncontested_rows_never_hurt_a_high_agent() {
        // When only one agent has a high good among the pair, it gets one.
        for (a, b, r) in PATTERN_TABLE {
            let first_gets_high = match r {
                PairRule::FirstTakesG => a.g_high,
                PairRule::FirstTakesNext => a.next_high,
                _ => continue,
            };
            let second_gets_high = match r {
                PairRule::FirstTakesG => b.next_high,
                _ => b.g_high,
            };
            if a.g_high || a.next_high {
                assert!(first_gets_high || (a.g_high && a.next_high), "{a:?} {b:?}");
            }
            if b.g_high || b.next_high {
                assert!(second_gets_high || (b.g_high && b.next_high), "{a:?} {b:?}");
            }
        }
    }
}
