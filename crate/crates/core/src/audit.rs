//! Runtime checks of the inequalities the encoders rely on.
//!
//! Every check has the shape `lhs ≤ rhs`. Checks that guard correctness are
//! always evaluated; recording is opt-in so production encodes stay lean.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

/// Named inequality checked during encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Anchor {
    /// Subtree extent of a heavy-path head fits its reserved segment.
    SpanWithinReserved,
    /// Total IDs used by one heavy path fit the segment reserved for its head.
    PathTotalWithinReserved,
    /// Extent of the whole tree against its closed-form bound.
    RootSpanBound,
    /// Class boundary value against the member's reserved length times the class factor.
    ClassBoundaryFactor,
    /// Routing-table bits fit in the trailing zeros freed in the start value.
    RtWithinFreedBits,
    /// Start values are multiples of `2^{⌈log lw⌉}`.
    StartTrailingZeros,
    /// Monotone sequence code fits `2z` bits.
    MonotoneCodeLength,
    /// Head extent in the preliminary scheme against its closed-form bound.
    PrelimHeadSpan,
    /// A small child fits its harmonic subinterval.
    HarmonicFit,
    /// Prefix-sum tuples fit their word budget in the constant-time scheme.
    TupleBudget,
}

impl Anchor {
    pub const ALL: [Anchor; 10] = [
        Anchor::SpanWithinReserved,
        Anchor::PathTotalWithinReserved,
        Anchor::RootSpanBound,
        Anchor::ClassBoundaryFactor,
        Anchor::RtWithinFreedBits,
        Anchor::StartTrailingZeros,
        Anchor::MonotoneCodeLength,
        Anchor::PrelimHeadSpan,
        Anchor::HarmonicFit,
        Anchor::TupleBudget,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Anchor::SpanWithinReserved => "span-within-reserved",
            Anchor::PathTotalWithinReserved => "path-total-within-reserved",
            Anchor::RootSpanBound => "root-span-bound",
            Anchor::ClassBoundaryFactor => "class-boundary-factor",
            Anchor::RtWithinFreedBits => "rt-within-freed-bits",
            Anchor::StartTrailingZeros => "start-trailing-zeros",
            Anchor::MonotoneCodeLength => "monotone-code-length",
            Anchor::PrelimHeadSpan => "prelim-head-span",
            Anchor::HarmonicFit => "harmonic-fit",
            Anchor::TupleBudget => "tuple-budget",
        }
    }
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Anchor {
    type Err = String;
    fn from_str(s: &str) -> Result<Anchor, String> {
        Anchor::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| format!("unknown anchor {s:?}"))
    }
}

/// One evaluated `lhs ≤ rhs` check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssertionRecord {
    pub anchor: Anchor,
    pub node: usize,
    pub lhs: BigUint,
    pub rhs: BigUint,
    pub pass: bool,
}

impl fmt::Display for AssertionRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{} {} {} {} node={}", self.anchor, status, self.lhs, self.rhs, self.node)
    }
}

/// Collector for assertion records; disabled collectors only evaluate.
#[derive(Clone, Debug, Default)]
pub struct Audit {
    enabled: bool,
    records: Vec<AssertionRecord>,
}

impl Audit {
    pub fn new(enabled: bool) -> Audit {
        Audit { enabled, records: Vec::new() }
    }

    pub fn disabled() -> Audit {
        Audit::new(false)
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    /// Evaluates `lhs ≤ rhs`, recording it when enabled.
    pub fn check(&mut self, anchor: Anchor, node: usize, lhs: &BigUint, rhs: &BigUint) -> bool {
        let pass = lhs <= rhs;
        if self.enabled {
            self.records.push(AssertionRecord {
                anchor,
                node,
                lhs: lhs.clone(),
                rhs: rhs.clone(),
                pass,
            });
        }
        pass
    }

    pub fn check_u64(&mut self, anchor: Anchor, node: usize, lhs: u64, rhs: u64) -> bool {
        let pass = lhs <= rhs;
        if self.enabled {
            self.records.push(AssertionRecord {
                anchor,
                node,
                lhs: lhs.into(),
                rhs: rhs.into(),
                pass,
            });
        }
        pass
    }

    pub fn records(&self) -> &[AssertionRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<AssertionRecord> {
        self.records
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssertionRecord> {
        self.records.iter().filter(|r| !r.pass)
    }
}
