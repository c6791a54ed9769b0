use treelabel::audit::Anchor;
use treelabel::conformance::Check;
use treelabel::scheme::SchemeKind;

/// Audit checks that cannot hold at the sizes this crate runs on, with the
/// scheme they belong to. Both are bit budgets that only fit asymptotically.
pub const UNATTAINABLE: [(SchemeKind, Anchor); 2] = [
    (SchemeKind::Final, Anchor::RtWithinFreedBits),
    (SchemeKind::Ct, Anchor::TupleBudget),
];

pub fn unattainable(scheme: &str, check: Check) -> bool {
    UNATTAINABLE.iter().any(|(s, a)| s.to_string() == scheme && check == Check::Anchor(*a))
}
