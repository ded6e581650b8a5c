"""Can a new service replace an old one against a given partner?

Two formulations are offered.  The relation-based one compares old and new
behaviours directly (branching equivalence by default, the cheapest of the
safe choices).  The recomposition-based one only re-checks the new service
against the partner; it is kept because it is common practice, but it never
looks at the old service at all, so it comes with a permanent caveat.
The combined report runs both plus the before/after compatibility checks.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .compat import CompatNotion, check_compat
from .equiv import RelationKind, check_relation, trace_equiv
from .model import Sts, Verdict

RECOMPOSE_WARNING = (
    "recomposition only checks the replacement against the partner and never "
    "compares old and new behaviours; see fixture fig7 for how that misleads"
)

_INADEQUATE = {
    RelationKind.TRACE: (
        "trace equivalence ignores branching structure and can approve a "
        "replacement that deadlocks the composition; see fixture fig11"
    ),
    RelationKind.SIMULATION: (
        "being simulated by the old service does not keep every "
        "compatibility notion; see fixture fig8"
    ),
    RelationKind.SUBTYPE: (
        "behavioural subtyping does not preserve deadlock-freeness in "
        "general; see fixture fig9"
    ),
}


def check_subst_by_relation(
    old: Sts, new: Sts, kind: RelationKind = RelationKind.BRANCHING
) -> Verdict:
    """First formulation: are old and new related behaviours?

    Weak and branching equivalence are known to keep every compatibility
    notion intact; the weaker relations come with a warning naming the
    fixture that defeats them.
    """
    verdict = check_relation(new, old, kind)
    warnings = verdict.warnings
    if kind in _INADEQUATE:
        warnings = (*warnings, _INADEQUATE[kind])
    return dataclasses.replace(verdict, warnings=warnings, relation=kind)


def check_subst_by_recompose(
    old: Sts, new: Sts, partner: Sts, notion: CompatNotion
) -> Verdict:
    """Second formulation: is the new service compatible with the partner?

    Always warns that this never compares old and new, and adds an advisory
    line saying whether the two are at least trace-equivalent.
    """
    verdict = check_compat(new, partner, notion)
    if trace_equiv(old, new).holds:
        advisory = "advisory: old and new services are trace-equivalent"
    else:
        advisory = "advisory: old and new services are not trace-equivalent"
    warnings = (*verdict.warnings, RECOMPOSE_WARNING, advisory)
    return dataclasses.replace(verdict, warnings=warnings)


@dataclass(frozen=True)
class SubstitutionReport:
    """Both formulations side by side, plus before/after compatibility."""

    old: str
    new: str
    partner: str
    notion: CompatNotion
    kind: RelationKind
    relation: Verdict
    recomposition: Verdict
    before: Verdict  # old against partner
    after: Verdict  # new against partner
    recommendation: str  # "accept" | "reject"


def substitution_report(
    old: Sts,
    new: Sts,
    partner: Sts,
    notion: CompatNotion,
    kind: RelationKind = RelationKind.BRANCHING,
) -> SubstitutionReport:
    """Run both formulations and recommend.

    A replacement is recommended only when the behaviours are related AND
    the recomposed system still passes the compatibility check: either test
    alone can approve a replacement that the other rejects.
    """
    relation = check_subst_by_relation(old, new, kind)
    recomposition = check_subst_by_recompose(old, new, partner, notion)
    before = check_compat(old, partner, notion)
    after = check_compat(new, partner, notion)
    recommendation = "accept" if relation.holds and after.holds else "reject"
    return SubstitutionReport(
        old=old.name,
        new=new.name,
        partner=partner.name,
        notion=notion,
        kind=kind,
        relation=relation,
        recomposition=recomposition,
        before=before,
        after=after,
        recommendation=recommendation,
    )
