"""The three pairwise compatibility notions.

Every notion is evaluated over the reachable synchronous product, so the
criterion is re-established after each internal move: a tau step lands in
another reachable product state where the same local condition applies.
Emission matching is only required where the receiving side is stable (it
cannot dodge the check by resolving an internal choice first); a receiver
that can never become stable counts as a violation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .model import ComplementDirection, Label, Sts, Verdict
from .product import (
    ProductLts,
    ProductState,
    Side,
    WitnessTrace,
    shortest_paths,
    synchronous_product,
)


class CompatNotion(enum.Enum):
    DEADLOCK_FREE = "df"
    UNIDIRECTIONAL_COMPLEMENTARITY = "uc"
    UNSPECIFIED_RECEPTIONS = "ur"


def stable_states(sts: Sts, origin: str) -> frozenset[str]:
    """Tau-stable states reachable from ``origin`` by tau-only paths.

    Includes ``origin`` itself when it has no outgoing tau.  Empty only when
    every tau path from ``origin`` loops forever (divergence).
    """
    out = sts.outgoing_map()
    seen = {origin}
    frontier = [origin]
    stable = set()
    while frontier:
        state = frontier.pop()
        taus = [t.target for t in out[state] if t.label.is_tau]
        if not taus:
            stable.add(state)
        for target in taus:
            if target not in seen:
                seen.add(target)
                frontier.append(target)
    return frozenset(stable)


@dataclass(frozen=True)
class _Violation:
    state: ProductState
    side: Side  # whose enabled action goes unanswered
    label: Label
    divergent: bool


def _deadlock_warning(product: ProductLts) -> str:
    state = product.deadlocks[0]
    return f"deadlock: product state {state} has no step and is not final"


def _livelock_warning(product: ProductLts) -> str | None:
    """Reachable states that can reach neither a final nor a deadlock report."""
    incoming: dict[ProductState, list[ProductState]] = {s: [] for s in product.states}
    for step in product.steps:
        incoming[step.target].append(step.source)
    coreach = set(product.finals)
    frontier = list(product.finals)
    while frontier:
        state = frontier.pop()
        for prev in incoming[state]:
            if prev not in coreach:
                coreach.add(prev)
                frontier.append(prev)
    stuck = [
        s for s in product.states if s not in coreach and s not in set(product.deadlocks)
    ]
    if not stuck:
        return None
    return (
        f"{len(stuck)} reachable product state(s) can never reach a final "
        f"configuration (first: {stuck[0]})"
    )


def check_deadlock_free(a: Sts, b: Sts, max_states: int | None = None) -> Verdict:
    """No reachable product state may be stuck outside a pair of finals."""
    product = synchronous_product(a, b, max_states)
    warnings = list(product.divergence_warnings)
    livelock = _livelock_warning(product)
    if livelock:
        warnings.append(livelock)
    if not product.deadlocks:
        return Verdict(holds=True, warnings=tuple(warnings))
    warnings.append(_deadlock_warning(product))
    witness = shortest_paths(product)[product.deadlocks[0]]
    return Verdict(holds=False, witness=witness, warnings=tuple(warnings))


def _emission_violations(
    product: ProductLts, left: Sts, right: Sts
) -> list[_Violation]:
    """Enabled emissions with no guaranteed reception, per reachable state."""
    left_out = left.outgoing_map()
    right_out = right.outgoing_map()
    stable_cache: dict[tuple[Side, str], frozenset[str]] = {}

    def stability(side: Side, sts: Sts, state: str) -> frozenset[str]:
        key = (side, state)
        if key not in stable_cache:
            stable_cache[key] = stable_states(sts, state)
        return stable_cache[key]

    violations: list[_Violation] = []
    for state in product.states:
        sides = (
            (Side.LEFT, left_out[state.left], right, right_out[state.right], state.right),
            (Side.RIGHT, right_out[state.right], left, left_out[state.left], state.left),
        )
        for side, out_emitter, receiver, out_receiver, receiver_state in sides:
            emissions = list(
                dict.fromkeys(t.label for t in out_emitter if t.label.is_emission)
            )
            if not emissions:
                continue
            receiver_stable = not any(t.label.is_tau for t in out_receiver)
            if receiver_stable:
                receptions = {t.label for t in out_receiver if t.label.is_reception}
                for label in emissions:
                    if label.complement() not in receptions:
                        violations.append(_Violation(state, side, label, divergent=False))
            elif not stability(
                Side.RIGHT if side is Side.LEFT else Side.LEFT, receiver, receiver_state
            ):
                for label in emissions:
                    violations.append(_Violation(state, side, label, divergent=True))
    return violations


def _describe_unmatched(v: _Violation, left: Sts, right: Sts) -> str:
    emitter, receiver = (left, right) if v.side is Side.LEFT else (right, left)
    if v.divergent:
        return (
            f"emission {v.label} by '{emitter.name}' can never be received: "
            f"'{receiver.name}' diverges (tau cycle) at {v.state}"
        )
    return (
        f"emission {v.label} by '{emitter.name}' has no matching reception "
        f"in '{receiver.name}' at {v.state}"
    )


def check_unspecified_receptions(a: Sts, b: Sts, max_states: int | None = None) -> Verdict:
    """Deadlock-freeness plus: every enabled emission is guaranteed a reception."""
    product = synchronous_product(a, b, max_states)
    warnings = list(product.divergence_warnings)
    violations = _emission_violations(product, a, b)
    warnings.extend(_describe_unmatched(v, a, b) for v in violations)
    if violations:
        witness = shortest_paths(product)[violations[0].state]
        return Verdict(holds=False, witness=witness, warnings=tuple(warnings))
    if product.deadlocks:
        warnings.append(_deadlock_warning(product))
        witness = shortest_paths(product)[product.deadlocks[0]]
        return Verdict(holds=False, witness=witness, warnings=tuple(warnings))
    return Verdict(holds=True, warnings=tuple(warnings))


def _complement_violations(
    product: ProductLts, small: Sts, complementer: Sts, small_side: Side
) -> list[_Violation]:
    """Observables of the smaller side the complementer cannot answer."""
    small_out = small.outgoing_map()
    comp_out = complementer.outgoing_map()
    stable_cache: dict[str, frozenset[str]] = {}
    violations: list[_Violation] = []
    for state in product.states:
        small_state = state.left if small_side is Side.LEFT else state.right
        comp_state = state.right if small_side is Side.LEFT else state.left
        observables = list(
            dict.fromkeys(t.label for t in small_out[small_state] if not t.label.is_tau)
        )
        if not observables:
            continue
        comp_stable = not any(t.label.is_tau for t in comp_out[comp_state])
        if comp_stable:
            offered = {t.label for t in comp_out[comp_state] if not t.label.is_tau}
            for label in observables:
                if label.complement() not in offered:
                    violations.append(_Violation(state, small_side, label, divergent=False))
        else:
            if comp_state not in stable_cache:
                stable_cache[comp_state] = stable_states(complementer, comp_state)
            if not stable_cache[comp_state]:
                for label in observables:
                    violations.append(_Violation(state, small_side, label, divergent=True))
    return violations


def _describe_uncomplemented(
    v: _Violation, small: Sts, complementer: Sts, direction: ComplementDirection
) -> str:
    if v.divergent:
        detail = f"'{complementer.name}' diverges (tau cycle) at {v.state}"
    else:
        detail = f"no complement in '{complementer.name}' at {v.state}"
    return (
        f"direction {direction.value} fails: observable {v.label} of "
        f"'{small.name}' has {detail}"
    )


def check_unidirectional_complementarity(
    a: Sts, b: Sts, max_states: int | None = None
) -> Verdict:
    """One side must complement every observable of the other, plus deadlock-freeness."""
    product = synchronous_product(a, b, max_states)
    warnings = list(product.divergence_warnings)

    by_right = _complement_violations(product, a, b, Side.LEFT)
    by_left = _complement_violations(product, b, a, Side.RIGHT)
    deadlocked = bool(product.deadlocks)
    lbr_holds = not deadlocked and not by_right
    rbl_holds = not deadlocked and not by_left

    warnings.extend(
        _describe_uncomplemented(v, a, b, ComplementDirection.LEFT_BY_RIGHT) for v in by_right
    )
    warnings.extend(
        _describe_uncomplemented(v, b, a, ComplementDirection.RIGHT_BY_LEFT) for v in by_left
    )

    if lbr_holds and rbl_holds:
        direction = ComplementDirection.BOTH
    elif lbr_holds:
        direction = ComplementDirection.LEFT_BY_RIGHT
    elif rbl_holds:
        direction = ComplementDirection.RIGHT_BY_LEFT
    else:
        direction = None

    if direction is not None:
        return Verdict(holds=True, direction=direction, warnings=tuple(warnings))

    if deadlocked:
        warnings.append(_deadlock_warning(product))
        witness = shortest_paths(product)[product.deadlocks[0]]
    else:
        first = (by_right + by_left)[0]
        witness = shortest_paths(product)[first.state]
    return Verdict(holds=False, witness=witness, warnings=tuple(warnings))


def check_compat(a: Sts, b: Sts, notion: CompatNotion, max_states: int | None = None) -> Verdict:
    if notion is CompatNotion.DEADLOCK_FREE:
        return check_deadlock_free(a, b, max_states)
    if notion is CompatNotion.UNSPECIFIED_RECEPTIONS:
        return check_unspecified_receptions(a, b, max_states)
    return check_unidirectional_complementarity(a, b, max_states)
