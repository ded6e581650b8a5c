"""Equivalences and preorders between two transition systems.

The ladder goes from strong bisimulation (tau matched exactly) through
branching and weak bisimulation (tau absorbed, with or without stuttering
constraints) down to trace equality; simulation preorder and behavioural
subtyping cover one-directional replacement arguments.

By default the four equivalences make successful termination observable by
routing finals through a reserved emission first (annotate_finals), so a
final state and a dead end are told apart.  The two preorders default to raw
inputs, because the added termination emission would defeat the
fewer-emissions reading of subtyping; both defaults can be overridden.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass

from .model import Label, Sts, Verdict, annotate_finals
from .product import StateExplosion

DEFAULT_DET_CAP = 1 << 20

# internal node id: ("a"|"b", state)
_Node = tuple[str, str]


class RelationKind(enum.Enum):
    STRONG = "strong"
    BRANCHING = "branching"
    WEAK = "weak"
    TRACE = "trace"
    SIMULATION = "simulation"
    SUBTYPE = "subtype"


EQUIVALENCES = (
    RelationKind.STRONG,
    RelationKind.BRANCHING,
    RelationKind.WEAK,
    RelationKind.TRACE,
)


@dataclass(frozen=True)
class RelationWitness:
    """Why a relation check failed: a distinguishing trace or a game position."""

    note: str
    trace: tuple[str, ...] | None = None
    position: tuple[str, str] | None = None
    move: str | None = None


def _default_annotation(kind: RelationKind) -> bool:
    return kind in EQUIVALENCES


def _prepare(
    a: Sts, b: Sts, kind: RelationKind, final_annotation: bool | None
) -> tuple[Sts, Sts]:
    if final_annotation is None:
        final_annotation = _default_annotation(kind)
    if final_annotation:
        return annotate_finals(a), annotate_finals(b)
    return a, b


def _union_out(a: Sts, b: Sts) -> tuple[dict[_Node, list[tuple[Label, _Node]]], list[_Node]]:
    out: dict[_Node, list[tuple[Label, _Node]]] = {}
    order: list[_Node] = []
    for tag, sts in (("a", a), ("b", b)):
        adjacency = sts.outgoing_map()
        for state in sts.states:
            node = (tag, state)
            order.append(node)
            out[node] = [(t.label, (tag, t.target)) for t in adjacency[state]]
    return out, order


def _eps_closure(out: dict[_Node, list[tuple[Label, _Node]]], start: _Node) -> set[_Node]:
    seen = {start}
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for label, target in out[node]:
            if label.is_tau and target not in seen:
                seen.add(target)
                frontier.append(target)
    return seen


def _saturate(
    out: dict[_Node, list[tuple[Label, _Node]]], order: list[_Node]
) -> dict[_Node, list[tuple[Label, _Node]]]:
    """Weak move relation: tau edges become full tau* reach (reflexive),
    observables become tau*.l.tau*."""
    closures = {node: _eps_closure(out, node) for node in order}
    saturated: dict[_Node, list[tuple[Label, _Node]]] = {}
    for node in order:
        moves: set[tuple[Label, _Node]] = set()
        for mid in closures[node]:
            moves.add((Label(), mid))
            for label, target in out[mid]:
                if label.is_tau:
                    continue
                for end in closures[target]:
                    moves.add((label, end))
        saturated[node] = sorted(moves, key=lambda m: (m[0].sort_key(), m[1]))
    return saturated


def _refine_partition(
    out: dict[_Node, list[tuple[Label, _Node]]], order: list[_Node]
) -> dict[_Node, int]:
    """Coarsest partition where same-block states have same one-step signatures."""
    block = {node: 0 for node in order}
    blocks = 1
    while True:
        renumber: dict[tuple, int] = {}
        updated: dict[_Node, int] = {}
        for node in order:
            sig = (
                block[node],
                frozenset((label, block[target]) for label, target in out[node]),
            )
            if sig not in renumber:
                renumber[sig] = len(renumber)
            updated[node] = renumber[sig]
        if len(renumber) == blocks:
            return block
        block = updated
        blocks = len(renumber)


def _partition_witness(
    out: dict[_Node, list[tuple[Label, _Node]]],
    block: dict[_Node, int],
    a: Sts,
    b: Sts,
    weak: bool,
) -> RelationWitness:
    """At a stable signature partition, split initials differ in signature."""
    pa: _Node = ("a", a.initial)
    pb: _Node = ("b", b.initial)
    sig_a = {(label, block[target]) for label, target in out[pa]}
    sig_b = {(label, block[target]) for label, target in out[pb]}
    only_a = sorted(sig_a - sig_b, key=lambda m: (m[0].sort_key(), m[1]))
    only_b = sorted(sig_b - sig_a, key=lambda m: (m[0].sort_key(), m[1]))
    if not only_a and not only_b:
        return RelationWitness(
            note=f"initial states of '{a.name}' and '{b.name}' are in different classes",
            position=(a.initial, b.initial),
        )
    if only_a:
        (label, _), owner, other, state = only_a[0], a, b, a.initial
    else:
        (label, _), owner, other, state = only_b[0], b, a, b.initial
    how = "a class of states" if not weak else "a class of states (modulo internal steps)"
    move = "internal step" if label.is_tau else str(label)
    note = (
        f"state {state} of '{owner.name}' can do {move} into {how} "
        f"that '{other.name}' cannot match"
    )
    return RelationWitness(note=note, position=(a.initial, b.initial), move=str(label))


def strong_bisim(a: Sts, b: Sts, final_annotation: bool | None = None) -> Verdict:
    """Greatest bisimulation with tau treated as an ordinary label."""
    a2, b2 = _prepare(a, b, RelationKind.STRONG, final_annotation)
    out, order = _union_out(a2, b2)
    block = _refine_partition(out, order)
    if block[("a", a2.initial)] == block[("b", b2.initial)]:
        return Verdict(holds=True)
    witness = _partition_witness(out, block, a2, b2, weak=False)
    return Verdict(holds=False, witness=witness, warnings=(witness.note,))


def weak_bisim(a: Sts, b: Sts, final_annotation: bool | None = None) -> Verdict:
    """Bisimulation over the saturated (tau-absorbing) move relation."""
    a2, b2 = _prepare(a, b, RelationKind.WEAK, final_annotation)
    out, order = _union_out(a2, b2)
    saturated = _saturate(out, order)
    block = _refine_partition(saturated, order)
    if block[("a", a2.initial)] == block[("b", b2.initial)]:
        return Verdict(holds=True)
    witness = _partition_witness(saturated, block, a2, b2, weak=True)
    return Verdict(holds=False, witness=witness, warnings=(witness.note,))


def _branching_partition(
    out: dict[_Node, list[tuple[Label, _Node]]], order: list[_Node]
) -> dict[_Node, int]:
    """Split blocks until stable under the branching-step condition.

    A state belongs to the positive half of splitter (label, B') when it can
    reach, through tau steps that stay inside its own block, a state with a
    label-step into B'; an inert tau (label tau, B' = own block) never splits.
    """
    block = {node: 0 for node in order}
    blocks = 1
    while True:
        members: dict[int, list[_Node]] = {}
        for node in order:
            members.setdefault(block[node], []).append(node)
        split = False
        for bid in sorted(members):
            group = members[bid]
            if len(group) < 2:
                continue
            candidates = sorted(
                {
                    (label, block[target])
                    for node in group
                    for label, target in out[node]
                    if not (label.is_tau and block[target] == bid)
                },
                key=lambda c: (c[0].sort_key(), c[1]),
            )
            for label, target_bid in candidates:
                pos = {
                    node
                    for node in group
                    if any(
                        l == label and block[t] == target_bid for l, t in out[node]
                    )
                }
                grew = True
                while grew:
                    grew = False
                    for node in group:
                        if node in pos:
                            continue
                        if any(
                            l.is_tau and t in pos for l, t in out[node]
                        ):
                            pos.add(node)
                            grew = True
                if pos and len(pos) < len(group):
                    for node in group:
                        if node in pos:
                            block[node] = blocks
                    blocks += 1
                    split = True
                    break
            if split:
                break
        if not split:
            return block


def _branching_kill_witness(
    out: dict[_Node, list[tuple[Label, _Node]]],
    order: list[_Node],
    a: Sts,
    b: Sts,
) -> RelationWitness | None:
    """Pair-refinement rerun that records the move killing each pair."""
    closures = {node: _eps_closure(out, node) for node in order}
    a_nodes = [n for n in order if n[0] == "a"]
    b_nodes = [n for n in order if n[0] == "b"]
    related = {(x, y) for x in a_nodes for y in b_nodes}
    kills: dict[tuple[_Node, _Node], tuple[_Node, Label, _Node]] = {}

    def matched(mover: _Node, label: Label, dest: _Node, other: _Node, flip: bool) -> bool:
        pair = lambda m, o: (o, m) if flip else (m, o)
        if label.is_tau and pair(dest, other) in related:
            return True
        for mid in closures[other]:
            if pair(mover, mid) not in related:
                continue
            for l2, t2 in out[mid]:
                if l2 == label and pair(dest, t2) in related:
                    return True
        return False

    changed = True
    while changed:
        changed = False
        for x, y in sorted(related):
            dead = None
            for label, target in out[x]:
                if not matched(x, label, target, y, flip=False):
                    dead = (x, label, target)
                    break
            if dead is None:
                for label, target in out[y]:
                    if not matched(y, label, target, x, flip=True):
                        dead = (y, label, target)
                        break
            if dead is not None:
                related.discard((x, y))
                kills[(x, y)] = dead
                changed = True

    root = (("a", a.initial), ("b", b.initial))
    if root in related:
        return None
    mover, label, _ = kills[root]
    owner = a if mover[0] == "a" else b
    other = b if mover[0] == "a" else a
    move = "internal step" if label.is_tau else str(label)
    note = (
        f"state {mover[1]} of '{owner.name}' can do {move} in a way "
        f"'{other.name}' cannot mirror through related intermediate states"
    )
    return RelationWitness(note=note, position=(a.initial, b.initial), move=str(label))


def branching_bisim(a: Sts, b: Sts, final_annotation: bool | None = None) -> Verdict:
    """Tau-absorbing bisimulation that preserves branching structure."""
    a2, b2 = _prepare(a, b, RelationKind.BRANCHING, final_annotation)
    out, order = _union_out(a2, b2)
    block = _branching_partition(out, order)
    if block[("a", a2.initial)] == block[("b", b2.initial)]:
        return Verdict(holds=True)
    witness = _branching_kill_witness(out, order, a2, b2)
    warnings = (witness.note,) if witness else ()
    return Verdict(holds=False, witness=witness, warnings=warnings)


def _determinize(
    sts: Sts, cap: int
) -> tuple[list[dict[Label, int]], list[bool]]:
    """Subset construction over observable labels after tau-closure."""
    out = sts.outgoing_map()
    closures: dict[str, frozenset[str]] = {}

    def closure(states: frozenset[str]) -> frozenset[str]:
        result: set[str] = set()
        for s in states:
            if s not in closures:
                seen = {s}
                frontier = [s]
                while frontier:
                    cur = frontier.pop()
                    for t in out[cur]:
                        if t.label.is_tau and t.target not in seen:
                            seen.add(t.target)
                            frontier.append(t.target)
                closures[s] = frozenset(seen)
            result |= closures[s]
        return frozenset(result)

    start = closure(frozenset({sts.initial}))
    index = {start: 0}
    subsets = [start]
    trans: list[dict[Label, int]] = []
    accepting: list[bool] = []
    pos = 0
    while pos < len(subsets):
        subset = subsets[pos]
        pos += 1
        accepting.append(any(s in sts.finals for s in subset))
        moves: dict[Label, set[str]] = {}
        for s in subset:
            for t in out[s]:
                if not t.label.is_tau:
                    moves.setdefault(t.label, set()).add(t.target)
        row: dict[Label, int] = {}
        for label in sorted(moves, key=Label.sort_key):
            target = closure(frozenset(moves[label]))
            if target not in index:
                if len(subsets) >= cap:
                    raise StateExplosion(
                        f"determinization of '{sts.name}' exceeds {cap} subsets"
                    )
                index[target] = len(subsets)
                subsets.append(target)
            row[label] = index[target]
        trans.append(row)
    return trans, accepting


def trace_equiv(
    a: Sts,
    b: Sts,
    final_annotation: bool | None = None,
    completed: bool = False,
    det_cap: int | None = None,
) -> Verdict:
    """Equality of prefix-closed observable trace sets.

    ``completed`` additionally compares which traces may end in a final
    state, which matters when final annotation is off.
    """
    cap = DEFAULT_DET_CAP if det_cap is None else det_cap
    a2, b2 = _prepare(a, b, RelationKind.TRACE, final_annotation)
    trans_a, acc_a = _determinize(a2, cap)
    trans_b, acc_b = _determinize(b2, cap)
    alphabet = sorted(
        {label for row in trans_a for label in row}
        | {label for row in trans_b for label in row},
        key=Label.sort_key,
    )

    seen = {(0, 0)}
    queue: list[tuple[int | None, int | None, tuple[str, ...]]] = [(0, 0, ())]
    while queue:
        ia, ib, word = queue.pop(0)
        if completed:
            fa = ia is not None and acc_a[ia]
            fb = ib is not None and acc_b[ib]
            if fa != fb:
                owner = a2 if fa else b2
                note = (
                    f"trace {' '.join(word) or '<empty>'} can end in a final state "
                    f"of '{owner.name}' only"
                )
                witness = RelationWitness(note=note, trace=word)
                return Verdict(holds=False, witness=witness, warnings=(note,))
        for label in alphabet:
            na = trans_a[ia].get(label) if ia is not None else None
            nb = trans_b[ib].get(label) if ib is not None else None
            if na is None and nb is None:
                continue
            extended = word + (str(label),)
            if (na is None) != (nb is None):
                owner = a2 if na is not None else b2
                note = f"trace {' '.join(extended)} is possible in '{owner.name}' only"
                witness = RelationWitness(note=note, trace=extended)
                return Verdict(holds=False, witness=witness, warnings=(note,))
            if (na, nb) not in seen:
                seen.add((na, nb))
                queue.append((na, nb, extended))
    return Verdict(holds=True)


def _weak_moves(
    sts: Sts,
) -> tuple[dict[str, set[str]], dict[str, dict[Label, set[str]]]]:
    """Per state: tau* reach (reflexive) and weak observable successors."""
    out = sts.outgoing_map()
    eps: dict[str, set[str]] = {}
    for s in sts.states:
        seen = {s}
        frontier = [s]
        while frontier:
            cur = frontier.pop()
            for t in out[cur]:
                if t.label.is_tau and t.target not in seen:
                    seen.add(t.target)
                    frontier.append(t.target)
        eps[s] = seen
    weak: dict[str, dict[Label, set[str]]] = {s: {} for s in sts.states}
    for s in sts.states:
        for mid in eps[s]:
            for t in out[mid]:
                if t.label.is_tau:
                    continue
                weak[s].setdefault(t.label, set()).update(eps[t.target])
    return eps, weak


def simulation_preorder(
    big: Sts, small: Sts, final_annotation: bool | None = None
) -> Verdict:
    """Does ``big`` weakly simulate every move of ``small``?"""
    big2, small2 = _prepare(big, small, RelationKind.SIMULATION, final_annotation)
    eps_big, weak_big = _weak_moves(big2)
    small_out = small2.outgoing_map()

    related = {(x, y) for x in small2.states for y in big2.states}
    kills: dict[tuple[str, str], tuple[str, Label]] = {}
    changed = True
    while changed:
        changed = False
        for x, y in sorted(related):
            dead: Label | None = None
            for t in small_out[x]:
                if t.label.is_tau:
                    ok = any((t.target, y2) in related for y2 in eps_big[y])
                else:
                    ok = any(
                        (t.target, y2) in related
                        for y2 in weak_big[y].get(t.label, ())
                    )
                if not ok:
                    dead = t.label
                    break
            if dead is not None:
                related.discard((x, y))
                kills[(x, y)] = (x, dead)
                changed = True
    if (small2.initial, big2.initial) in related:
        return Verdict(holds=True)
    state, label = kills[(small2.initial, big2.initial)]
    move = "internal step" if label.is_tau else str(label)
    note = (
        f"state {state} of '{small2.name}' can do {move} in a way "
        f"'{big2.name}' cannot follow"
    )
    witness = RelationWitness(
        note=note, position=(big2.initial, small2.initial), move=str(label)
    )
    return Verdict(holds=False, witness=witness, warnings=(note,))


def behavioural_subtype(
    new: Sts, old: Sts, final_annotation: bool | None = None
) -> Verdict:
    """Replacement relation: fewer emissions, more receptions.

    Every emission of the new service must already be offered by the old one
    (modulo internal steps), and every reception of the old one must still be
    accepted by the new one; extra receptions of the new service and dropped
    emissions of the old one are free.
    """
    new2, old2 = _prepare(new, old, RelationKind.SUBTYPE, final_annotation)
    eps_new, weak_new = _weak_moves(new2)
    eps_old, weak_old = _weak_moves(old2)
    new_out = new2.outgoing_map()
    old_out = old2.outgoing_map()

    related = {(n, o) for n in new2.states for o in old2.states}
    kills: dict[tuple[str, str], tuple[str, str, Label]] = {}
    changed = True
    while changed:
        changed = False
        for n, o in sorted(related):
            dead: tuple[str, str, Label] | None = None
            for t in new_out[n]:
                if t.label.is_emission:
                    ok = any(
                        (t.target, o2) in related
                        for o2 in weak_old[o].get(t.label, ())
                    )
                elif t.label.is_tau:
                    ok = any((t.target, o2) in related for o2 in eps_old[o])
                else:
                    continue  # extra receptions of the new service are fine
                if not ok:
                    dead = ("new", n, t.label)
                    break
            if dead is None:
                for t in old_out[o]:
                    if t.label.is_reception:
                        ok = any(
                            (n2, t.target) in related
                            for n2 in weak_new[n].get(t.label, ())
                        )
                    elif t.label.is_tau:
                        ok = any((n2, t.target) in related for n2 in eps_new[n])
                    else:
                        continue  # emissions the new service drops are fine
                    if not ok:
                        dead = ("old", o, t.label)
                        break
            if dead is not None:
                related.discard((n, o))
                kills[(n, o)] = dead
                changed = True
    if (new2.initial, old2.initial) in related:
        return Verdict(holds=True)
    side, state, label = kills[(new2.initial, old2.initial)]
    move = "internal step" if label.is_tau else str(label)
    if side == "new":
        note = (
            f"{move} of '{new2.name}' at state {state} is not offered by "
            f"'{old2.name}' (new services may not add emissions)"
        )
    else:
        note = (
            f"{move} of '{old2.name}' at state {state} is not accepted by "
            f"'{new2.name}' (new services must keep every reception)"
        )
    witness = RelationWitness(
        note=note, position=(new2.initial, old2.initial), move=str(label)
    )
    return Verdict(holds=False, witness=witness, warnings=(note,))


def check_relation(
    a: Sts,
    b: Sts,
    kind: RelationKind,
    final_annotation: bool | None = None,
    completed: bool = False,
    det_cap: int | None = None,
) -> Verdict:
    """Dispatcher; for Simulation/Subtype the order is (bigger/new, smaller/old)."""
    if kind is RelationKind.STRONG:
        verdict = strong_bisim(a, b, final_annotation)
    elif kind is RelationKind.BRANCHING:
        verdict = branching_bisim(a, b, final_annotation)
    elif kind is RelationKind.WEAK:
        verdict = weak_bisim(a, b, final_annotation)
    elif kind is RelationKind.TRACE:
        verdict = trace_equiv(a, b, final_annotation, completed, det_cap)
    elif kind is RelationKind.SIMULATION:
        verdict = simulation_preorder(a, b, final_annotation)
    else:
        verdict = behavioural_subtype(a, b, final_annotation)
    return dataclasses.replace(verdict, relation=kind)
