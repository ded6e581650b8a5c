"""Core data model: labelled transition systems over emissions, receptions and tau.

A service interface is a finite transition system whose labels are either the
internal action tau or an observable action built from a message name, a
direction (emission ``!`` or reception ``?``) and an ordered list of parameter
sorts.  Final states model successful termination and must have no outgoing
transitions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Iterator

if TYPE_CHECKING:
    from .equiv import RelationKind, RelationWitness
    from .product import WitnessTrace

# Reserved message used to mark successful termination when finals are made
# observable.  ``TICK`` is the ASCII spelling accepted by the text format.
TICK = "√"
TICK_ASCII = "TICK"


class Direction(enum.Enum):
    EMISSION = "!"
    RECEPTION = "?"

    @property
    def complement(self) -> "Direction":
        if self is Direction.EMISSION:
            return Direction.RECEPTION
        return Direction.EMISSION


@dataclass(frozen=True)
class Label:
    """Transition label: tau when ``message`` is None, observable otherwise."""

    message: str | None = None
    direction: Direction | None = None
    sorts: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if (self.message is None) != (self.direction is None):
            raise ValueError("message and direction must be given together")
        if self.message is None and self.sorts:
            raise ValueError("tau carries no parameter sorts")

    @property
    def is_tau(self) -> bool:
        return self.message is None

    @property
    def is_emission(self) -> bool:
        return self.direction is Direction.EMISSION

    @property
    def is_reception(self) -> bool:
        return self.direction is Direction.RECEPTION

    def complement(self) -> "Label":
        """Same message and sorts, opposite direction."""
        if self.is_tau:
            raise ValueError("tau has no complement")
        assert self.direction is not None
        return Label(self.message, self.direction.complement, self.sorts)

    def sort_key(self) -> tuple:
        return (
            self.message is not None,
            self.message or "",
            self.direction.value if self.direction else "",
            self.sorts,
        )

    def __str__(self) -> str:
        if self.is_tau:
            return "tau"
        assert self.direction is not None
        text = f"{self.message}{self.direction.value}"
        if self.sorts:
            text += "(" + ",".join(self.sorts) + ")"
        return text


TAU = Label()


def emission(message: str, *sorts: str) -> Label:
    return Label(message, Direction.EMISSION, tuple(sorts))


def reception(message: str, *sorts: str) -> Label:
    return Label(message, Direction.RECEPTION, tuple(sorts))


@dataclass(frozen=True)
class Transition:
    source: str
    label: Label
    target: str

    def __str__(self) -> str:
        return f"{self.source} -> {self.target} : {self.label}"


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    detail: str

    def __str__(self) -> str:
        return f"{self.code}: {self.detail}"


class ValidationError(ValueError):
    """Raised when a transition system breaks a structural rule.

    Carries the complete list of violations, not just the first one.
    """

    def __init__(self, name: str, issues: list[ValidationIssue]):
        self.name = name
        self.issues = issues
        lines = "; ".join(str(i) for i in issues)
        super().__init__(f"invalid transition system '{name}': {lines}")


class ReservedNameCollision(ValueError):
    """The termination marker is already used as an ordinary message."""


@dataclass(frozen=True, eq=False)
class Sts:
    """A named transition system.

    ``states`` keeps first-appearance order so that printing and exploration
    are deterministic; equality treats states and finals as sets and the
    transition list as a sequence.
    """

    name: str
    states: tuple[str, ...]
    initial: str
    finals: frozenset[str]
    transitions: tuple[Transition, ...]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Sts):
            return NotImplemented
        return (
            self.name == other.name
            and set(self.states) == set(other.states)
            and self.initial == other.initial
            and self.finals == other.finals
            and self.transitions == other.transitions
        )

    def __hash__(self) -> int:
        return hash(
            (self.name, frozenset(self.states), self.initial, self.finals, self.transitions)
        )

    def is_final(self, state: str) -> bool:
        return state in self.finals

    def finals_ordered(self) -> tuple[str, ...]:
        return tuple(s for s in self.states if s in self.finals)

    def alphabet(self) -> frozenset[Label]:
        return frozenset(t.label for t in self.transitions if not t.label.is_tau)

    def outgoing_map(self) -> dict[str, list[Transition]]:
        out: dict[str, list[Transition]] = {s: [] for s in self.states}
        for t in self.transitions:
            out[t.source].append(t)
        return out


class ComplementDirection(enum.Enum):
    """Which side of a pair is complemented by the other."""

    LEFT_BY_RIGHT = "left-by-right"
    RIGHT_BY_LEFT = "right-by-left"
    BOTH = "both"


@dataclass(frozen=True)
class Verdict:
    """Outcome of a compatibility or relation check.

    ``witness`` is only attached to failing compatibility checks (a product
    path to the offending state) or failing relation checks (a distinguishing
    trace or game position).
    """

    holds: bool
    direction: ComplementDirection | None = None
    witness: "WitnessTrace | RelationWitness | None" = None
    warnings: tuple[str, ...] = ()
    relation: "RelationKind | None" = None


def build_sts(
    name: str,
    initial: str,
    finals: Iterable[str],
    transitions: Iterable[Transition],
    states: Iterable[str] | None = None,
) -> Sts:
    """Assemble and validate a transition system.

    With ``states=None`` the state set is collected from the initial state,
    finals and transition endpoints in order of first appearance.  Passing an
    explicit state list switches to strict mode, where referencing an
    undeclared state is an error.
    """
    finals = tuple(finals)
    transitions = tuple(transitions)
    issues: list[ValidationIssue] = []

    order: list[str] = []
    seen: set[str] = set()

    def note(state: str) -> None:
        if state not in seen:
            seen.add(state)
            order.append(state)

    explicit = states is not None
    if explicit:
        declared: set[str] = set()
        for s in states or ():
            if s in declared:
                issues.append(ValidationIssue("duplicate-state", f"state '{s}' declared twice"))
            declared.add(s)
            note(s)

    referenced = [initial, *finals]
    for t in transitions:
        referenced.extend((t.source, t.target))
    for s in referenced:
        if explicit and s not in seen:
            issues.append(ValidationIssue("unknown-state", f"state '{s}' is not declared"))
        note(s)

    if not finals:
        issues.append(ValidationIssue("empty-final-set", "at least one final state is required"))
    final_set = frozenset(finals)
    for t in transitions:
        if t.source in final_set:
            issues.append(
                ValidationIssue(
                    "final-with-outgoing",
                    f"final state '{t.source}' has outgoing transition '{t}'",
                )
            )

    if issues:
        raise ValidationError(name, issues)
    return Sts(name, tuple(order), initial, final_set, transitions)


def reverse_directions(sts: Sts) -> Sts:
    """Swap emissions and receptions; tau transitions are untouched."""
    flipped = tuple(
        t if t.label.is_tau else Transition(t.source, t.label.complement(), t.target)
        for t in sts.transitions
    )
    return Sts(sts.name, sts.states, sts.initial, sts.finals, flipped)


def strip_parameters(sts: Sts) -> Sts:
    """Drop parameter sorts from every observable label."""
    bare = tuple(
        t
        if t.label.is_tau
        else Transition(t.source, Label(t.label.message, t.label.direction), t.target)
        for t in sts.transitions
    )
    return Sts(sts.name, sts.states, sts.initial, sts.finals, bare)


def annotate_finals(sts: Sts) -> Sts:
    """Make termination observable: route every final through a fresh sink.

    Each final state gets an emission of the reserved termination message into
    a new sink state, which becomes the only final.  Inputs that already use
    the marker are rejected.
    """
    for t in sts.transitions:
        if t.label.message == TICK:
            raise ReservedNameCollision(
                f"'{sts.name}' already uses the reserved termination message"
            )
    sink = "done"
    n = 0
    while sink in sts.states:
        sink = f"done{n}"
        n += 1
    extra = tuple(
        Transition(f, Label(TICK, Direction.EMISSION), sink) for f in sts.finals_ordered()
    )
    return Sts(
        sts.name,
        sts.states + (sink,),
        sts.initial,
        frozenset({sink}),
        sts.transitions + extra,
    )


def has_tau_cycle(sts: Sts) -> bool:
    """True when some tau-only path loops back on itself."""
    out = sts.outgoing_map()
    WHITE, GREY, BLACK = 0, 1, 2
    colour = {s: WHITE for s in sts.states}
    for root in sts.states:
        if colour[root] != WHITE:
            continue
        stack: list[tuple[str, Iterator[str]]] = [
            (root, iter([t.target for t in out[root] if t.label.is_tau]))
        ]
        colour[root] = GREY
        while stack:
            state, succ = stack[-1]
            advanced = False
            for nxt in succ:
                if colour[nxt] == GREY:
                    return True
                if colour[nxt] == WHITE:
                    colour[nxt] = GREY
                    stack.append(
                        (nxt, iter([t.target for t in out[nxt] if t.label.is_tau]))
                    )
                    advanced = True
                    break
            if not advanced:
                colour[state] = BLACK
                stack.pop()
    return False


def tau_confluence_reduce(sts: Sts) -> Sts:
    """Collapse states whose only outgoing transition is a tau to another state.

    Such a state behaves exactly like its tau-successor, so it is merged into
    it.  Tau self-loops are left alone.  The result contains no state whose
    unique outgoing transition is a tau to a different state.
    """
    current = sts
    while True:
        out = current.outgoing_map()
        victim: str | None = None
        survivor: str | None = None
        for s in current.states:
            moves = out[s]
            if len(moves) == 1 and moves[0].label.is_tau and moves[0].target != s:
                victim, survivor = s, moves[0].target
                break
        if victim is None:
            return current
        assert survivor is not None
        initial = survivor if current.initial == victim else current.initial
        merged: list[Transition] = []
        seen: set[Transition] = set()
        for t in current.transitions:
            if t.source == victim:
                continue
            target = survivor if t.target == victim else t.target
            nt = Transition(t.source, t.label, target)
            if nt not in seen:
                seen.add(nt)
                merged.append(nt)
        states = tuple(s for s in current.states if s != victim)
        current = Sts(current.name, states, initial, current.finals, tuple(merged))
