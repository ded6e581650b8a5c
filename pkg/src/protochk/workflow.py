"""Workflow activity trees and their translation into transition systems.

The mini-language mirrors the control-flow skeleton of orchestration
languages: sequences, message exchanges, guarded branching, event handlers
with an optional timeout, loops, termination and opaque local code.  Guards,
timeouts and code blocks are not observable, so they all turn into tau
transitions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .model import (
    TAU,
    Direction,
    Label,
    Sts,
    Transition,
    ValidationError,
    ValidationIssue,
    build_sts,
)


@dataclass(frozen=True)
class Receive:
    message: str
    sorts: tuple[str, ...] = ()


@dataclass(frozen=True)
class Send:
    message: str
    sorts: tuple[str, ...] = ()


@dataclass(frozen=True)
class Sequence:
    steps: "tuple[Activity, ...]"


@dataclass(frozen=True)
class IfElse:
    branches: "tuple[Activity, ...]"

    def __post_init__(self) -> None:
        if not self.branches:
            raise ValueError("ifelse needs at least one branch")


@dataclass(frozen=True)
class Listen:
    events: "tuple[tuple[Receive, Activity], ...]"
    delay: "Activity | None" = None

    def __post_init__(self) -> None:
        if not self.events:
            raise ValueError("listen needs at least one event")


@dataclass(frozen=True)
class While:
    body: "Activity"


@dataclass(frozen=True)
class Terminate:
    pass


@dataclass(frozen=True)
class Code:
    pass


Activity = Union[Receive, Send, Sequence, IfElse, Listen, While, Terminate, Code]


@dataclass(frozen=True)
class Workflow:
    name: str
    root: Activity


def can_complete(act: Activity) -> bool:
    """Whether the activity can ever hand control to what follows it."""
    if isinstance(act, Terminate):
        return False
    if isinstance(act, Sequence):
        return all(can_complete(s) for s in act.steps)
    if isinstance(act, IfElse):
        return any(can_complete(b) for b in act.branches)
    if isinstance(act, Listen):
        if any(can_complete(body) for _, body in act.events):
            return True
        return act.delay is not None and can_complete(act.delay)
    # Receive, Send, While (may exit immediately), Code
    return True


def count_taus(act: Activity) -> int:
    """Number of tau transitions the translation of ``act`` contains."""
    if isinstance(act, Sequence):
        return sum(count_taus(s) for s in act.steps)
    if isinstance(act, IfElse):
        return len(act.branches) + sum(count_taus(b) for b in act.branches)
    if isinstance(act, Listen):
        n = sum(count_taus(body) for _, body in act.events)
        if act.delay is not None:
            n += 1 + count_taus(act.delay)
        return n
    if isinstance(act, While):
        return 2 + count_taus(act.body)
    if isinstance(act, (Terminate, Code)):
        return 1
    return 0


class _Builder:
    """Wires activities between preallocated entry/exit states.

    States that turn out to denote the same control point (an empty block's
    entry and exit, for instance) are unified instead of bridged with a tau,
    so the tau count of the output matches ``count_taus`` exactly.
    """

    def __init__(self, name: str) -> None:
        self.name = name
        self.counter = 0
        self.edges: list[tuple[str, Label, str]] = []
        self.extra_finals: list[str] = []
        self.parent: dict[str, str] = {}

    def fresh(self) -> str:
        s = f"s{self.counter}"
        self.counter += 1
        self.parent[s] = s
        return s

    def find(self, s: str) -> str:
        root = s
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[s] != root:
            self.parent[s], s = root, self.parent[s]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the older (smaller-numbered) id for readable output
            if int(ra[1:]) > int(rb[1:]):
                ra, rb = rb, ra
            self.parent[rb] = ra

    def edge(self, src: str, label: Label, dst: str) -> None:
        self.edges.append((src, label, dst))

    def build(self, act: Activity, entry: str, exit_: str) -> None:
        if isinstance(act, (Receive, Send)):
            direction = Direction.RECEPTION if isinstance(act, Receive) else Direction.EMISSION
            self.edge(entry, Label(act.message, direction, act.sorts), exit_)
        elif isinstance(act, Sequence):
            if not act.steps:
                self.union(entry, exit_)
                return
            for i, step in enumerate(act.steps[:-1]):
                if not can_complete(step):
                    raise ValidationError(
                        self.name,
                        [
                            ValidationIssue(
                                "unreachable-code",
                                f"activity {i + 2} of a sequence can never run: "
                                "the preceding activity always terminates",
                            )
                        ],
                    )
            cur = entry
            for step in act.steps[:-1]:
                nxt = self.fresh()
                self.build(step, cur, nxt)
                cur = nxt
            self.build(act.steps[-1], cur, exit_)
        elif isinstance(act, IfElse):
            for branch in act.branches:
                b = self.fresh()
                self.edge(entry, TAU, b)
                self.build(branch, b, exit_)
        elif isinstance(act, Listen):
            for recv, body in act.events:
                h = self.fresh()
                self.edge(entry, Label(recv.message, Direction.RECEPTION, recv.sorts), h)
                self.build(body, h, exit_)
            if act.delay is not None:
                d = self.fresh()
                self.edge(entry, TAU, d)
                self.build(act.delay, d, exit_)
        elif isinstance(act, While):
            b = self.fresh()
            self.edge(entry, TAU, b)
            self.build(act.body, b, entry)
            self.edge(entry, TAU, exit_)
        elif isinstance(act, Terminate):
            f = self.fresh()
            self.edge(entry, TAU, f)
            self.extra_finals.append(f)
        elif isinstance(act, Code):
            self.edge(entry, TAU, exit_)
        else:
            raise TypeError(f"unknown activity {act!r}")


def translate(act: Activity, name: str) -> Sts:
    """Turn an activity tree into a validated transition system."""
    builder = _Builder(name)
    entry = builder.fresh()
    exit_ = builder.fresh()
    builder.build(act, entry, exit_)

    initial = builder.find(entry)
    finals = {builder.find(exit_)}
    finals.update(builder.find(f) for f in builder.extra_finals)
    transitions: list[Transition] = []
    seen: set[Transition] = set()
    for src, label, dst in builder.edges:
        t = Transition(builder.find(src), label, builder.find(dst))
        if t not in seen:
            seen.add(t)
            transitions.append(t)

    # drop control points that can never be reached (a merged-away exit, or
    # the shared exit of an activity that always terminates)
    out: dict[str, list[Transition]] = {}
    for t in transitions:
        out.setdefault(t.source, []).append(t)
    reachable = {initial}
    frontier = [initial]
    while frontier:
        state = frontier.pop()
        for t in out.get(state, ()):
            if t.target not in reachable:
                reachable.add(t.target)
                frontier.append(t.target)
    transitions = [t for t in transitions if t.source in reachable]
    live_finals = [f for f in sorted(finals, key=lambda s: int(s[1:])) if f in reachable]

    return build_sts(name, initial, live_finals, transitions)


def translate_workflow(wf: Workflow) -> Sts:
    return translate(wf.root, wf.name)
