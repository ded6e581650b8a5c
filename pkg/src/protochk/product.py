"""Synchronous product of two transition systems.

Two services synchronize when one emits and the other receives the same
message with identical parameter sorts; tau moves of either side interleave
independently.  A product state is final only when both sides are final, and
a reachable non-final state with no outgoing step is a deadlock.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from typing import NamedTuple

from .model import Direction, Label, Sts, Transition, build_sts, has_tau_cycle

DEFAULT_MAX_STATES = 1_000_000
_MAX_STATES_ENV = "PROTOCHK_MAX_STATES"


class StateExplosion(RuntimeError):
    """Exploration exceeded the configured state cap."""


def exploration_cap(requested: int | None = None) -> int:
    """The effective state cap: explicit argument, else env override, else default."""
    if requested is not None:
        return requested
    env = os.environ.get(_MAX_STATES_ENV)
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise ValueError(f"{_MAX_STATES_ENV} must be an integer, got {env!r}") from exc
    return DEFAULT_MAX_STATES


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class ProductState(NamedTuple):
    left: str
    right: str

    def __str__(self) -> str:
        return f"({self.left},{self.right})"


class StepKind(enum.Enum):
    SYNC = "sync"
    TAU_LEFT = "tau-left"
    TAU_RIGHT = "tau-right"


@dataclass(frozen=True)
class ProductStep:
    kind: StepKind
    source: ProductState
    target: ProductState
    message: str | None = None
    sorts: tuple[str, ...] = ()
    emitter: Side | None = None


@dataclass(frozen=True)
class WitnessTrace:
    """A chained sequence of product steps starting at the initial state."""

    steps: tuple[ProductStep, ...]

    def __post_init__(self) -> None:
        for a, b in zip(self.steps, self.steps[1:]):
            if a.target != b.source:
                raise ValueError("witness steps do not chain")

    @property
    def end(self) -> ProductState:
        return self.steps[-1].target if self.steps else ProductState("", "")

    def __len__(self) -> int:
        return len(self.steps)


def complementary(l1: Label, l2: Label) -> bool:
    """One emission, one reception, same message, same ordered sorts."""
    if l1.is_tau or l2.is_tau:
        return False
    return (
        l1.message == l2.message
        and l1.sorts == l2.sorts
        and l1.direction is not l2.direction
    )


@dataclass
class ProductLts:
    left_name: str
    right_name: str
    states: tuple[ProductState, ...]  # breadth-first discovery order, initial first
    initial: ProductState
    steps: tuple[ProductStep, ...]
    finals: frozenset[ProductState]
    deadlocks: tuple[ProductState, ...]
    divergence_warnings: tuple[str, ...]
    _out: dict[ProductState, list[ProductStep]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        self._out = {s: [] for s in self.states}
        for step in self.steps:
            self._out[step.source].append(step)

    def outgoing(self, state: ProductState) -> list[ProductStep]:
        return self._out[state]


def _sync_key(step: ProductStep) -> tuple:
    return (step.message or "", step.sorts, step.emitter.value if step.emitter else "", step.target)


def _expand(
    state: ProductState,
    left_out: dict[str, list[Transition]],
    right_out: dict[str, list[Transition]],
) -> list[ProductStep]:
    """Outgoing product steps in canonical order: syncs, then left tau, then right tau."""
    syncs: list[ProductStep] = []
    for tl in left_out[state.left]:
        if tl.label.is_tau:
            continue
        for tr in right_out[state.right]:
            if complementary(tl.label, tr.label):
                emitter = Side.LEFT if tl.label.is_emission else Side.RIGHT
                syncs.append(
                    ProductStep(
                        StepKind.SYNC,
                        state,
                        ProductState(tl.target, tr.target),
                        message=tl.label.message,
                        sorts=tl.label.sorts,
                        emitter=emitter,
                    )
                )
    syncs.sort(key=_sync_key)
    taus_left = [
        ProductStep(StepKind.TAU_LEFT, state, ProductState(t.target, state.right))
        for t in left_out[state.left]
        if t.label.is_tau
    ]
    taus_right = [
        ProductStep(StepKind.TAU_RIGHT, state, ProductState(state.left, t.target))
        for t in right_out[state.right]
        if t.label.is_tau
    ]
    taus_left.sort(key=lambda s: s.target)
    taus_right.sort(key=lambda s: s.target)
    return syncs + taus_left + taus_right


def synchronous_product(left: Sts, right: Sts, max_states: int | None = None) -> ProductLts:
    """Breadth-first reachable closure from the pair of initial states."""
    cap = exploration_cap(max_states)
    left_out = left.outgoing_map()
    right_out = right.outgoing_map()

    initial = ProductState(left.initial, right.initial)
    order: list[ProductState] = [initial]
    discovered = {initial}
    steps: list[ProductStep] = []
    deadlocks: list[ProductState] = []
    queue_pos = 0
    while queue_pos < len(order):
        state = order[queue_pos]
        queue_pos += 1
        moves = _expand(state, left_out, right_out)
        steps.extend(moves)
        if not moves and not (left.is_final(state.left) and right.is_final(state.right)):
            deadlocks.append(state)
        for step in moves:
            if step.target not in discovered:
                if len(discovered) >= cap:
                    raise StateExplosion(
                        f"product of '{left.name}' and '{right.name}' exceeds {cap} states"
                    )
                discovered.add(step.target)
                order.append(step.target)

    finals = frozenset(
        s for s in order if left.is_final(s.left) and right.is_final(s.right)
    )
    warnings = []
    for side, sts in (("left", left), ("right", right)):
        if has_tau_cycle(sts):
            warnings.append(
                f"{side} service '{sts.name}' can loop internally forever (tau cycle)"
            )
    return ProductLts(
        left.name,
        right.name,
        tuple(order),
        initial,
        tuple(steps),
        finals,
        tuple(deadlocks),
        tuple(warnings),
    )


def shortest_paths(product: ProductLts) -> dict[ProductState, WitnessTrace]:
    """Shortest witness trace to every reachable product state.

    Breadth-first over steps in construction order, so ties resolve to the
    sync-first canonical ordering.
    """
    parent: dict[ProductState, ProductStep | None] = {product.initial: None}
    frontier = [product.initial]
    while frontier:
        nxt: list[ProductState] = []
        for state in frontier:
            for step in product.outgoing(state):
                if step.target not in parent:
                    parent[step.target] = step
                    nxt.append(step.target)
        frontier = nxt

    traces: dict[ProductState, WitnessTrace] = {}
    for state in product.states:
        chain: list[ProductStep] = []
        cursor = state
        while True:
            step = parent[cursor]
            if step is None:
                break
            chain.append(step)
            cursor = step.source
        traces[state] = WitnessTrace(tuple(reversed(chain)))
    return traces


def find_deadlocks(product: ProductLts) -> dict[ProductState, WitnessTrace]:
    """Deadlock states with a shortest witness each, in discovery order."""
    traces = shortest_paths(product)
    return {state: traces[state] for state in product.deadlocks}


def replay_witness(left: Sts, right: Sts, trace: WitnessTrace) -> ProductState:
    """Re-execute a witness against the raw systems, validating every step.

    Returns the state reached.  Raises ValueError when a step is not actually
    enabled, making witnesses independently checkable.
    """
    left_out = left.outgoing_map()
    right_out = right.outgoing_map()
    current = ProductState(left.initial, right.initial)
    for i, step in enumerate(trace.steps):
        if step.source != current:
            raise ValueError(f"step {i + 1} starts at {step.source}, expected {current}")
        if step.kind is StepKind.TAU_LEFT:
            ok = step.target.right == current.right and any(
                t.label.is_tau and t.target == step.target.left
                for t in left_out[current.left]
            )
        elif step.kind is StepKind.TAU_RIGHT:
            ok = step.target.left == current.left and any(
                t.label.is_tau and t.target == step.target.right
                for t in right_out[current.right]
            )
        else:
            ok = any(
                complementary(tl.label, tr.label)
                and tl.label.message == step.message
                and tl.label.sorts == step.sorts
                and tl.target == step.target.left
                and tr.target == step.target.right
                for tl in left_out[current.left]
                if not tl.label.is_tau
                for tr in right_out[current.right]
                if not tr.label.is_tau
            )
        if not ok:
            raise ValueError(f"step {i + 1} ({step.kind.value}) is not enabled at {current}")
        current = step.target
    return current


def product_to_sts(product: ProductLts, name: str) -> Sts:
    """Render a product as a plain STS; sync steps become emissions.

    Fails when the product has no final state, since the model requires at
    least one (export such products as .aut instead).
    """
    if not product.finals:
        raise ValueError(
            "product has no final state and cannot be written as .sts; use .aut output"
        )
    used: set[str] = set()
    names: dict[ProductState, str] = {}
    for state in product.states:
        base = f"{state.left}__{state.right}"
        candidate = base
        n = 0
        while candidate in used:
            candidate = f"{base}_{n}"
            n += 1
        used.add(candidate)
        names[state] = candidate

    transitions = []
    for step in product.steps:
        if step.kind is StepKind.SYNC:
            assert step.message is not None
            label = Label(step.message, Direction.EMISSION, step.sorts)
        else:
            label = Label()
        transitions.append(Transition(names[step.source], label, names[step.target]))
    finals = [names[s] for s in product.states if s in product.finals]
    return build_sts(name, names[product.initial], finals, transitions)
