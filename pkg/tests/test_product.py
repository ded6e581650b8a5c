import pytest

from protochk.formats import parse_sts
from protochk.model import TAU, Label, build_sts, emission, reception, Transition
from protochk.product import (
    ProductState,
    StateExplosion,
    StepKind,
    complementary,
    exploration_cap,
    find_deadlocks,
    product_to_sts,
    replay_witness,
    synchronous_product,
)

F1 = parse_sts(
    """
    sts S1  { init s1; final s2; s1 -> s2 : a?; s1 -> s3 : b!; }
    sts S1p { init s1; final s2; s1 -> s2 : a?; s1 -> s3 : tau; s3 -> s4 : b!; }
    sts S2  { init u1; final u2; u1 -> u2 : a!; }
    """
)

F2 = parse_sts(
    """
    sts S1  { init s0; final s2; s0 -> s1 : a!; s1 -> s2 : b!; }
    sts S1p { init s0; final s2; s0 -> s1 : a!; s1 -> s2 : c!; }
    sts S2  { init u0; final u2; u0 -> u1 : a?; u1 -> u2 : c?; }
    """
)

F5 = parse_sts(
    """
    sts S1 { init s0; final f1, f2; s0 -> s : tau; s0 -> t : tau;
             s -> f1 : a!; t -> f2 : b!; }
    sts S2 { init u0; final g1, g2; u0 -> sp : tau; u0 -> u : tau;
             sp -> g1 : b?; u -> g2 : a?; }
    """
)


def test_complementary():
    assert complementary(emission("a", "Int"), reception("a", "Int"))
    assert not complementary(emission("a", "Int"), reception("a", "String"))
    assert not complementary(emission("a"), emission("a"))
    assert not complementary(TAU, reception("a"))
    assert not complementary(TAU, TAU)


def test_product_sync_and_unfired_branch():
    p = synchronous_product(F1.select("S1"), F1.select("S2"))
    assert set(p.states) == {ProductState("s1", "u1"), ProductState("s2", "u2")}
    (step,) = p.steps
    assert step.kind is StepKind.SYNC and step.message == "a"
    assert p.finals == frozenset({ProductState("s2", "u2")})
    assert p.deadlocks == ()


def test_product_tau_interleaves_to_deadlock():
    p = synchronous_product(F1.select("S1p"), F1.select("S2"))
    assert ProductState("s3", "u1") in p.deadlocks
    kinds = {s.kind for s in p.steps if s.source == p.initial}
    assert kinds == {StepKind.SYNC, StepKind.TAU_LEFT}


def test_single_state_product():
    a = build_sts("A", "s0", ["s0"], [])
    b = build_sts("B", "u0", ["u0"], [])
    p = synchronous_product(a, b)
    assert p.states == (ProductState("s0", "u0"),)
    assert p.finals and not p.deadlocks and not p.steps


def test_deadlock_witnesses_f2():
    p = synchronous_product(F2.select("S1"), F2.select("S2"))
    witnesses = find_deadlocks(p)
    assert set(witnesses) == {ProductState("s1", "u1")}
    (trace,) = witnesses.values()
    assert [s.kind for s in trace.steps] == [StepKind.SYNC]
    assert trace.steps[0].message == "a"
    assert not find_deadlocks(synchronous_product(F2.select("S1p"), F2.select("S2")))


def test_deadlock_witness_f5_one_tau_each_side():
    p = synchronous_product(F5.select("S1"), F5.select("S2"))
    witnesses = find_deadlocks(p)
    assert ProductState("s", "sp") in witnesses
    trace = witnesses[ProductState("s", "sp")]
    assert sorted(s.kind.value for s in trace.steps) == ["tau-left", "tau-right"]


def test_replay_witness_accepts_real_and_rejects_fake():
    left, right = F2.select("S1"), F2.select("S2")
    p = synchronous_product(left, right)
    trace = find_deadlocks(p)[ProductState("s1", "u1")]
    assert replay_witness(left, right, trace) == ProductState("s1", "u1")
    from protochk.product import ProductStep, WitnessTrace

    fake = WitnessTrace(
        (
            ProductStep(
                StepKind.SYNC,
                ProductState("s0", "u0"),
                ProductState("s2", "u2"),
                message="b",
            ),
        )
    )
    with pytest.raises(ValueError, match="not enabled"):
        replay_witness(left, right, fake)


def test_all_states_reachable_and_tau_never_deadlocks():
    for doc, names in ((F1, ("S1p", "S2")), (F5, ("S1", "S2"))):
        p = synchronous_product(doc.select(names[0]), doc.select(names[1]))
        seen = {p.initial}
        frontier = [p.initial]
        while frontier:
            state = frontier.pop()
            for step in p.outgoing(state):
                if step.target not in seen:
                    seen.add(step.target)
                    frontier.append(step.target)
        assert seen == set(p.states)
        for state in p.deadlocks:
            assert not p.outgoing(state)


def test_mirror_symmetry():
    left, right = F5.select("S1"), F5.select("S2")
    p = synchronous_product(left, right)
    q = synchronous_product(right, left)
    flip = {StepKind.TAU_LEFT: StepKind.TAU_RIGHT, StepKind.TAU_RIGHT: StepKind.TAU_LEFT}
    assert {ProductState(s.right, s.left) for s in p.states} == set(q.states)
    assert {ProductState(s.right, s.left) for s in p.deadlocks} == set(q.deadlocks)
    mirrored = {
        (flip.get(s.kind, s.kind), s.source.right, s.source.left, s.message) for s in p.steps
    }
    assert mirrored == {(s.kind, s.source.left, s.source.right, s.message) for s in q.steps}


def test_divergence_warning_on_tau_cycle():
    looper = build_sts(
        "L", "s0", ["f"], [Transition("s0", TAU, "s0"), Transition("s0", emission("a"), "f")]
    )
    quiet = build_sts("Q", "u0", ["g"], [Transition("u0", reception("a"), "g")])
    p = synchronous_product(looper, quiet)
    assert any("L" in w and "tau cycle" in w for w in p.divergence_warnings)
    assert not synchronous_product(quiet, quiet).divergence_warnings


def test_state_cap(monkeypatch):
    with pytest.raises(StateExplosion):
        synchronous_product(F5.select("S1"), F5.select("S2"), max_states=2)
    monkeypatch.setenv("PROTOCHK_MAX_STATES", "3")
    assert exploration_cap() == 3
    with pytest.raises(StateExplosion):
        synchronous_product(F5.select("S1"), F5.select("S2"))
    monkeypatch.setenv("PROTOCHK_MAX_STATES", "oops")
    with pytest.raises(ValueError):
        exploration_cap()


def test_product_to_sts():
    p = synchronous_product(F2.select("S1p"), F2.select("S2"))
    sts = product_to_sts(p, "P")
    assert sts.initial == "s0__u0"
    assert [t.label for t in sts.transitions] == [emission("a"), emission("c")]
    assert sts.finals == frozenset({"s2__u2"})
    dead = synchronous_product(F2.select("S1"), F2.select("S2"))
    with pytest.raises(ValueError, match="aut"):
        product_to_sts(dead, "P")
