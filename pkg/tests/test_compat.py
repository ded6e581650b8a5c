import pytest

from protochk.compat import (
    CompatNotion,
    check_compat,
    check_deadlock_free,
    check_unidirectional_complementarity,
    check_unspecified_receptions,
    stable_states,
)
from protochk.formats import parse_sts
from protochk.model import ComplementDirection
from protochk.product import ProductState, StepKind, replay_witness

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
F3 = parse_sts(
    """
    sts S1  { init s0; final s1; s0 -> s1 : a!; }
    sts S1p { init s0; final s2; s0 -> s1 : a!; s1 -> s2 : c!; }
    sts S2  { init u0; final u1, u2; u0 -> u1 : a?; u0 -> u2 : b?; }
    """
)
F4 = parse_sts(
    """
    sts S1  { init s0; final s1; s0 -> s1 : a!; }
    sts S1p { init s0; final s2, s3; s0 -> s1 : a!; s1 -> s2 : c?; s1 -> s3 : b?; }
    sts S2  { init u0; final u2; u0 -> u1 : a?; u1 -> u2 : c!; }
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
F6 = parse_sts(
    """
    sts S1 { init s0; final f; s0 -> p1 : tau; s0 -> p2 : tau;
             p1 -> f : a!; p1 -> f : b!; p2 -> f : a!; }
    sts S2 { init u0; final g; u0 -> q1 : tau; u0 -> q2 : tau;
             q1 -> g : a?; q1 -> g : b?; q2 -> g : a?; }
    """
)


def test_stable_states():
    sts = parse_sts(
        "sts A { init s0; final f; s0 -> s1 : tau; s0 -> s2 : tau; s1 -> f : a!; s2 -> f : b!; }"
    ).select()
    assert stable_states(sts, "s1") == {"s1"}
    assert stable_states(sts, "s0") == {"s1", "s2"}
    loop = parse_sts("sts L { init s0; final f; s0 -> s0 : tau; }").select()
    assert stable_states(loop, "s0") == frozenset()


def test_f1_deadlock_freeness():
    assert check_deadlock_free(F1.select("S1"), F1.select("S2")).holds
    verdict = check_deadlock_free(F1.select("S1p"), F1.select("S2"))
    assert not verdict.holds
    assert [s.kind for s in verdict.witness.steps] == [StepKind.TAU_LEFT]
    assert verdict.witness.end == ProductState("s3", "u1")


def test_f2_deadlock_freeness():
    verdict = check_deadlock_free(F2.select("S1"), F2.select("S2"))
    assert not verdict.holds
    (step,) = verdict.witness.steps
    assert step.kind is StepKind.SYNC and step.message == "a"
    assert check_deadlock_free(F2.select("S1p"), F2.select("S2")).holds


def test_f3_unidirectional_complementarity():
    verdict = check_unidirectional_complementarity(F3.select("S1"), F3.select("S2"))
    assert verdict.holds and verdict.direction is ComplementDirection.LEFT_BY_RIGHT
    bad = check_unidirectional_complementarity(F3.select("S1p"), F3.select("S2"))
    assert not bad.holds and bad.direction is None


def test_f4_unspecified_receptions():
    verdict = check_unspecified_receptions(F4.select("S1"), F4.select("S2"))
    assert not verdict.holds
    assert any("c!" in w for w in verdict.warnings)
    assert check_unspecified_receptions(F4.select("S1p"), F4.select("S2")).holds


def test_f5_deadlock():
    verdict = check_deadlock_free(F5.select("S1"), F5.select("S2"))
    assert not verdict.holds
    assert verdict.witness.end == ProductState("s", "sp")


def test_f6_internal_choice_breaks_reception():
    verdict = check_unspecified_receptions(F6.select("S1"), F6.select("S2"))
    assert not verdict.holds
    assert verdict.witness.end == ProductState("p1", "q2")
    assert any("b!" in w and "(p1,q2)" in w for w in verdict.warnings)


def test_unstable_receiver_checked_at_descendants_only():
    # receiver resolves an internal choice before the reception: fine
    doc = parse_sts(
        """
        sts A { init s0; final f; s0 -> f : m!; }
        sts B { init u0; final g; u0 -> u1 : tau; u1 -> g : m?; }
        """
    )
    assert check_unspecified_receptions(doc.select("A"), doc.select("B")).holds


def test_divergent_receiver_is_a_violation():
    doc = parse_sts(
        """
        sts A { init s0; final f; s0 -> f : m!; }
        sts B { init u0; final g; u0 -> u0 : tau; }
        """
    )
    verdict = check_unspecified_receptions(doc.select("A"), doc.select("B"))
    assert not verdict.holds
    assert any("diverges" in w for w in verdict.warnings)
    # for UC only the direction that needs the divergent complementer fails;
    # the other direction holds vacuously (the divergent side offers nothing)
    uc = check_unidirectional_complementarity(doc.select("A"), doc.select("B"))
    assert uc.holds and uc.direction is ComplementDirection.RIGHT_BY_LEFT
    assert any("left-by-right fails" in w and "diverges" in w for w in uc.warnings)


def test_containments_ur_and_uc_imply_df():
    pairs = [
        (F1, "S1", "S2"),
        (F1, "S1p", "S2"),
        (F2, "S1p", "S2"),
        (F3, "S1", "S2"),
        (F4, "S1p", "S2"),
        (F6, "S1", "S2"),
    ]
    for doc, x, y in pairs:
        a, b = doc.select(x), doc.select(y)
        if check_unspecified_receptions(a, b).holds:
            assert check_deadlock_free(a, b).holds
        if check_unidirectional_complementarity(a, b).holds:
            assert check_deadlock_free(a, b).holds


def test_mirror_symmetry():
    a, b = F4.select("S1"), F4.select("S2")
    assert check_deadlock_free(a, b).holds == check_deadlock_free(b, a).holds
    assert (
        check_unspecified_receptions(a, b).holds
        == check_unspecified_receptions(b, a).holds
    )
    uc_ab = check_unidirectional_complementarity(F3.select("S1"), F3.select("S2"))
    uc_ba = check_unidirectional_complementarity(F3.select("S2"), F3.select("S1"))
    assert uc_ab.holds == uc_ba.holds
    assert uc_ab.direction is ComplementDirection.LEFT_BY_RIGHT
    assert uc_ba.direction is ComplementDirection.RIGHT_BY_LEFT


def test_failure_witnesses_replay():
    cases = [
        (F1.select("S1p"), F1.select("S2"), check_deadlock_free),
        (F2.select("S1"), F2.select("S2"), check_deadlock_free),
        (F4.select("S1"), F4.select("S2"), check_unspecified_receptions),
        (F6.select("S1"), F6.select("S2"), check_unspecified_receptions),
        (F3.select("S1p"), F3.select("S2"), check_unidirectional_complementarity),
    ]
    for a, b, check in cases:
        verdict = check(a, b)
        assert not verdict.holds and verdict.witness is not None
        assert replay_witness(a, b, verdict.witness) == verdict.witness.end


def test_dispatcher():
    a, b = F2.select("S1p"), F2.select("S2")
    assert check_compat(a, b, CompatNotion.DEADLOCK_FREE).holds
    assert check_compat(a, b, CompatNotion.UNSPECIFIED_RECEPTIONS).holds
    assert check_compat(a, b, CompatNotion.UNIDIRECTIONAL_COMPLEMENTARITY).holds


def test_livelock_warning():
    doc = parse_sts(
        """
        sts A { init s0; final f; s0 -> s0 : tau; }
        sts B { init u0; final g; }
        """
    )
    verdict = check_deadlock_free(doc.select("A"), doc.select("B"))
    assert verdict.holds  # never stuck, it can always loop
    assert any("never reach a final" in w for w in verdict.warnings)
    assert any("tau cycle" in w for w in verdict.warnings)
