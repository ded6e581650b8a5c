import random
from pathlib import Path

import pytest

from protochk.compat import CompatNotion, check_compat
from protochk.equiv import RelationKind, check_relation
from protochk.formats import parse_sts
from protochk.model import build_sts, emission, has_tau_cycle, Transition
from protochk.testkit import (
    GenConfig,
    SizeLimit,
    drop_spare_emission,
    duplicate_state,
    evaluate,
    fixture,
    fixtures,
    generate_sts,
    grow_receptions,
    insert_inert_tau,
    oracle_bisim,
    oracle_compat,
    rename_states,
    trace_membership,
)
from protochk.model import annotate_finals, reverse_directions, strip_parameters


def test_eleven_fixtures_all_verified():
    corpus = fixtures()
    assert len(corpus) == 11
    for fx in corpus:
        rows = evaluate(fx)
        assert rows, fx.ident
        for row in rows:
            assert row.ok, f"{fx.ident}: {row.expectation.label} -> {row.verdict}"


def test_fixture_lookup():
    assert fixture("fig7").ident == "fig7"
    with pytest.raises(KeyError):
        fixture("fig12")


def test_shipped_fixture_files_match_corpus():
    root = Path(__file__).resolve().parent.parent / "fixtures"
    for fx in fixtures():
        path = root / f"{fx.ident}.sts"
        text = path.read_text()
        shipped = parse_sts(text)
        expected = fx.document()
        assert shipped.names() == expected.names(), fx.ident
        for name in expected.names():
            assert shipped.select(name) == expected.select(name), (fx.ident, name)


def test_fixture_compat_rows_confirmed_by_brute_force():
    for fx in fixtures():
        doc = fx.document()
        for exp in fx.expectations:
            if exp.check != "compat":
                continue
            got = oracle_compat(doc.select(exp.left), doc.select(exp.right), exp.notion)
            assert got == exp.holds, f"{fx.ident}: {exp.label}"


def test_fixture_relation_rows_confirmed_by_oracle():
    for fx in fixtures():
        doc = fx.document()
        for exp in fx.expectations:
            if exp.check != "relation":
                continue
            left = doc.select(exp.left)
            right = doc.select(exp.right)
            if exp.mirror_right:
                right = reverse_directions(strip_parameters(right))
            assert oracle_bisim(left, right, exp.relation) == exp.holds, (
                f"{fx.ident}: {exp.label}"
            )


def test_generator_is_deterministic_and_valid():
    cfg = GenConfig(max_states=7, max_transitions=12, seed=41)
    assert generate_sts(cfg) == generate_sts(cfg)
    for seed in range(200):
        sts = generate_sts(GenConfig(max_states=8, max_transitions=14, seed=seed))
        assert sts.finals  # build_sts already validated the rest


def test_generator_tau_acyclic_flag():
    for seed in range(150):
        cfg = GenConfig(max_states=6, tau_probability=0.6, tau_acyclic=True, seed=seed)
        assert not has_tau_cycle(generate_sts(cfg))


def test_rename_and_duplicate_preserve_strong():
    rng = random.Random(7)
    for seed in range(40):
        x = generate_sts(GenConfig(max_states=5, tau_probability=0.3, seed=seed))
        assert check_relation(x, rename_states(x, rng), RelationKind.STRONG).holds
        assert check_relation(x, duplicate_state(x, rng), RelationKind.STRONG).holds


def test_inert_tau_preserves_weak_and_branching():
    rng = random.Random(11)
    for seed in range(40):
        x = generate_sts(GenConfig(max_states=5, tau_probability=0.3, seed=seed))
        y = insert_inert_tau(x, rng)
        assert check_relation(x, y, RelationKind.WEAK).holds
        assert check_relation(x, y, RelationKind.BRANCHING).holds


def test_subtype_mutators_stay_subtypes():
    rng = random.Random(23)
    for seed in range(40):
        old = generate_sts(GenConfig(max_states=5, tau_probability=0.2, seed=seed))
        grown = grow_receptions(old, rng)
        slimmed = drop_spare_emission(old, rng)
        assert check_relation(grown, old, RelationKind.SUBTYPE).holds
        assert check_relation(slimmed, old, RelationKind.SUBTYPE).holds


def test_oracle_reflexive_and_strong_weak_split():
    doc = parse_sts(
        """
        sts Plain { init s0; final s2; s0 -> s1 : a!; s1 -> s2 : b!; }
        sts Lazy  { init t0; final t3; t0 -> t1 : tau; t1 -> t2 : a!; t2 -> t3 : b!; }
        """
    )
    plain, lazy = doc.select("Plain"), doc.select("Lazy")
    for kind in RelationKind:
        assert oracle_bisim(plain, plain, kind), kind
    assert not oracle_bisim(plain, lazy, RelationKind.STRONG)
    assert oracle_bisim(plain, lazy, RelationKind.WEAK)


def test_oracle_size_limit():
    n = 101
    states = [f"s{i}" for i in range(n)]
    chain = build_sts(
        "Long",
        "s0",
        [states[-1]],
        [Transition(states[i], emission("a"), states[i + 1]) for i in range(n - 1)],
        states=states,
    )
    with pytest.raises(SizeLimit):
        oracle_bisim(chain, chain, RelationKind.STRONG)
    with pytest.raises(SizeLimit):
        oracle_compat(chain, chain, CompatNotion.DEADLOCK_FREE)


def test_trace_membership_follows_annotated_language():
    fx = fixture("fig7")
    s1 = annotate_finals(fx.system("S1"))
    s1p = annotate_finals(fx.system("S1p"))
    assert trace_membership(s1, ("a!",))
    assert not trace_membership(s1p, ("a!",))
    assert trace_membership(s1p, ("c!",))
    assert not trace_membership(s1, ("a!", "a!"))


def test_oracles_agree_with_production_on_random_pairs():
    for seed in range(60):
        rng = random.Random(seed)
        x = generate_sts(GenConfig(max_states=4, tau_probability=0.3, seed=seed))
        variant = seed % 4
        if variant == 0:
            y = generate_sts(GenConfig(max_states=4, tau_probability=0.3, seed=seed + 1000))
        elif variant == 1:
            y = insert_inert_tau(x, rng)
        elif variant == 2:
            y = rename_states(x, rng)
        else:
            y = duplicate_state(x, rng)
        for kind in RelationKind:
            assert (
                check_relation(x, y, kind).holds == oracle_bisim(x, y, kind)
            ), (seed, kind)


def test_oracle_compat_agrees_with_production_on_random_pairs():
    notions = list(CompatNotion)
    for seed in range(60):
        x = generate_sts(GenConfig(max_states=4, tau_probability=0.2, seed=seed))
        y = reverse_directions(
            generate_sts(GenConfig(max_states=4, tau_probability=0.2, seed=seed + 500))
        )
        for notion in notions:
            assert (
                check_compat(x, y, notion).holds == oracle_compat(x, y, notion)
            ), (seed, notion)
