"""End-to-end checks for the command line: exit codes, JSON shape, goldens."""

import io
import json
import subprocess
import sys
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import jsonschema
import pytest

from protochk.cli import main
from protochk.formats import parse_sts, print_sts
from protochk.model import reverse_directions, strip_parameters
from protochk.testkit import fixtures

ROOT = Path(__file__).resolve().parents[1]
FIXDIR = ROOT / "fixtures"
GOLDEN = ROOT / "tests" / "golden"
SCHEMA = json.loads(
    (ROOT / "src" / "protochk" / "schemas" / "report.schema.json").read_text()
)


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


def check_schema(text):
    jsonschema.Draft202012Validator(SCHEMA).validate(json.loads(text))


def _slug(label: str) -> str:
    out = []
    for ch in label.lower():
        out.append(ch if ch.isalnum() else "-")
    return "-".join(part for part in "".join(out).split("-") if part)


def fixture_invocations(scratch: Path):
    """One CLI call per bundled expectation row, plus the corpus summary.

    Mirror comparisons (fig6) need the flipped partner materialized as a
    file first; those go into ``scratch``.  Returns
    ``(golden_name, argv, expected_exit)`` triples.
    """
    calls = []
    for fx in fixtures():
        path = FIXDIR / f"{fx.ident}.sts"
        for exp in fx.expectations:
            left = f"{path}::{exp.left}"
            if exp.mirror_right:
                mirrored = reverse_directions(strip_parameters(fx.system(exp.right)))
                mirror_path = scratch / f"{fx.ident}_mirror.sts"
                mirror_path.write_text(print_sts(mirrored), encoding="utf-8")
                right = f"{mirror_path}::{exp.right}"
            else:
                right = f"{path}::{exp.right}"
            if exp.check == "compat":
                argv = ["check", "compat", "--notion", exp.notion.value,
                        left, right, "--json"]
            else:
                argv = ["check", "equiv", "--relation", exp.relation.value,
                        left, right, "--json"]
            name = f"{fx.ident}-{_slug(exp.label)}.json"
            calls.append((name, argv, 0 if exp.holds else 1))
    calls.append(("fixtures-verify.json", ["fixtures", "verify", "--json"], 0))
    return calls


def test_fixture_goldens_are_deterministic_and_valid(tmp_path):
    for name, argv, expected_code in fixture_invocations(tmp_path):
        code, out, _ = run(argv)
        code2, out2, _ = run(argv)
        assert out == out2, f"{name}: two identical invocations disagreed"
        assert code == code2 == expected_code, f"{name}: exit {code}"
        check_schema(out)
        golden = (GOLDEN / name).read_text(encoding="utf-8")
        assert out == golden, f"{name}: output drifted from golden file"


def test_golden_directory_has_no_strays(tmp_path):
    expected = {name for name, _, _ in fixture_invocations(tmp_path)}
    assert {p.name for p in GOLDEN.glob("*.json")} == expected


def test_selector_defaults_to_first_definition():
    code, out, _ = run(["check", "equiv", "--relation", "strong",
                        str(FIXDIR / "fig1.sts"), f"{FIXDIR / 'fig1.sts'}::S1",
                        "--json"])
    assert code == 0
    assert json.loads(out)["inputs"] == ["S1", "S1"]


def test_unknown_selector_is_a_usage_error(capsys):
    code, _, err = run(["check", "compat", "--notion", "df",
                        f"{FIXDIR / 'fig1.sts'}::Nope", str(FIXDIR / "fig1.sts")])
    assert code == 2
    assert "error:" in err


def test_missing_file_is_a_usage_error():
    code, _, err = run(["check", "compat", "--notion", "df",
                        "/no/such/file.sts", str(FIXDIR / "fig1.sts")])
    assert code == 2
    assert "error:" in err


def test_parse_error_exits_two(tmp_path):
    bad = tmp_path / "bad.sts"
    bad.write_text("sts Broken { init ; }", encoding="utf-8")
    code, _, err = run(["check", "compat", "--notion", "df",
                        str(bad), str(FIXDIR / "fig1.sts")])
    assert code == 2
    assert "error:" in err


def test_state_cap_exits_three():
    code, _, err = run(["check", "compat", "--notion", "df",
                        f"{FIXDIR / 'fig1.sts'}::S1", f"{FIXDIR / 'fig1.sts'}::S2",
                        "--max-states", "1"])
    assert code == 3
    assert "error:" in err


def test_failing_compat_reports_witness_steps():
    code, out, _ = run(["check", "compat", "--notion", "df",
                        f"{FIXDIR / 'fig1.sts'}::S1p", f"{FIXDIR / 'fig1.sts'}::S2",
                        "--json"])
    assert code == 1
    report = json.loads(out)
    assert report["holds"] is False
    assert report["witness"], "a failing check must carry a replayable trace"
    for step in report["witness"]:
        assert step["kind"] in {"sync", "tau-left", "tau-right"}
        assert len(step["from"]) == len(step["to"]) == 2
        assert (step["kind"] == "sync") == ("message" in step)


def test_human_witness_narrates_the_failure():
    code, out, _ = run(["check", "compat", "--notion", "df",
                        f"{FIXDIR / 'fig2.sts'}::S1", f"{FIXDIR / 'fig2.sts'}::S2"])
    assert code == 1
    assert "emits" in out and "receives" in out


def test_witness_flag_is_harmless_when_the_check_holds():
    code, out, _ = run(["check", "compat", "--notion", "df", "--witness",
                        f"{FIXDIR / 'fig1.sts'}::S1", f"{FIXDIR / 'fig1.sts'}::S2"])
    assert code == 0
    assert "holds" in out


def test_annotation_flags_change_the_verdict(tmp_path):
    pair = tmp_path / "pair.sts"
    pair.write_text(
        "sts Done { init s0; final s1; s0 -> s1 : a!; }\n"
        "sts Dead { init t0; final t2; t0 -> t1 : a!; }\n",
        encoding="utf-8",
    )
    with_marker, _, _ = run(["check", "equiv", "--relation", "trace",
                             f"{pair}::Done", f"{pair}::Dead"])
    without, _, _ = run(["check", "equiv", "--relation", "trace",
                         "--no-final-annotation", f"{pair}::Done", f"{pair}::Dead"])
    assert (with_marker, without) == (1, 0)
    both_flags, _, _ = run(["check", "equiv", "--relation", "trace",
                            "--final-annotation", "--no-final-annotation",
                            f"{pair}::Done", f"{pair}::Dead"])
    assert both_flags == 2


def test_subst_report_json_shape():
    fig9 = str(FIXDIR / "fig9.sts")
    code, out, _ = run(["check", "subst", "--old", f"{fig9}::S1",
                        "--new", f"{fig9}::S1p", "--partner", f"{fig9}::S2",
                        "--notion", "df", "--relation", "subtype", "--json"])
    assert code == 1
    report = json.loads(out)
    check_schema(out)
    assert report["recommendation"] == "reject"
    assert report["formulations"] == {
        "relation": True, "recomposition": False, "before": True, "after": False,
    }


def test_subst_no_caveat_drops_only_the_caveat():
    fig9 = str(FIXDIR / "fig9.sts")
    argv = ["check", "subst", "--old", f"{fig9}::S1", "--new", f"{fig9}::S1p",
            "--partner", f"{fig9}::S2", "--notion", "df", "--json"]
    _, plain, _ = run(argv)
    _, trimmed, _ = run(argv + ["--no-caveat"])
    full = json.loads(plain)["warnings"]
    kept = json.loads(trimmed)["warnings"]
    assert len(kept) == len(full) - 1
    assert all(w in full for w in kept)


def test_subst_via_compat_answers_recomposition_only():
    fig7 = str(FIXDIR / "fig7.sts")
    code, out, _ = run(["check", "subst", "--old", f"{fig7}::S1",
                        "--new", f"{fig7}::S1p", "--partner", f"{fig7}::S2",
                        "--via-compat", "--json"])
    assert code == 0
    report = json.loads(out)
    check_schema(out)
    assert report["holds"] is True
    assert "relation" not in report and "recommendation" not in report


def test_product_aut_and_sts_outputs(tmp_path):
    fig1 = str(FIXDIR / "fig1.sts")
    aut = tmp_path / "out.aut"
    code, _, err = run(["product", f"{fig1}::S1", f"{fig1}::S2", "-o", str(aut)])
    assert code == 0
    assert aut.read_text().startswith("des (")
    assert "wrote" in err

    sts_out = tmp_path / "out.sts"
    assert run(["product", f"{fig1}::S1", f"{fig1}::S2", "-o", str(sts_out)])[0] == 0
    doc = parse_sts(sts_out.read_text())
    assert doc.select().name == "S1_x_S2"

    code, _, err = run(["product", f"{fig1}::S1", f"{fig1}::S2",
                        "-o", str(tmp_path / "out.txt")])
    assert code == 2


def test_product_without_joint_final_only_fits_aut(tmp_path):
    src = tmp_path / "apart.sts"
    src.write_text(
        "sts A { init a; final f; a -> f : m!; }\n"
        "sts B { init b; final g; b -> g : n?; }\n",
        encoding="utf-8",
    )
    code, _, err = run(["product", f"{src}::A", f"{src}::B",
                        "-o", str(tmp_path / "nope.sts")])
    assert code == 2
    assert "aut" in err
    assert run(["product", f"{src}::A", f"{src}::B",
                "-o", str(tmp_path / "ok.aut")])[0] == 0


def test_translate_then_reduce(tmp_path):
    flow = tmp_path / "order.flow"
    flow.write_text(
        "workflow Order {\n"
        "  {\n"
        "    receive request(String);\n"
        "    ifelse { branch { send accept(Int); } branch { send refuse; } }\n"
        "  }\n"
        "}\n",
        encoding="utf-8",
    )
    out = tmp_path / "order.sts"
    assert run(["translate", str(flow), "-o", str(out)])[0] == 0
    sts = parse_sts(out.read_text()).select()
    assert sum(1 for t in sts.transitions if t.label.is_tau) == 2

    chain = tmp_path / "chain.sts"
    chain.write_text(
        "sts Chain { init a; final d; a -> b : tau; b -> c : tau; c -> d : m!; }\n",
        encoding="utf-8",
    )
    reduced_path = tmp_path / "chain_red.sts"
    assert run(["reduce", "--tau-confluence", str(chain),
                "-o", str(reduced_path)])[0] == 0
    reduced = parse_sts(reduced_path.read_text()).select()
    assert all(not t.label.is_tau for t in reduced.transitions)


def test_reduce_selector_keeps_one_system(tmp_path):
    out = tmp_path / "one.sts"
    code, _, _ = run(["reduce", "--tau-confluence",
                      f"{FIXDIR / 'fig1.sts'}::S2", "-o", str(out)])
    assert code == 0
    assert parse_sts(out.read_text()).names() == ("S2",)


def test_fixtures_verify_human_summary():
    code, out, _ = run(["fixtures", "verify"])
    assert code == 0
    assert "26/26 expectations verified" in out


def test_help_exits_zero():
    assert run(["--help"])[0] == 0
    assert run(["check", "--help"])[0] == 0


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "protochk.cli", "fixtures", "verify"],
        capture_output=True, text=True, cwd=ROOT,
    )
    assert proc.returncode == 0
