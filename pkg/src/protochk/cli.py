"""Command-line front end.

Subcommands mirror the library: pairwise compatibility checks, relation
checks, substitution reports, product construction, workflow translation,
tau-confluence reduction, and verification of the bundled fixture corpus.
Reports go to stdout (JSON with --json, fixed key order, byte-deterministic),
diagnostics to stderr.  Exit codes: 0 the property holds / the command
succeeded, 1 the property fails (with witness where one exists), 2 usage,
parse or validation error, 3 a resource cap was hit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .compat import CompatNotion, check_compat
from .equiv import RelationKind, check_relation
from .formats import ParseError, export_aut, parse_sts, parse_workflow, print_sts
from .model import (
    ReservedNameCollision,
    Sts,
    ValidationError,
    Verdict,
    tau_confluence_reduce,
)
from .product import StateExplosion, WitnessTrace, synchronous_product, product_to_sts
from .subst import RECOMPOSE_WARNING, check_subst_by_recompose, substitution_report
from .testkit import SizeLimit, evaluate, fixtures
from .workflow import translate_workflow


class UsageError(ValueError):
    pass


def _load(selector: str) -> Sts:
    """Read ``file.sts`` or ``file.sts::Name`` (default: first definition)."""
    path, sep, name = selector.partition("::")
    text = Path(path).read_text(encoding="utf-8")
    doc = parse_sts(text)
    if sep:
        try:
            return doc.select(name)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from exc
    return doc.select()


def _witness_steps(witness: WitnessTrace) -> list[dict]:
    steps = []
    for step in witness.steps:
        entry: dict = {"kind": step.kind.value}
        if step.message is not None:
            entry["message"] = step.message
        entry["from"] = [step.source.left, step.source.right]
        entry["to"] = [step.target.left, step.target.right]
        steps.append(entry)
    return steps


def _emit_json(report: dict) -> None:
    sys.stdout.write(json.dumps(report, indent=2, ensure_ascii=False) + "\n")


def _witness_lines(witness: WitnessTrace, left: str, right: str) -> list[str]:
    if not witness.steps:
        return ["the initial configuration already violates the property"]
    lines = []
    for step in witness.steps:
        if step.kind.value == "tau-left":
            lines.append(f"{left} moves internally")
        elif step.kind.value == "tau-right":
            lines.append(f"{right} moves internally")
        else:
            emitter, receiver = (left, right) if step.emitter.value == "left" else (right, left)
            lines.append(f"{emitter} emits {step.message}")
            lines.append(f"{receiver} receives {step.message}")
        lines[-1] += f"  -> {step.target}"
    return lines


def _print_verdict(
    title: str, verdict: Verdict, show_witness: bool, left: str, right: str
) -> None:
    state = "holds" if verdict.holds else "fails"
    suffix = f" ({verdict.direction.value})" if verdict.direction else ""
    print(f"{title}: {state}{suffix}")
    for warning in verdict.warnings:
        print(f"  note: {warning}")
    if show_witness and isinstance(verdict.witness, WitnessTrace):
        print("  witness:")
        for line in _witness_lines(verdict.witness, left, right):
            print(f"    {line}")


_NOTION_TITLES = {
    CompatNotion.DEADLOCK_FREE: "deadlock-freeness",
    CompatNotion.UNSPECIFIED_RECEPTIONS: "unspecified-receptions compatibility",
    CompatNotion.UNIDIRECTIONAL_COMPLEMENTARITY: "unidirectional complementarity",
}

_RELATION_TITLES = {
    RelationKind.STRONG: "strong equivalence",
    RelationKind.BRANCHING: "branching equivalence",
    RelationKind.WEAK: "weak equivalence",
    RelationKind.TRACE: "trace equivalence",
    RelationKind.SIMULATION: "simulation preorder",
    RelationKind.SUBTYPE: "behavioural subtyping",
}


def _cmd_compat(args: argparse.Namespace) -> int:
    a, b = _load(args.left), _load(args.right)
    notion = CompatNotion(args.notion)
    verdict = check_compat(a, b, notion, args.max_states)
    if args.json:
        report: dict = {
            "check": "compat",
            "inputs": [a.name, b.name],
            "notion": notion.value,
            "holds": verdict.holds,
        }
        if verdict.direction is not None:
            report["direction"] = verdict.direction.value
        if isinstance(verdict.witness, WitnessTrace):
            report["witness"] = _witness_steps(verdict.witness)
        report["warnings"] = list(verdict.warnings)
        _emit_json(report)
    else:
        title = f"{_NOTION_TITLES[notion]} between '{a.name}' and '{b.name}'"
        _print_verdict(title, verdict, args.witness or not verdict.holds, a.name, b.name)
    return 0 if verdict.holds else 1


def _cmd_equiv(args: argparse.Namespace) -> int:
    a, b = _load(args.left), _load(args.right)
    kind = RelationKind(args.relation)
    annotation: bool | None = None
    if args.final_annotation:
        annotation = True
    elif args.no_final_annotation:
        annotation = False
    verdict = check_relation(
        a, b, kind, final_annotation=annotation, completed=args.completed
    )
    if args.json:
        report = {
            "check": "equiv",
            "inputs": [a.name, b.name],
            "relation": kind.value,
            "holds": verdict.holds,
            "warnings": list(verdict.warnings),
        }
        _emit_json(report)
    else:
        title = f"{_RELATION_TITLES[kind]} between '{a.name}' and '{b.name}'"
        _print_verdict(title, verdict, False, a.name, b.name)
    return 0 if verdict.holds else 1


def _cmd_subst(args: argparse.Namespace) -> int:
    old, new, partner = _load(args.old), _load(args.new), _load(args.partner)
    notion = CompatNotion(args.notion)
    kind = RelationKind(args.relation)

    if args.via_compat:
        verdict = check_subst_by_recompose(old, new, partner, notion)
        warnings = list(verdict.warnings)
        if args.json:
            if args.no_caveat:
                warnings = [w for w in warnings if w != RECOMPOSE_WARNING]
            report: dict = {
                "check": "subst",
                "inputs": [old.name, new.name, partner.name],
                "notion": notion.value,
                "holds": verdict.holds,
            }
            if isinstance(verdict.witness, WitnessTrace):
                report["witness"] = _witness_steps(verdict.witness)
            report["warnings"] = warnings
            _emit_json(report)
        else:
            title = (
                f"recomposition: '{new.name}' against '{partner.name}' "
                f"({_NOTION_TITLES[notion]})"
            )
            _print_verdict(title, verdict, not verdict.holds, new.name, partner.name)
        return 0 if verdict.holds else 1

    rep = substitution_report(old, new, partner, notion, kind)
    accepted = rep.recommendation == "accept"
    warnings = list(
        dict.fromkeys((*rep.relation.warnings, *rep.recomposition.warnings))
    )
    if args.json:
        if args.no_caveat:
            warnings = [w for w in warnings if w != RECOMPOSE_WARNING]
        report = {
            "check": "subst",
            "inputs": [old.name, new.name, partner.name],
            "notion": notion.value,
            "relation": kind.value,
            "holds": accepted,
            "recommendation": rep.recommendation,
            "formulations": {
                "relation": rep.relation.holds,
                "recomposition": rep.recomposition.holds,
                "before": rep.before.holds,
                "after": rep.after.holds,
            },
        }
        if isinstance(rep.after.witness, WitnessTrace):
            report["witness"] = _witness_steps(rep.after.witness)
        report["warnings"] = warnings
        _emit_json(report)
    else:
        print(
            f"replace '{old.name}' by '{new.name}' against '{partner.name}': "
            f"{rep.recommendation}"
        )
        rel_state = "holds" if rep.relation.holds else "fails"
        print(f"  {_RELATION_TITLES[kind]} of old and new: {rel_state}")
        before = "holds" if rep.before.holds else "fails"
        after = "holds" if rep.after.holds else "fails"
        print(f"  {_NOTION_TITLES[notion]} before: {before}, after: {after}")
        for warning in warnings:
            print(f"  note: {warning}")
        if not rep.after.holds and isinstance(rep.after.witness, WitnessTrace):
            print("  witness:")
            for line in _witness_lines(rep.after.witness, new.name, partner.name):
                print(f"    {line}")
    return 0 if accepted else 1


def _cmd_product(args: argparse.Namespace) -> int:
    a, b = _load(args.left), _load(args.right)
    product = synchronous_product(a, b, args.max_states)
    out = Path(args.output)
    if out.suffix == ".aut":
        out.write_text(export_aut(product), encoding="utf-8")
    elif out.suffix == ".sts":
        name = f"{a.name}_x_{b.name}"
        out.write_text(print_sts(product_to_sts(product, name)), encoding="utf-8")
    else:
        raise UsageError(f"unsupported product output '{out.name}': use .sts or .aut")
    for warning in product.divergence_warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(
        f"wrote {out} ({len(product.states)} states, {len(product.steps)} steps)",
        file=sys.stderr,
    )
    return 0


def _cmd_translate(args: argparse.Namespace) -> int:
    text = Path(args.input).read_text(encoding="utf-8")
    sts = translate_workflow(parse_workflow(text))
    out = Path(args.output)
    out.write_text(print_sts(sts), encoding="utf-8")
    print(
        f"wrote {out} ({len(sts.states)} states, {len(sts.transitions)} transitions)",
        file=sys.stderr,
    )
    return 0


def _cmd_reduce(args: argparse.Namespace) -> int:
    path, sep, name = args.input.partition("::")
    doc = parse_sts(Path(path).read_text(encoding="utf-8"))
    if sep:
        try:
            systems = [doc.select(name)]
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from exc
    else:
        systems = list(doc)
    reduced = [tau_confluence_reduce(sts) for sts in systems]
    out = Path(args.output)
    text = "\n".join(print_sts(sts) for sts in reduced)
    out.write_text(text, encoding="utf-8")
    dropped = sum(
        len(before.states) - len(after.states)
        for before, after in zip(systems, reduced)
    )
    print(f"wrote {out} ({dropped} state(s) collapsed)", file=sys.stderr)
    return 0


def _cmd_fixtures(args: argparse.Namespace) -> int:
    rows = []
    for fx in fixtures():
        for row in evaluate(fx):
            rows.append(
                {
                    "fixture": fx.ident,
                    "label": row.expectation.label,
                    "expected": row.expectation.holds,
                    "actual": row.verdict.holds,
                    "ok": row.ok,
                }
            )
    all_ok = all(r["ok"] for r in rows)
    if args.json:
        _emit_json(
            {
                "check": "fixtures",
                "inputs": [fx.ident for fx in fixtures()],
                "holds": all_ok,
                "rows": rows,
                "warnings": [],
            }
        )
    else:
        for r in rows:
            mark = "ok" if r["ok"] else "MISMATCH"
            print(f"{r['fixture']:>6}  {r['label']:<42} {mark}")
        good = sum(1 for r in rows if r["ok"])
        print(f"{good}/{len(rows)} expectations verified")
    return 0 if all_ok else 1


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="protochk",
        description="Compatibility and substitutability checks for "
        "communicating service protocols.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="run a verdict-producing check")
    checks = check.add_subparsers(dest="check_kind", required=True)

    compat = checks.add_parser("compat", help="pairwise compatibility")
    compat.add_argument("--notion", choices=[n.value for n in CompatNotion], required=True)
    compat.add_argument("left", metavar="A.sts[::Name]")
    compat.add_argument("right", metavar="B.sts[::Name]")
    compat.add_argument("--witness", action="store_true",
                        help="spell out witness steps (failing checks always do)")
    compat.add_argument("--max-states", type=int, default=None)
    compat.add_argument("--json", action="store_true")
    compat.set_defaults(handler=_cmd_compat)

    equiv = checks.add_parser("equiv", help="equivalence / preorder")
    equiv.add_argument("--relation", choices=[k.value for k in RelationKind], required=True)
    equiv.add_argument("left", metavar="A.sts[::Name]")
    equiv.add_argument("right", metavar="B.sts[::Name]")
    annotation = equiv.add_mutually_exclusive_group()
    annotation.add_argument("--final-annotation", action="store_true",
                            help="force the end-of-session marker on")
    annotation.add_argument("--no-final-annotation", action="store_true",
                            help="compare raw systems without the marker")
    equiv.add_argument("--completed", action="store_true",
                       help="trace mode: also compare which traces may terminate")
    equiv.add_argument("--json", action="store_true")
    equiv.set_defaults(handler=_cmd_equiv)

    subst = checks.add_parser("subst", help="substitution report")
    subst.add_argument("--old", required=True, metavar="A.sts[::Name]")
    subst.add_argument("--new", required=True, metavar="B.sts[::Name]")
    subst.add_argument("--partner", required=True, metavar="C.sts[::Name]")
    subst.add_argument("--notion", choices=[n.value for n in CompatNotion], default="ur")
    subst.add_argument("--relation", choices=[k.value for k in RelationKind],
                       default="branching")
    subst.add_argument("--via-compat", action="store_true",
                       help="answer with the recomposition formulation only")
    subst.add_argument("--no-caveat", action="store_true",
                       help="JSON output only: drop the recomposition caveat line")
    subst.add_argument("--json", action="store_true")
    subst.set_defaults(handler=_cmd_subst)

    product = sub.add_parser("product", help="synchronous product of two systems")
    product.add_argument("left", metavar="A.sts[::Name]")
    product.add_argument("right", metavar="B.sts[::Name]")
    product.add_argument("-o", "--output", required=True, metavar="out.sts|out.aut")
    product.add_argument("--max-states", type=int, default=None)
    product.set_defaults(handler=_cmd_product)

    translate = sub.add_parser("translate", help="workflow to transition system")
    translate.add_argument("input", metavar="in.flow")
    translate.add_argument("-o", "--output", required=True, metavar="out.sts")
    translate.set_defaults(handler=_cmd_translate)

    reduce_cmd = sub.add_parser("reduce", help="collapse sequential internal steps")
    reduce_cmd.add_argument("--tau-confluence", action="store_true", required=True,
                            help="the only reduction offered; flag spells the intent")
    reduce_cmd.add_argument("input", metavar="in.sts[::Name]")
    reduce_cmd.add_argument("-o", "--output", required=True, metavar="out.sts")
    reduce_cmd.set_defaults(handler=_cmd_reduce)

    fixtures_cmd = sub.add_parser("fixtures", help="bundled example corpus")
    fixtures_sub = fixtures_cmd.add_subparsers(dest="fixtures_action", required=True)
    verify = fixtures_sub.add_parser("verify", help="re-check every expected verdict")
    verify.add_argument("--json", action="store_true")
    verify.set_defaults(handler=_cmd_fixtures)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; keep both
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except (StateExplosion, SizeLimit) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (
        ParseError,
        ValidationError,
        ReservedNameCollision,
        UsageError,
        ValueError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
