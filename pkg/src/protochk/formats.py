"""Text formats: .sts files, .flow workflow files, and .aut export.

Both grammars are whitespace-insensitive with ``//`` line comments.  States
are declared implicitly by use.  The reserved termination message can be
written as the literal character or the ASCII alias ``TICK``; it is always
printed as the literal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import TAU, TICK, TICK_ASCII, Direction, Label, Sts, Transition, build_sts
from .product import ProductLts, StepKind
from .workflow import (
    Activity,
    Code,
    IfElse,
    Listen,
    Receive,
    Send,
    Sequence,
    Terminate,
    While,
    Workflow,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        super().__init__(f"line {line}, col {col}: {message}")


class EmptyListenError(ParseError):
    pass


class EmptyIfElseError(ParseError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "tick", a literal symbol, or "eof"
    text: str
    line: int
    col: int


_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_SYMBOLS = ("->", "{", "}", "(", ")", ";", ",", ":", "!", "?")


def _scan(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            tokens.append(Token("ident", m.group(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        if c == TICK:
            tokens.append(Token("tick", TICK, line, col))
            i += 1
            col += 1
            continue
        sym = next((s for s in _SYMBOLS if text.startswith(s, i)), None)
        if sym:
            tokens.append(Token(sym, sym, line, col))
            i += len(sym)
            col += len(sym)
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _scan(text)
        self.pos = 0

    @property
    def here(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.here
        self.pos += 1
        return t

    def fail(self, message: str) -> ParseError:
        t = self.here
        return ParseError(message, t.line, t.col)

    def expect(self, kind: str) -> Token:
        if self.here.kind != kind:
            raise self.fail(f"expected {kind!r}, found {self.here.text or 'end of input'!r}")
        return self.advance()

    def expect_keyword(self, word: str) -> Token:
        if self.here.kind != "ident" or self.here.text != word:
            raise self.fail(f"expected {word!r}, found {self.here.text or 'end of input'!r}")
        return self.advance()

    def at_keyword(self, word: str) -> bool:
        return self.here.kind == "ident" and self.here.text == word

    def ident(self, what: str) -> str:
        if self.here.kind != "ident":
            raise self.fail(f"expected {what}, found {self.here.text or 'end of input'!r}")
        return self.advance().text

    def sort_list(self) -> tuple[str, ...]:
        """Optional parenthesized identifier list; empty parens are an error."""
        if self.here.kind != "(":
            return ()
        self.advance()
        sorts = [self.ident("a sort name")]
        while self.here.kind == ",":
            self.advance()
            sorts.append(self.ident("a sort name"))
        self.expect(")")
        return tuple(sorts)


@dataclass(frozen=True)
class StsDocument:
    systems: tuple[Sts, ...]

    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.systems)

    def select(self, name: str | None = None) -> Sts:
        if name is None:
            return self.systems[0]
        for s in self.systems:
            if s.name == name:
                return s
        known = ", ".join(self.names())
        raise KeyError(f"no system named '{name}' (file defines: {known})")

    def __iter__(self):
        return iter(self.systems)

    def __len__(self) -> int:
        return len(self.systems)


class _StsParser(_Parser):
    def document(self) -> StsDocument:
        systems: list[Sts] = []
        names: set[str] = set()
        if self.here.kind == "eof":
            raise self.fail("expected at least one 'sts' definition")
        while self.here.kind != "eof":
            name_token = self.tokens[self.pos + 1]
            sts = self.system()
            if sts.name in names:
                raise ParseError(
                    f"system '{sts.name}' is defined twice", name_token.line, name_token.col
                )
            names.add(sts.name)
            systems.append(sts)
        return StsDocument(tuple(systems))

    def system(self) -> Sts:
        self.expect_keyword("sts")
        name = self.ident("a system name")
        self.expect("{")
        self.expect_keyword("init")
        initial = self.ident("a state name")
        self.expect(";")
        self.expect_keyword("final")
        finals = [self.ident("a state name")]
        while self.here.kind == ",":
            self.advance()
            finals.append(self.ident("a state name"))
        self.expect(";")
        transitions: list[Transition] = []
        while self.here.kind != "}":
            transitions.append(self.transition())
        self.expect("}")
        return build_sts(name, initial, finals, transitions)

    def transition(self) -> Transition:
        source = self.ident("a state name")
        self.expect("->")
        target = self.ident("a state name")
        self.expect(":")
        label = self.label()
        self.expect(";")
        return Transition(source, label, target)

    def label(self) -> Label:
        if self.here.kind == "tick":
            self.advance()
            message = TICK
        else:
            word = self.ident("a label")
            if word == "tau":
                if self.here.kind in ("!", "?"):
                    raise self.fail("'tau' is reserved for the internal action")
                return TAU
            message = TICK if word == TICK_ASCII else word
        if self.here.kind == "!":
            direction = Direction.EMISSION
        elif self.here.kind == "?":
            direction = Direction.RECEPTION
        else:
            raise self.fail("expected '!' or '?' after message name")
        self.advance()
        return Label(message, direction, self.sort_list())


def parse_sts(text: str) -> StsDocument:
    """Parse a document of STS definitions; validation errors are forwarded."""
    return _StsParser(text).document()


def print_sts(doc: StsDocument | Sts) -> str:
    """Render systems in the .sts grammar; parsing the result round-trips."""
    systems = (doc,) if isinstance(doc, Sts) else doc.systems
    chunks: list[str] = []
    for sts in systems:
        for t in sts.transitions:
            if t.label.message == "tau":
                raise ValueError(f"message name 'tau' in '{sts.name}' cannot be printed")
        lines = [f"sts {sts.name} {{"]
        lines.append(f"  init {sts.initial};")
        lines.append(f"  final {', '.join(sts.finals_ordered())};")
        for t in sts.transitions:
            lines.append(f"  {t.source} -> {t.target} : {t.label};")
        lines.append("}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"


def _aut_label(label: Label) -> str:
    if label.is_tau:
        return '"i"'
    assert label.direction is not None
    return f'"{label.message}{label.direction.value}{",".join(label.sorts)}"'


def export_aut(obj: Sts | ProductLts) -> str:
    """Aldebaran-style text: a header line, then one line per transition.

    The format has no final-state marker, so apply annotate_finals first if
    termination must stay visible.  Products are exported with sync steps
    labelled by the bare message name and both tau kinds as the internal
    action.
    """
    if isinstance(obj, ProductLts):
        index = {s: i for i, s in enumerate(obj.states)}
        lines = [f"des ({index[obj.initial]}, {len(obj.steps)}, {len(obj.states)})"]
        for step in obj.steps:
            label = f'"{step.message}"' if step.kind is StepKind.SYNC else '"i"'
            lines.append(f"({index[step.source]}, {label}, {index[step.target]})")
        return "\n".join(lines) + "\n"
    index = {s: i for i, s in enumerate(obj.states)}
    lines = [f"des ({index[obj.initial]}, {len(obj.transitions)}, {len(obj.states)})"]
    for t in obj.transitions:
        lines.append(f"({index[t.source]}, {_aut_label(t.label)}, {index[t.target]})")
    return "\n".join(lines) + "\n"


class _WorkflowParser(_Parser):
    def workflow(self) -> Workflow:
        self.expect_keyword("workflow")
        name = self.ident("a workflow name")
        self.expect("{")
        root = self.activity()
        self.expect("}")
        if self.here.kind != "eof":
            raise self.fail("unexpected trailing input after workflow")
        return Workflow(name, root)

    def activity(self) -> Activity:
        if self.here.kind == "{":
            self.advance()
            steps: list[Activity] = []
            while self.here.kind != "}":
                steps.append(self.activity())
            self.advance()
            return Sequence(tuple(steps))
        if self.at_keyword("receive") or self.at_keyword("send"):
            emit = self.advance().text == "send"
            message = self.ident("a message name")
            sorts = self.sort_list()
            self.expect(";")
            return Send(message, sorts) if emit else Receive(message, sorts)
        if self.at_keyword("ifelse"):
            opener = self.advance()
            self.expect("{")
            branches: list[Activity] = []
            while self.at_keyword("branch"):
                self.advance()
                branches.append(self.activity())
            self.expect("}")
            if not branches:
                raise EmptyIfElseError(
                    "ifelse needs at least one branch", opener.line, opener.col
                )
            return IfElse(tuple(branches))
        if self.at_keyword("listen"):
            opener = self.advance()
            self.expect("{")
            events: list[tuple[Receive, Activity]] = []
            while self.at_keyword("event"):
                self.advance()
                self.expect_keyword("receive")
                message = self.ident("a message name")
                sorts = self.sort_list()
                self.expect(";")
                events.append((Receive(message, sorts), self.activity()))
            delay: Activity | None = None
            if self.at_keyword("delay"):
                self.advance()
                delay = self.activity()
            self.expect("}")
            if not events:
                raise EmptyListenError(
                    "listen needs at least one event", opener.line, opener.col
                )
            return Listen(tuple(events), delay)
        if self.at_keyword("while"):
            self.advance()
            return While(self.activity())
        if self.at_keyword("terminate"):
            self.advance()
            self.expect(";")
            return Terminate()
        if self.at_keyword("code"):
            self.advance()
            self.expect(";")
            return Code()
        if self.at_keyword("parallel"):
            raise self.fail("parallel activities are not supported")
        raise self.fail(f"expected an activity, found {self.here.text or 'end of input'!r}")


def parse_workflow(text: str) -> Workflow:
    return _WorkflowParser(text).workflow()
