"""Parser and semantic checker for analysis spec files."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path

from .linalg import SUPPORTED_PRIMES, DEFAULT_CAP

MAX_WINDOW = 5


class SpecError(Exception):
    def __init__(self, line: int, col: int, message: str, path: str = "<spec>"):
        super().__init__(f"{path}:{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class ParseError(SpecError):
    pass


class SemanticError(SpecError):
    pass


@dataclass(frozen=True)
class Arg:
    key: str | None
    value: object  # int, str (identifier or path), or ("pow", base, exp)
    col: int


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[Arg, ...]
    line: int
    col: int


@dataclass(frozen=True)
class Definition:
    kind: str  # presheaf | linear | pgroup
    name: str
    expr: Call
    line: int
    col: int


@dataclass(frozen=True)
class Analysis:
    target: str
    request: Call
    line: int
    col: int


@dataclass
class SpecDocument:
    path: str = "<spec>"
    p: int = 2
    window: int = 4
    cap: int = DEFAULT_CAP
    definitions: list[Definition] = field(default_factory=list)
    analyses: list[Analysis] = field(default_factory=list)
    base_dir: Path = field(default_factory=Path.cwd)

    def kinds(self) -> dict[str, str]:
        return {d.name: d.kind for d in self.definitions}


# signatures: (param name, type); types: int, path, ppow, presheaf, linear, any
CONSTRUCTORS: dict[str, dict[str, list[tuple[str, str]]]] = {
    "presheaf": {
        "sym": [("k", "int")],
        "ext": [("k", "int")],
        "gr_le": [("n", "int")],
        "gr": [("n", "int")],
        "homset": [("n", "int")],
        "ibar": [],
        "sets": [("source", "linear")],
        "product": [("a", "presheaf"), ("b", "presheaf")],
        "coproduct": [("a", "presheaf"), ("b", "presheaf")],
        "wedge": [("a", "presheaf"), ("b", "presheaf")],
        "induced": [("n", "int"), ("table", "path")],
        "splitrank": [("source", "linear")],
    },
    "linear": {
        "sym": [("k", "int")],
        "ext": [("k", "int")],
        "freehom": [("n", "int")],
        "ibar": [],
        "sum": [("a", "linear"), ("b", "linear")],
        "tensor": [("a", "linear"), ("b", "linear")],
        "linearize": [("source", "presheaf")],
    },
    "pgroup": {
        "heisenberg": [],
        "elemab": [("source", "linear")],
        "zmod": [("order", "ppow")],
    },
}

ANALYSES: dict[str, tuple[list[tuple[str, str]], tuple[str, ...]]] = {
    "growth": ([], ("presheaf", "linear", "pgroup")),
    "degree": ([], ("presheaf", "linear", "pgroup")),
    "rankfilt": ([], ("presheaf",)),
    "kappa": ([("max", "int")], ("presheaf",)),
    "hom": ([("other", "any")], ("presheaf", "linear")),
    "pfinite": ([], ("pgroup",)),
    "frattini": ([], ("pgroup",)),
    "augfilt": ([("dim", "int")], ("pgroup",)),
}

# constructor parameters bounded by the window
WINDOW_BOUNDED = {("presheaf", "gr_le"), ("presheaf", "gr"), ("presheaf", "homset"),
                  ("presheaf", "induced"), ("linear", "freehom")}


# ---------------------------------------------------------------------------
# lexing


_TOKEN = re.compile(
    r"""(?P<ws>[ \t]+)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<int>[0-9]+)
      | (?P<str>"[^"]*")
      | (?P<punct>[=(),:^])
    """,
    re.VERBOSE,
)
_PATH = re.compile(r'"[^"]*"|[^\s,()]+')


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


class _Line:
    def __init__(self, text: str, lineno: int, path: str):
        self.text = text
        self.lineno = lineno
        self.path = path
        self.pos = 0

    def error(self, col: int, msg: str) -> ParseError:
        return ParseError(self.lineno, col, msg, self.path)

    def _skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def peek(self) -> _Tok | None:
        self._skip_ws()
        if self.pos >= len(self.text):
            return None
        m = _TOKEN.match(self.text, self.pos)
        if m is None or m.lastgroup == "ws":
            return _Tok("bad", self.text[self.pos], self.pos + 1)
        return _Tok(m.lastgroup, m.group(), self.pos + 1)

    def next(self, expected: str | None = None, what: str | None = None) -> _Tok:
        tok = self.peek()
        col = self.pos + 1
        if tok is None:
            raise self.error(col, f"expected {what or expected or 'token'}, found end of line")
        if tok.kind == "bad":
            raise self.error(tok.col, f"unexpected character {tok.text!r}")
        if expected is not None and (tok.kind != expected and tok.text != expected):
            raise self.error(tok.col, f"expected {what or repr(expected)}, found {tok.text!r}")
        self.pos = tok.col - 1 + len(tok.text)
        return tok

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.text == text:
            self.next()
            return True
        return False

    def path_token(self) -> _Tok:
        self._skip_ws()
        m = _PATH.match(self.text, self.pos)
        if m is None:
            raise self.error(self.pos + 1, "expected a file path")
        self.pos = m.end()
        text = m.group()
        return _Tok("path", text.strip('"'), m.start() + 1)

    def end(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise self.error(tok.col, f"unexpected trailing input {tok.text!r}")


def _parse_value(ln: _Line, key: str | None) -> object:
    if key == "table":
        return ln.path_token().text
    tok = ln.next(what="a value")
    if tok.kind == "int":
        base = int(tok.text)
        if ln.accept("^"):
            return ("pow", base, int(ln.next("int", "an exponent").text))
        return base
    if tok.kind in ("ident",):
        return tok.text
    if tok.kind == "str":
        return tok.text.strip('"')
    raise ln.error(tok.col, f"expected a value, found {tok.text!r}")


def _parse_call(ln: _Line, lineno: int) -> Call:
    head = ln.next("ident", "a constructor name")
    args: list[Arg] = []
    if ln.accept("("):
        if not ln.accept(")"):
            while True:
                tok = ln.peek()
                col = tok.col if tok else ln.pos + 1
                key = None
                if tok is not None and tok.kind == "ident":
                    save = ln.pos
                    ln.next()
                    if ln.accept("="):
                        key = tok.text
                    else:
                        ln.pos = save
                args.append(Arg(key, _parse_value(ln, key), col))
                if ln.accept(")"):
                    break
                ln.next(",", "',' or ')'")
    return Call(head.text, tuple(args), lineno, head.col)


def parse_text(text: str, path: str = "<spec>", base_dir: Path | None = None) -> SpecDocument:
    doc = SpecDocument(path=path, base_dir=base_dir or Path.cwd())
    seen_settings: set[str] = set()
    for lineno, raw in enumerate(text.split("\n"), start=1):
        body = raw.split("#", 1)[0].rstrip("\r")
        if not body.strip():
            continue
        ln = _Line(body, lineno, path)
        kw = ln.next("ident", "a statement keyword")
        if kw.text == "set":
            if doc.definitions or doc.analyses:
                raise SemanticError(lineno, kw.col, "settings must precede definitions and analyses", path)
            any_setting = False
            while ln.peek() is not None:
                key = ln.next("ident", "a setting name")
                ln.next("=", "'='")
                val = ln.next("int", "an integer")
                if key.text not in ("p", "window", "cap"):
                    raise SemanticError(lineno, key.col, f"unknown setting {key.text!r}", path)
                _check_setting(key.text, int(val.text), lineno, val.col, path)
                setattr(doc, key.text, int(val.text))
                seen_settings.add(key.text)
                any_setting = True
            if not any_setting:
                raise ln.error(ln.pos + 1, "expected a setting after 'set'")
        elif kw.text in CONSTRUCTORS:
            name = ln.next("ident", "a definition name")
            ln.next("=", "'='")
            expr = _parse_call(ln, lineno)
            ln.end()
            doc.definitions.append(Definition(kw.text, name.text, expr, lineno, name.col))
        elif kw.text == "analyze":
            name = ln.next("ident", "a definition name")
            ln.next(":", "':'")
            req = _parse_call(ln, lineno)
            ln.end()
            doc.analyses.append(Analysis(name.text, req, lineno, name.col))
        else:
            raise ln.error(kw.col, f"unknown statement {kw.text!r}")
    check(doc)
    return doc


def parse(path: str | Path) -> SpecDocument:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(1, 1, f"not UTF-8 text: {exc}", str(path)) from None
    return parse_text(text, str(path), path.parent)


def _check_setting(key: str, val: int, line: int, col: int, path: str) -> None:
    if key == "p" and val not in SUPPORTED_PRIMES:
        raise SemanticError(line, col, f"p={val} unsupported; choose one of {SUPPORTED_PRIMES}", path)
    if key == "window" and not 0 <= val <= MAX_WINDOW:
        raise SemanticError(line, col, f"window {val} outside 0..{MAX_WINDOW}", path)
    if key == "cap" and val < 1:
        raise SemanticError(line, col, "cap must be positive", path)


# ---------------------------------------------------------------------------
# semantic checks


def bind(call: Call, params: list[tuple[str, str]], path: str) -> dict[str, Arg]:
    """Match positional and keyword arguments to a signature."""
    out: dict[str, Arg] = {}
    names = [n for n, _ in params]
    positional = 0
    for arg in call.args:
        if arg.key is None:
            if positional >= len(params):
                raise SemanticError(call.line, arg.col, f"{call.name} takes {len(params)} argument(s)", path)
            key = names[positional]
            positional += 1
        else:
            if arg.key not in names:
                raise SemanticError(call.line, arg.col, f"{call.name} has no parameter {arg.key!r}", path)
            key = arg.key
        if key in out:
            raise SemanticError(call.line, arg.col, f"parameter {key!r} given twice", path)
        out[key] = arg
    for n in names:
        if n not in out:
            raise SemanticError(call.line, call.col, f"{call.name} is missing parameter {n!r}", path)
    return out


def _check_args(doc: SpecDocument, call: Call, params, known: dict[str, str]) -> dict[str, Arg]:
    bound = bind(call, params, doc.path)
    for pname, ptype in params:
        arg = bound[pname]
        v = arg.value
        if ptype == "int":
            if not isinstance(v, int):
                raise SemanticError(call.line, arg.col, f"{pname} must be an integer", doc.path)
        elif ptype == "ppow":
            if isinstance(v, tuple):
                _, base, e = v
                if base != doc.p:
                    raise SemanticError(call.line, arg.col, f"zmod base {base} differs from p={doc.p}", doc.path)
                if e < 1:
                    raise SemanticError(call.line, arg.col, "zmod exponent must be positive", doc.path)
            elif isinstance(v, int):
                m, e = v, 0
                while m % doc.p == 0 and m > 1:
                    m //= doc.p
                    e += 1
                if m != 1 or e < 1:
                    raise SemanticError(call.line, arg.col, f"{v} is not a positive power of p={doc.p}", doc.path)
            else:
                raise SemanticError(call.line, arg.col, "zmod expects p^e", doc.path)
        elif ptype == "path":
            if not isinstance(v, str):
                raise SemanticError(call.line, arg.col, "table must be a path", doc.path)
            full = (doc.base_dir / v) if not Path(v).is_absolute() else Path(v)
            if not full.is_file():
                raise SemanticError(call.line, arg.col, f"table file {v!r} not found", doc.path)
        else:
            if not isinstance(v, str):
                raise SemanticError(call.line, arg.col, f"{pname} must name a definition", doc.path)
            if v not in known:
                raise SemanticError(call.line, arg.col, f"unknown name {v!r}", doc.path)
            if ptype != "any" and known[v] != ptype:
                raise SemanticError(
                    call.line, arg.col, f"{v!r} is a {known[v]} definition, expected a {ptype}", doc.path
                )
    return bound


def check(doc: SpecDocument) -> None:
    known: dict[str, str] = {}
    for d in doc.definitions:
        if d.name in known:
            raise SemanticError(d.line, d.col, f"duplicate definition {d.name!r}", doc.path)
        sigs = CONSTRUCTORS[d.kind]
        if d.expr.name not in sigs:
            raise SemanticError(d.expr.line, d.expr.col, f"unknown {d.kind} constructor {d.expr.name!r}", doc.path)
        bound = _check_args(doc, d.expr, sigs[d.expr.name], known)
        if (d.kind, d.expr.name) in WINDOW_BOUNDED:
            arg = bound["n"]
            if not 0 <= arg.value <= doc.window:
                raise SemanticError(d.line, arg.col, f"n={arg.value} outside the window 0..{doc.window}", doc.path)
        known[d.name] = d.kind
    for a in doc.analyses:
        if a.target not in known:
            raise SemanticError(a.line, a.col, f"unknown name {a.target!r}", doc.path)
        req = a.request
        if req.name not in ANALYSES:
            raise SemanticError(req.line, req.col, f"unknown analysis {req.name!r}", doc.path)
        params, kinds = ANALYSES[req.name]
        kind = known[a.target]
        if kind not in kinds:
            raise SemanticError(req.line, req.col, f"{req.name} does not apply to {kind} {a.target!r}", doc.path)
        bound = _check_args(doc, req, params, known)
        if req.name == "kappa":
            if doc.p != 2:
                raise SemanticError(req.line, req.col, "kappa requires p=2", doc.path)
            m = bound["max"]
            if not 0 <= m.value <= doc.window:
                raise SemanticError(req.line, m.col, f"max={m.value} outside the window 0..{doc.window}", doc.path)
        if req.name == "augfilt":
            m = bound["dim"]
            if not 0 <= m.value <= doc.window:
                raise SemanticError(req.line, m.col, f"dim={m.value} outside the window 0..{doc.window}", doc.path)
        if req.name == "hom":
            other = known[bound["other"].value]
            if other == "pgroup" or (kind == "linear" and other != "linear"):
                raise SemanticError(req.line, req.col, f"hom from {kind} to {other} is not supported", doc.path)


def definition_hashes(doc: SpecDocument) -> dict[str, str]:
    """Content hash of each definition, folding in its dependencies and table files."""
    canon: dict[str, str] = {}
    for d in doc.definitions:
        parts = []
        for pname, ptype in CONSTRUCTORS[d.kind][d.expr.name]:
            arg = bind(d.expr, CONSTRUCTORS[d.kind][d.expr.name], doc.path)[pname]
            v = arg.value
            if ptype in ("presheaf", "linear"):
                parts.append(f"{pname}=[{canon[v]}]")
            elif ptype == "path":
                full = (doc.base_dir / v) if not Path(v).is_absolute() else Path(v)
                parts.append(f"{pname}=sha256:{hashlib.sha256(full.read_bytes()).hexdigest()}")
            elif ptype == "ppow" and isinstance(v, tuple):
                parts.append(f"{pname}={v[1] ** v[2]}")
            else:
                parts.append(f"{pname}={v}")
        canon[d.name] = f"{d.kind}:{d.expr.name}({','.join(parts)})"
    return {name: hashlib.sha256(s.encode()).hexdigest() for name, s in canon.items()}
