"""Abstract syntax, concrete grammar and normal forms for MBD/PEP brane terms.

Systems, membrane processes and actions are immutable dataclasses.  The
concrete grammar is ASCII::

    sys    := sterm ("||" sterm)*
    sterm  := "zero" | "!" sterm | "(" sys ")" | proc? "<" sys? ">" ("@" IDENT)?
    proc   := pterm ("|" pterm)*
    pterm  := "0" | "!" pterm | "(" proc ")" | act ("." pterm)?

A leading ``!`` in system position always replicates the system; a replicated
membrane *process* has to be parenthesised, e.g. ``(!mate(n))<>@m``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union

ROOT = "*"

BINARY_KINDS = ("mate", "comate", "bud", "cobud", "phago", "cophago", "exo", "coexo")
RHO_KINDS = ("cobud", "drip", "cophago", "pino")
ACTION_KINDS = BINARY_KINDS + ("drip", "pino")
CO_ACTION = {"mate": "comate", "bud": "cobud", "phago": "cophago", "exo": "coexo"}


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.msg = msg
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {msg}" if line else msg)


# --------------------------------------------------------------------- AST


@dataclass(frozen=True)
class Action:
    """One brane action.  ``rho`` is the process carried by cobud/drip/cophago/pino."""

    kind: str
    channel: str | None = None
    rho: "Proc | CProc | None" = None

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise ValueError(f"unknown action kind {self.kind!r}")
        if (self.kind in RHO_KINDS) != (self.rho is not None):
            raise ValueError(f"{self.kind} {'requires' if self.kind in RHO_KINDS else 'takes no'} process argument")
        if (self.kind in BINARY_KINDS) != (self.channel is not None):
            raise ValueError(f"{self.kind} channel mismatch")

    def __str__(self) -> str:
        if self.kind in ("drip", "pino"):
            return f"{self.kind}({self.rho})"
        if self.rho is not None:
            return f"{self.kind}({self.channel}, {self.rho})"
        return f"{self.kind}({self.channel})"

    @property
    def is_co(self) -> bool:
        return self.kind.startswith("co")


@dataclass(frozen=True)
class Zero:
    def __str__(self):
        return pretty_proc(self)


@dataclass(frozen=True)
class Par:
    left: "Proc"
    right: "Proc"

    def __str__(self):
        return pretty_proc(self)


@dataclass(frozen=True)
class ProcBang:
    body: "Proc"

    def __str__(self):
        return pretty_proc(self)


@dataclass(frozen=True)
class Seq:
    action: Action
    cont: "Proc" = Zero()

    def __str__(self):
        return pretty_proc(self)


Proc = Union[Zero, Par, ProcBang, Seq]


@dataclass(frozen=True)
class Diamond:
    def __str__(self):
        return pretty(self)


@dataclass(frozen=True)
class Compose:
    left: "System"
    right: "System"

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True)
class SysBang:
    body: "System"

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True)
class Membrane:
    proc: Proc
    content: "System"
    label: str

    def __str__(self):
        return pretty(self)


System = Union[Diamond, Compose, SysBang, Membrane]


# ----------------------------------------------------------------- printing


def pretty_proc(p) -> str:
    if isinstance(p, CProc):
        return str(p)
    if isinstance(p, Zero):
        return "0"
    if isinstance(p, Par):
        right = pretty_proc(p.right)
        if isinstance(p.right, Par):
            right = f"({right})"
        return f"{pretty_proc(p.left)} | {right}"
    if isinstance(p, ProcBang):
        return "!" + _pterm(p.body)
    if isinstance(p, Seq):
        if isinstance(p.cont, Zero):
            return str(p.action)
        return f"{p.action}.{_pterm(p.cont)}"
    raise TypeError(p)


def _pterm(p) -> str:
    s = pretty_proc(p)
    return f"({s})" if isinstance(p, Par) else s


def pretty(P: System) -> str:
    """Concrete syntax for a system; ``parse(pretty(P)) == P``."""
    if isinstance(P, Diamond):
        return "zero"
    if isinstance(P, Compose):
        right = pretty(P.right)
        if isinstance(P.right, Compose):
            right = f"({right})"
        return f"{pretty(P.left)} || {right}"
    if isinstance(P, SysBang):
        body = pretty(P.body)
        return "!" + (f"({body})" if isinstance(P.body, Compose) else body)
    if isinstance(P, Membrane):
        proc = pretty_proc(P.proc)
        if isinstance(P.proc, (Par, ProcBang)):
            proc = f"({proc})"
        content = "" if isinstance(P.content, Diamond) else pretty(P.content)
        return f"{proc}<{content}>@{P.label}"
    raise TypeError(P)


# ------------------------------------------------------------------- lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*(?:\#[0-9a-f]{10}(?![A-Za-z0-9_]))?)
  | (?P<sym>\|\||[|!.(),<>@0*])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str  # "ident", "sym", "eof"
    text: str
    line: int
    col: int


def _lex(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        for i, ch in enumerate(m.group()):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


# ------------------------------------------------------------------ parser


class _Parser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.i = 0
        self.labels: list[tuple[int, list]] = []  # (start token, [membrane fields])

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind != "eof" and self.tok.text == text

    def expect(self, text: str) -> _Tok:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def ident(self) -> str:
        if self.tok.kind != "ident":
            found = self.tok.text or "end of input"
            self.error(f"expected identifier, found {found!r}")
        name = self.tok.text
        self.i += 1
        return name

    # systems

    def system(self):
        node = self.sterm()
        while self.at("||"):
            self.i += 1
            node = ("compose", node, self.sterm())
        return node

    def sterm(self):
        if self.at("zero"):
            self.i += 1
            return ("diamond",)
        if self.at("!"):
            self.i += 1
            return ("sbang", self.sterm())
        if self.at("("):
            save, nlabels = self.i, len(self.labels)
            try:
                return self.membrane()
            except ParseError as err:
                self.i = save
                del self.labels[nlabels:]
                first_err = err
            self.i += 1
            try:
                node = self.system()
                self.expect(")")
            except ParseError as err:
                # report whichever reading got further into the input
                if (err.line, err.col) >= (first_err.line, first_err.col):
                    raise
                raise first_err from None
            return node
        return self.membrane()

    def membrane(self):
        start = self.i
        # an omitted membrane process abbreviates 0
        proc = Zero() if self.at("<") else self.proc()
        self.expect("<")
        content = ("diamond",) if self.at(">") else self.system()
        self.expect(">")
        label = None
        if self.at("@"):
            self.i += 1
            if self.at("*"):
                self.error("the label '*' is reserved for the outermost membrane")
            label_tok = self.tok
            label = (self.ident(), label_tok)
        node = ["membrane", proc, content, label]
        self.labels.append((start, node))
        return node

    # processes

    def proc(self) -> Proc:
        node = self.pterm()
        while self.at("|"):
            self.i += 1
            node = Par(node, self.pterm())
        return node

    def pterm(self) -> Proc:
        if self.at("0"):
            self.i += 1
            return Zero()
        if self.at("!"):
            self.i += 1
            return ProcBang(self.pterm())
        if self.at("("):
            self.i += 1
            node = self.proc()
            self.expect(")")
            return node
        act = self.action()
        if self.at("."):
            self.i += 1
            return Seq(act, self.pterm())
        return Seq(act, Zero())

    def action(self) -> Action:
        tok = self.tok
        kind = self.ident()
        if kind not in ACTION_KINDS:
            self.error(f"unknown action {kind!r}", tok)
        self.expect("(")
        if kind in ("drip", "pino"):
            act = Action(kind, None, self.proc())
        else:
            chan = self.ident()
            rho = None
            if kind in RHO_KINDS:
                self.expect(",")
                rho = self.proc()
            act = Action(kind, chan, rho)
        self.expect(")")
        return act


def _build(node) -> System:
    tag = node[0]
    if tag == "diamond":
        return Diamond()
    if tag == "compose":
        return Compose(_build(node[1]), _build(node[2]))
    if tag == "sbang":
        return SysBang(_build(node[1]))
    return Membrane(node[1], _build(node[2]), node[3])


def parse(text: str) -> System:
    """Parse concrete syntax into a labelled system term.

    Unlabelled membranes receive ``m1, m2, ...`` in source order, skipping
    names that are used explicitly.
    """
    p = _Parser(text)
    tree = p.system()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r}")
    seen: dict[str, _Tok] = {}
    for _, node in p.labels:
        if node[3] is not None:
            name, tok = node[3]
            if name in seen:
                raise ParseError(f"duplicate membrane label {name!r}", tok.line, tok.col)
            seen[name] = tok
            node[3] = name
    counter = 0
    for _, node in sorted(p.labels, key=lambda x: x[0]):
        if node[3] is None:
            counter += 1
            while f"m{counter}" in seen:
                counter += 1
            node[3] = f"m{counter}"
    return _build(tree)


def parse_proc(text: str) -> Proc:
    p = _Parser(text)
    node = p.proc()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r}")
    return node


def parse_action(text: str) -> Action:
    """Parse a single action such as ``cobud(o, mate(r))`` (canonical form)."""
    p = _Parser(text)
    act = p.action()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r}")
    return canon_action(act)


# --------------------------------------------------------------- functions


def actions_of(sigma) -> frozenset[Action]:
    """The set of actions occurring at top level of a membrane process (prefix order is lost)."""
    if isinstance(sigma, CProc):
        return frozenset(sigma.actions())
    if isinstance(sigma, Zero):
        return frozenset()
    if isinstance(sigma, Seq):
        return frozenset({sigma.action}) | actions_of(sigma.cont)
    if isinstance(sigma, ProcBang):
        return actions_of(sigma.body)
    if isinstance(sigma, Par):
        return actions_of(sigma.left) | actions_of(sigma.right)
    raise TypeError(sigma)


def membranes(P: System) -> Iterator[Membrane]:
    """All membrane nodes of a system, outermost first."""
    if isinstance(P, Membrane):
        yield P
        yield from membranes(P.content)
    elif isinstance(P, Compose):
        yield from membranes(P.left)
        yield from membranes(P.right)
    elif isinstance(P, SysBang):
        yield from membranes(P.body)


def labels_of(P: System) -> list[str]:
    return [m.label for m in membranes(P)]


# ----------------------------------------------------------- normal forms


@dataclass(frozen=True, eq=False)
class CAtom:
    """``a.cont`` inside a canonical process, possibly replicated."""

    action: Action
    cont: "CProc"
    banged: bool = False
    text: str = field(init=False, repr=False)

    def __post_init__(self):
        body = str(self.action)
        if self.cont.atoms:
            c = str(self.cont)
            body += "." + (f"({c})" if len(self.cont.atoms) > 1 else c)
        object.__setattr__(self, "text", ("!" if self.banged else "") + body)

    def __eq__(self, other):
        return isinstance(other, CAtom) and self.text == other.text

    def __hash__(self):
        return hash(("a", self.text))

    def __str__(self):
        return self.text


@dataclass(frozen=True, eq=False)
class CProc:
    """Canonical membrane process: a sorted multiset of atoms."""

    atoms: tuple[CAtom, ...] = ()
    text: str = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(sorted(self.atoms, key=lambda a: a.text)))
        object.__setattr__(self, "text", " | ".join(a.text for a in self.atoms) or "0")

    def __eq__(self, other):
        return isinstance(other, CProc) and self.text == other.text

    def __hash__(self):
        return hash(("p", self.text))

    def __str__(self):
        return self.text

    def __bool__(self):
        return bool(self.atoms)

    def actions(self) -> Iterator[Action]:
        for a in self.atoms:
            yield a.action
            yield from a.cont.actions()


@dataclass(frozen=True, eq=False)
class CMembrane:
    proc: CProc
    content: "CanonicalSystem"
    label: str
    banged: bool = False
    text: str = field(init=False, repr=False)

    def __post_init__(self):
        proc = self.proc.text
        if len(self.proc.atoms) > 1 or proc.startswith("!"):
            proc = f"({proc})"
        content = self.content.text if self.content.items else ""
        object.__setattr__(self, "text", f"{'!' if self.banged else ''}{proc}<{content}>@{self.label}")

    def __eq__(self, other):
        return isinstance(other, CMembrane) and self.text == other.text

    def __hash__(self):
        return hash(("m", self.text))

    def __str__(self):
        return self.text

    def replace(self, **kw) -> "CMembrane":
        args = dict(proc=self.proc, content=self.content, label=self.label, banged=self.banged)
        args.update(kw)
        return CMembrane(**args)

    @property
    def erased(self) -> bool:
        return not self.proc.atoms and not self.content.items


@dataclass(frozen=True, eq=False)
class CanonicalSystem:
    """Canonical system: a sorted multiset of (possibly replicated) membranes."""

    items: tuple[CMembrane, ...] = ()
    text: str = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(sorted(self.items, key=lambda m: m.text)))
        object.__setattr__(self, "text", " || ".join(m.text for m in self.items) or "zero")

    def __eq__(self, other):
        return isinstance(other, CanonicalSystem) and self.text == other.text

    def __hash__(self):
        return hash(("s", self.text))

    def __str__(self):
        return self.text


def canon_action(a: Action) -> Action:
    if a.rho is None or isinstance(a.rho, CProc):
        return a
    return Action(a.kind, a.channel, canon_proc(a.rho))


def _proc_atoms(p, banged: bool) -> list[CAtom]:
    if isinstance(p, CProc):
        return [CAtom(a.action, a.cont, a.banged or banged) for a in p.atoms]
    if isinstance(p, Zero):
        return []
    if isinstance(p, Par):
        return _proc_atoms(p.left, banged) + _proc_atoms(p.right, banged)
    if isinstance(p, ProcBang):
        return _proc_atoms(p.body, True)
    if isinstance(p, Seq):
        return [CAtom(canon_action(p.action), canon_proc(p.cont), banged)]
    raise TypeError(p)


def canon_proc(p) -> CProc:
    if isinstance(p, CProc):
        return p
    return CProc(tuple(_proc_atoms(p, False)))


def _sys_items(P, banged: bool) -> list[CMembrane]:
    if isinstance(P, Diamond):
        return []
    if isinstance(P, Compose):
        return _sys_items(P.left, banged) + _sys_items(P.right, banged)
    if isinstance(P, SysBang):
        return _sys_items(P.body, True)
    if isinstance(P, Membrane):
        m = CMembrane(canon_proc(P.proc), canonicalize(P.content), P.label, banged)
        return [] if m.erased else [m]
    raise TypeError(P)


def canonicalize(P) -> CanonicalSystem:
    """Normal form modulo the monoid laws, bang distribution/collapse and ``0<>@m == zero``.

    Replication unfolding (``!P == P || !P``) is deliberately not applied.
    """
    if isinstance(P, CanonicalSystem):
        return P
    return CanonicalSystem(tuple(_sys_items(P, False)))


def proc_to_ast(p: CProc) -> Proc:
    terms: list[Proc] = []
    for a in p.atoms:
        act = a.action
        if isinstance(act.rho, CProc):
            act = Action(act.kind, act.channel, proc_to_ast(act.rho))
        t: Proc = Seq(act, proc_to_ast(a.cont))
        terms.append(ProcBang(t) if a.banged else t)
    if not terms:
        return Zero()
    node = terms[0]
    for t in terms[1:]:
        node = Par(node, t)
    return node


def to_term(S: CanonicalSystem) -> System:
    """Re-materialise a canonical system as an AST."""
    terms: list[System] = []
    for m in S.items:
        t: System = Membrane(proc_to_ast(m.proc), to_term(m.content), m.label)
        terms.append(SysBang(t) if m.banged else t)
    if not terms:
        return Diamond()
    node = terms[0]
    for t in terms[1:]:
        node = Compose(node, t)
    return node


def canonical_actions(S: CanonicalSystem) -> list[Action]:
    """Every action residing on some membrane of ``S`` (with multiplicity)."""
    out: list[Action] = []
    for m in S.items:
        out.extend(m.proc.actions())
        out.extend(canonical_actions(m.content))
    return out


# ------------------------------------------------------ random rearrangement


def _shuffle_proc(p: Proc, rng) -> Proc:
    if isinstance(p, Seq):
        act = p.action
        if act.rho is not None and not isinstance(act.rho, CProc):
            act = Action(act.kind, act.channel, _shuffle_proc(act.rho, rng))
        p = Seq(act, _shuffle_proc(p.cont, rng))
    elif isinstance(p, Par):
        left, right = _shuffle_proc(p.left, rng), _shuffle_proc(p.right, rng)
        r = rng.random()
        if r < 0.4:
            left, right = right, left
        elif r < 0.6 and isinstance(left, Par):
            return Par(left.left, Par(left.right, right))
        elif r < 0.7 and isinstance(left, ProcBang) and isinstance(right, ProcBang):
            return ProcBang(Par(left.body, right.body))
        p = Par(left, right)
    elif isinstance(p, ProcBang):
        body = _shuffle_proc(p.body, rng)
        r = rng.random()
        if isinstance(body, ProcBang) and r < 0.5:
            return body
        if isinstance(body, Par) and r < 0.5:
            return Par(ProcBang(body.left), ProcBang(body.right))
        p = ProcBang(ProcBang(body) if r > 0.85 else body)
    r = rng.random()
    if r < 0.1:
        return Par(p, Zero())
    if r < 0.15 and isinstance(p, Zero):
        return ProcBang(Zero())
    return p


def _shuffle_sys(P: System, rng) -> System:
    if isinstance(P, Membrane):
        proc, content = _shuffle_proc(P.proc, rng), _shuffle_sys(P.content, rng)
        if not canon_proc(proc).atoms and not _sys_items(content, False) and rng.random() < 0.5:
            return Diamond()
        P = Membrane(proc, content, P.label)
    elif isinstance(P, Compose):
        left, right = _shuffle_sys(P.left, rng), _shuffle_sys(P.right, rng)
        r = rng.random()
        if r < 0.4:
            left, right = right, left
        elif r < 0.6 and isinstance(left, Compose):
            return Compose(left.left, Compose(left.right, right))
        elif r < 0.7 and isinstance(left, SysBang) and isinstance(right, SysBang):
            return SysBang(Compose(left.body, right.body))
        P = Compose(left, right)
    elif isinstance(P, SysBang):
        body = _shuffle_sys(P.body, rng)
        r = rng.random()
        if isinstance(body, SysBang) and r < 0.5:
            return body
        if isinstance(body, Compose) and r < 0.5:
            return Compose(SysBang(body.left), SysBang(body.right))
        P = SysBang(SysBang(body) if r > 0.85 else body)
    r = rng.random()
    if r < 0.1:
        return Compose(Diamond(), P) if rng.random() < 0.5 else Compose(P, Diamond())
    if r < 0.15 and isinstance(P, Diamond):
        return SysBang(Diamond())
    return P


def rearrange(P: System, rng) -> System:
    """A random structurally congruent variant of ``P``.

    Uses the monoid laws, bang distribution and collapse, and erasure of
    empty membranes.  Replication is never unfolded and an empty membrane is
    never introduced, since its label would be fresh.
    """
    return _shuffle_sys(P, rng)
