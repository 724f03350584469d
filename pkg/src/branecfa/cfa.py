"""Contextual 2CFA for brane systems: estimates (I, C, R), validation and solving.

``I`` maps a slot ``(gp, p, mu)`` (membrane ``mu`` inside ``p`` inside ``gp``)
to the membranes that may sit inside ``mu`` and the actions that may reside
on it.  ``C`` maps a derived membrane to the firings that can create it and
``R`` holds pairs of slots whose occupants can never coexist.

The solver saturates the closure rules by round-robin chaotic iteration.
Every rule instance that has fired once is re-applied on every later round,
so its inclusion constraints keep propagating even if a later ``R`` entry
would now block its premise.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

from .semantics import MiKey, MiRegistry, ROOT_SLOT, Slot, is_generated
from .syntax import (
    CO_ACTION,
    ROOT,
    Action,
    CanonicalSystem,
    CProc,
    Compose,
    Diamond,
    Membrane,
    SysBang,
    actions_of,
    canon_action,
    canonicalize,
    parse_action,
)

Item = Union[str, Action]

SOUND = "sound"
STRICT = "strict-paper"
MODES = (SOUND, STRICT)
DEFAULT_MEMBRANE_CAP = 4096


class MembraneCapExceeded(RuntimeError):
    def __init__(self, cap: int, count: int, recent: list[str]):
        self.cap = cap
        self.count = count
        self.recent = recent
        super().__init__(
            f"membrane-id universe reached {count} ids (cap {cap}); the closure does not "
            f"appear to terminate. Most recently derived: {', '.join(recent)}"
        )


def item_key(item: Item) -> tuple:
    return (0, item) if isinstance(item, str) else (1, str(item))


def is_label(item: Item) -> bool:
    return isinstance(item, str)


@dataclass(frozen=True)
class CausalRecord:
    """``(a, muP, co_a, muQ, gp, p, mu)`` or, for drip and pino, ``(a, muP, gp, p, mu)``."""

    action: Action
    mu_p: str
    coaction: Action | None
    mu_q: str | None
    ctx: Slot

    @property
    def arity(self) -> int:
        return 1 if self.coaction is None else 2

    @property
    def rule(self) -> str:
        return self.action.kind

    def participants(self) -> tuple[str, ...]:
        return (self.mu_p,) if self.mu_q is None else (self.mu_p, self.mu_q)

    def sort_key(self) -> tuple:
        return (str(self.action), self.mu_p, str(self.coaction or ""), self.mu_q or "", self.ctx)

    def __str__(self):
        ctx = ", ".join(self.ctx)
        if self.coaction is None:
            return f"({self.action}, {self.mu_p}, {ctx})"
        return f"({self.action}, {self.mu_p}, {self.coaction}, {self.mu_q}, {ctx})"

    def to_json(self) -> dict:
        out = {"arity": self.arity, "a": str(self.action), "muP": self.mu_p}
        if self.coaction is not None:
            out.update(coa=str(self.coaction), muQ=self.mu_q)
        out["ctx"] = list(self.ctx)
        return out

    @classmethod
    def from_json(cls, d: dict, rename=lambda x: x) -> "CausalRecord":
        co = d.get("coa")
        return cls(
            parse_action(d["a"]),
            rename(d["muP"]),
            None if co is None else parse_action(co),
            None if co is None else rename(d["muQ"]),
            tuple(rename(x) for x in d["ctx"]),
        )


@dataclass(frozen=True)
class Estimate:
    I: Mapping[Slot, frozenset]
    C: Mapping[str, frozenset] = field(default_factory=dict)
    R: frozenset = frozenset()
    # labels that may be instantiated more than once; None when unknown
    multiple: frozenset | None = None
    derived: Mapping[str, MiKey] = field(default_factory=dict)

    def get(self, slot: Slot) -> frozenset:
        return self.I.get(tuple(slot), frozenset())

    def causes(self, mu: str) -> frozenset:
        return self.C.get(mu, frozenset())

    def membrane_ids(self) -> set[str]:
        ids = set()
        for slot, items in self.I.items():
            ids.update(slot)
            ids.update(x for x in items if is_label(x))
        ids.update(self.C)
        ids.discard(ROOT)
        return ids

    def entries(self) -> Iterator[tuple[Slot, Item]]:
        for slot in sorted(self.I):
            for item in sorted(self.I[slot], key=item_key):
                yield slot, item

    def records(self) -> Iterator[tuple[str, CausalRecord]]:
        for mu in sorted(self.C):
            for rec in sorted(self.C[mu], key=CausalRecord.sort_key):
                yield mu, rec

    def to_json(self) -> dict:
        out = {
            "I": [
                {
                    "ctx": list(slot),
                    "item": {"kind": "membrane", "id": x} if is_label(x) else {"kind": "action", "text": str(x)},
                }
                for slot, x in self.entries()
            ],
            "C": [{"membrane": mu, "record": rec.to_json()} for mu, rec in self.records()],
            "R": [{"left": list(a), "right": list(b)} for a, b in sorted(self.R)],
        }
        if self.derived:
            out["labels"] = {mu: str(self.derived[mu]) for mu in sorted(self.derived)}
        if self.multiple is not None:
            out["multiple"] = sorted(self.multiple)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, data: dict, rename=lambda x: x) -> "Estimate":
        I: dict[Slot, set] = defaultdict(set)
        for e in data.get("I", []):
            slot = tuple(rename(x) for x in e["ctx"])
            it = e["item"]
            I[slot].add(rename(it["id"]) if it["kind"] == "membrane" else parse_action(it["text"]))
        C: dict[str, set] = defaultdict(set)
        for e in data.get("C", []):
            C[rename(e["membrane"])].add(CausalRecord.from_json(e["record"], rename))
        R = {
            (tuple(rename(x) for x in e["left"]), tuple(rename(x) for x in e["right"]))
            for e in data.get("R", [])
        }
        multiple = data.get("multiple")
        return cls(
            {k: frozenset(v) for k, v in I.items()},
            {k: frozenset(v) for k, v in C.items()},
            frozenset(R),
            None if multiple is None else frozenset(rename(x) for x in multiple),
        )


# ------------------------------------------------------- R reachability


def _adjacency(pairs: Iterable[tuple[Slot, Slot]]) -> dict[Slot, set[Slot]]:
    adj: dict[Slot, set[Slot]] = defaultdict(set)
    for a, b in pairs:
        adj[a].add(b)
    return adj


def _reaches(adj: Mapping[Slot, set], src: Slot, dst: Slot) -> bool:
    if src == dst:
        return False
    stack, seen = [src], {src}
    while stack:
        for nxt in adj.get(stack.pop(), ()):
            if nxt == dst:
                return True
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


def transitive_closure(pairs: Iterable[tuple[Slot, Slot]]) -> frozenset:
    adj = _adjacency(pairs)
    out = set()
    for src in list(adj):
        stack, seen = [src], set()
        while stack:
            for nxt in adj.get(stack.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        out.update((src, d) for d in seen)
    return frozenset(out)


def _single(slot: Slot, multiple) -> bool:
    return not any(mu in multiple for mu in slot if mu != ROOT)


def _blocked(adj, multiple, s1: Slot, s2: Slot) -> bool:
    # an R chain only proves exclusion when its earlier end cannot be duplicated
    return (_single(s1, multiple) and _reaches(adj, s1, s2)) or (_single(s2, multiple) and _reaches(adj, s2, s1))


class Lineage:
    """Single membranes that mates in a label's ancestry have consumed.

    A derived id hashes its whole firing key, so it has exactly one causal
    record.  If ``Y`` exists then every ancestor firing of ``Y`` happened, and
    a single membrane fused away by one of those mates is gone for good.  Two
    labels whose ancestries fuse the same single membrane through different
    mates are alternatives and never coexist either.
    """

    def __init__(self, C: Mapping, multiple):
        self.C = C
        self.multiple = multiple
        self.memo: dict[str, dict[str, frozenset]] = {}

    def consumed(self, mu: str, visiting=frozenset()) -> dict[str, frozenset]:
        """Map each single membrane consumed in ``mu``'s ancestry to the mates that fused it."""
        if mu in self.memo:
            return self.memo[mu]
        out: dict[str, frozenset] = {}
        recs = self.C.get(mu, ())
        if len(recs) == 1 and mu not in visiting:
            (rec,) = recs
            for anc in rec.participants():
                if rec.rule == "mate" and anc not in self.multiple:
                    out[anc] = out.get(anc, frozenset()) | {mu}
                for x, ds in self.consumed(anc, visiting | {mu}).items():
                    out[x] = out.get(x, frozenset()) | ds
        self.memo[mu] = out
        return out

    def excludes(self, a: str, b: str) -> bool:
        ca, cb = self.consumed(a), self.consumed(b)
        if a in cb or b in ca:
            return True
        return any(len(ca[x] | cb[x]) > 1 for x in ca.keys() & cb.keys())


def r_blocks(est: Estimate, s1: Slot, s2: Slot) -> bool:
    """True iff the two slots are R-related in either direction, directly or transitively."""
    return _blocked(_adjacency(est.R), est.multiple or frozenset(), tuple(s1), tuple(s2))


# ------------------------------------------------------------ multiplicity


def _nested_actions(proc: CProc) -> Iterator[Action]:
    for atom in proc.atoms:
        yield atom.action
        if isinstance(atom.action.rho, CProc):
            yield from _nested_actions(atom.action.rho)
        yield from _nested_actions(atom.cont)


def _syntactic_multiplicity(S: CanonicalSystem) -> tuple[set[str], set[Action]]:
    """Labels under a replicated system and actions that may fire more than once."""
    multi: set[str] = set()
    rep: set[Action] = set()
    counts: Counter = Counter()

    def walk_proc(proc: CProc, banged: bool):
        for atom in proc.atoms:
            b = banged or atom.banged
            counts[atom.action] += 1
            if b:
                rep.add(atom.action)
            if isinstance(atom.action.rho, CProc):
                walk_proc(atom.action.rho, b)
            walk_proc(atom.cont, b)

    def walk_sys(level: CanonicalSystem, banged: bool):
        for m in level.items:
            b = banged or m.banged
            if b:
                multi.add(m.label)
            walk_proc(m.proc, b)
            walk_sys(m.content, b)

    walk_sys(S, False)
    rep.update(a for a, n in counts.items() if n > 1)
    return multi, rep


def _record_multiple(rec: CausalRecord, multi, rep) -> bool:
    p_many = rec.mu_p in multi
    if rec.coaction is None:
        return p_many or rec.action in rep
    q_many = rec.mu_q in multi
    if rec.rule == "mate":
        # both participants are consumed
        return p_many and q_many
    return (p_many or rec.action in rep) and (q_many or rec.coaction in rep)


def multiplicity(base: tuple[set, set], I: Mapping, C: Mapping) -> tuple[frozenset, frozenset]:
    """Labels that may be instantiated twice and actions that may fire twice."""
    multi, rep = set(base[0]), set(base[1])
    while True:
        size = (len(multi), len(rep))
        for a in list(rep):
            if isinstance(a.rho, CProc):
                rep.update(_nested_actions(a.rho))
        for slot, items in I.items():
            if slot[2] in multi:
                rep.update(x for x in items if not is_label(x))
        for mu, recs in C.items():
            if mu not in multi and any(_record_multiple(r, multi, rep) for r in recs):
                multi.add(mu)
        if (len(multi), len(rep)) == size:
            return frozenset(multi), frozenset(rep)


# ------------------------------------------------------------ rule instances


@dataclass(frozen=True, order=True)
class Instance:
    """One firing of a closure rule: ``mu_p`` is the principal, ``mu_q`` the co-side."""

    rule: str
    ctx: Slot
    mu_p: str
    mu_q: str | None
    action: Action = field(compare=False)
    coaction: Action | None = field(compare=False)
    text: str = ""

    @classmethod
    def make(cls, rule, action, mu_p, coaction, mu_q, ctx):
        text = f"{action}|{coaction}"
        return cls(rule, ctx, mu_p, mu_q, action, coaction, text)

    def key(self) -> MiKey:
        return MiKey(self.rule, self.action, self.mu_p, self.coaction, self.mu_q, self.ctx)

    def record(self) -> CausalRecord:
        return CausalRecord(self.action, self.mu_p, self.coaction, self.mu_q, self.ctx)

    def describe(self) -> str:
        side = f"{self.action} on {self.mu_p}"
        if self.coaction is not None:
            side += f", {self.coaction} on {self.mu_q}"
        return f"({self.rule.capitalize()}) [{side}] in ({','.join(self.ctx)})"


def _actions(items) -> list[Action]:
    return sorted((x for x in items if not is_label(x)), key=str)


def _labels(items) -> list[str]:
    return sorted(x for x in items if is_label(x))


def instances(I: Mapping, blocked, multi) -> Iterator[Instance]:
    """All rule instances whose premises hold in ``I`` (``blocked(s1, s2)`` realises the R premise)."""
    empty = frozenset()
    for ctx in sorted(I):
        kids = _labels(I[ctx])
        if not kids:
            continue
        gp, p, mu = ctx
        for P in kids:
            acts = _actions(I.get((p, mu, P), empty))
            for a in acts:
                if a.kind in ("drip", "pino"):
                    yield Instance.make(a.kind, a, P, None, None, ctx)
                elif a.kind in ("mate", "phago"):
                    for Q in kids:
                        if Q == P and P not in multi:
                            continue
                        co_kind = CO_ACTION[a.kind]
                        cos = [c for c in _actions(I.get((p, mu, Q), empty))
                               if c.kind == co_kind and c.channel == a.channel]
                        if cos and not blocked((p, mu, P), (p, mu, Q)):
                            for c in cos:
                                yield Instance.make(a.kind, a, P, c, Q, ctx)
                elif a.kind in ("cobud", "coexo"):
                    kind = "bud" if a.kind == "cobud" else "exo"
                    # P is the outer (co-side) membrane here
                    for child in _labels(I.get((p, mu, P), empty)):
                        for b in _actions(I.get((mu, P, child), empty)):
                            if b.kind == kind and b.channel == a.channel:
                                yield Instance.make(kind, b, child, a, P, ctx)


@dataclass
class Conclusions:
    I: list = field(default_factory=list)  # (slot, item)
    C: list = field(default_factory=list)  # (membrane, record)
    R: list = field(default_factory=list)  # (slot, slot)
    created: str | None = None


def conclusions(inst: Instance, I: Mapping, mode: str = SOUND, rep=frozenset()) -> Conclusions:
    """Facts an estimate must contain once ``inst``'s premises hold, read against ``I``."""
    out = Conclusions()
    empty = frozenset()
    gp, p, mu = inst.ctx
    P, Q = inst.mu_p, inst.mu_q

    def get(slot):
        return I.get(slot, empty)

    def include(src, dst):
        out.I.extend((dst, x) for x in get(src))

    def rho_actions(a: Action):
        return actions_of(a.rho)

    rule = inst.rule
    if rule == "exo":
        inner = get((mu, Q, P))
        # the expelled membranes land next to Q; P's actions merge onto Q
        out.I.extend((inst.ctx, x) for x in _labels(inner))
        out.I.extend(((p, mu, Q), x) for x in _actions(inner) if x != inst.action or x in rep)
        if mode == SOUND:
            for s in _labels(inner):
                include((Q, P, s), (p, mu, s))
                for t in _labels(get((Q, P, s))):
                    include((P, s, t), (mu, s, t))
        return out

    new = MiRegistry.name_for(inst.key())
    out.created = new
    out.C.append((new, inst.record()))

    if rule == "mate":
        out.I.append((inst.ctx, new))
        for X in (P, Q):
            include((p, mu, X), (p, mu, new))
            out.R.append(((p, mu, X), (p, mu, new)))
            for s in _labels(get((p, mu, X))):
                include((mu, X, s), (mu, new, s))
                out.R.append(((mu, X, s), (mu, new, s)))
                for t in _labels(get((mu, X, s))):
                    include((X, s, t), (new, s, t))
    elif rule == "bud":
        out.I.append((inst.ctx, new))
        out.I.extend(((p, mu, new), a) for a in rho_actions(inst.coaction))
        out.I.append(((p, mu, new), P))
        include((mu, Q, P), (mu, new, P))
        out.R.append(((mu, Q, P), (mu, new, P)))
        for s in _labels(get((mu, Q, P))):
            include((Q, P, s), (new, P, s))
            out.R.append(((Q, P, s), (new, P, s)))
    elif rule == "drip":
        out.I.append((inst.ctx, new))
        out.I.extend(((p, mu, new), a) for a in rho_actions(inst.action))
    elif rule == "phago":
        out.I.extend(((mu, Q, new), a) for a in rho_actions(inst.coaction))
        out.I.append(((p, mu, Q), new))
        out.I.append(((mu, Q, new), P))
        out.R.append(((p, mu, P), (Q, new, P)))
        for s in _labels(get((p, mu, P))):
            out.R.append(((mu, P, s), (new, P, s)))
        if mode == SOUND:
            include((p, mu, P), (Q, new, P))
            for s in _labels(get((p, mu, P))):
                include((mu, P, s), (new, P, s))
    elif rule == "pino":
        out.I.extend(((mu, P, new), a) for a in rho_actions(inst.action))
        out.I.append(((p, mu, P), new))
    else:
        raise ValueError(rule)
    return out


# ------------------------------------------------------------------ seeding


def _seed(P, ctx: Slot, out: list):
    """Facts demanded by the syntax-directed clauses of the judgement."""
    if isinstance(P, Diamond):
        return
    if isinstance(P, Compose):
        _seed(P.left, ctx, out)
        _seed(P.right, ctx, out)
    elif isinstance(P, SysBang):
        _seed(P.body, ctx, out)
    elif isinstance(P, Membrane):
        gp, p, mu = ctx
        inner = (p, mu, P.label)
        out.append(("membrane", ctx, P.label, P.label))
        for a in sorted(actions_of(P.proc), key=str):
            out.append(("actions", inner, canon_action(a), P.label))
        _seed(P.content, inner, out)
    else:
        raise TypeError(P)


# ------------------------------------------------------------------- solver


class _Solver:
    def __init__(self, mode: str, membrane_cap: int):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self.mode = mode
        self.cap = membrane_cap
        self.I: dict[Slot, set] = defaultdict(set)
        self.C: dict[str, set] = defaultdict(set)
        self.R: set = set()
        self.adj: dict[Slot, set] = defaultdict(set)
        self.fired: list[Instance] = []
        self.fired_set: set[Instance] = set()
        self.multi: frozenset = frozenset()
        self.rep: frozenset = frozenset()
        self.lineage: Lineage | None = None
        self.ids: set[str] = set()
        self.keys: dict[str, MiKey] = {}

    def add_I(self, slot, item) -> bool:
        bucket = self.I[slot]
        if item in bucket:
            return False
        bucket.add(item)
        if is_label(item) and item not in self.ids:
            self.ids.add(item)
            if len(self.ids) > self.cap:
                recent = sorted(x for x in self.ids if is_generated(x))[-3:]
                raise MembraneCapExceeded(self.cap, len(self.ids), recent)
        return True

    def apply(self, inst: Instance) -> bool:
        con = conclusions(inst, self.I, self.mode, self.rep)
        changed = False
        if con.created is not None and con.created not in self.keys:
            self.keys[con.created] = inst.key()
        for a, b in con.R:
            if (a, b) not in self.R:
                self.R.add((a, b))
                self.adj[a].add(b)
                changed = True
        for mu, rec in con.C:
            if rec not in self.C[mu]:
                self.C[mu].add(rec)
                self.lineage = None
                changed = True
        for slot, item in con.I:
            changed |= self.add_I(slot, item)
        return changed

    def blocked(self, s1, s2) -> bool:
        if self.lineage is None:
            self.lineage = Lineage(self.C, self.multi)
        return self.lineage.excludes(s1[2], s2[2]) or _blocked(self.adj, self.multi, s1, s2)

    def run(self, term, base):
        seeds: list = []
        _seed(term, ROOT_SLOT, seeds)
        for _, slot, item, _ in seeds:
            self.add_I(slot, item)
        while True:
            multi, rep = multiplicity(base, self.I, self.C)
            changed = multi != self.multi or rep != self.rep
            self.multi, self.rep = multi, rep
            self.lineage = None
            for inst in self.fired:
                changed |= self.apply(inst)
            for inst in list(instances(self.I, self.blocked, self.multi)):
                if inst in self.fired_set:
                    continue
                # R may have grown since enumeration started
                if inst.mu_q is not None and inst.rule in ("mate", "phago"):
                    gp, p, mu = inst.ctx
                    if self.blocked((p, mu, inst.mu_p), (p, mu, inst.mu_q)):
                        continue
                self.fired.append(inst)
                self.fired_set.add(inst)
                self.apply(inst)
                changed = True
            if not changed:
                break


def solve(P, mode: str = SOUND, membrane_cap: int = DEFAULT_MEMBRANE_CAP) -> Estimate:
    """Least-effort stable estimate for ``P`` (a term or its source text is not accepted; parse first)."""
    S = canonicalize(P)
    solver = _Solver(mode, membrane_cap)
    solver.run(P, _syntactic_multiplicity(S))
    I = {k: frozenset(v) for k, v in solver.I.items() if v}
    C = {k: frozenset(v) for k, v in solver.C.items() if v}
    return Estimate(I, C, transitive_closure(solver.R), frozenset(solver.multi), dict(solver.keys))


# ---------------------------------------------------------------- validate


@dataclass(frozen=True)
class Violation:
    clause: str
    detail: str

    def __str__(self):
        return f"{self.clause}: {self.detail}"


def _fmt_slot(slot) -> str:
    return "(" + ",".join(slot) + ")"


def _check_term(est: Estimate, P, ctx: Slot, out: list):
    if isinstance(P, Diamond):
        return
    if isinstance(P, Compose):
        _check_term(est, P.left, ctx, out)
        _check_term(est, P.right, ctx, out)
    elif isinstance(P, SysBang):
        _check_term(est, P.body, ctx, out)
    elif isinstance(P, Membrane):
        gp, p, mu = ctx
        inner = (p, mu, P.label)
        if P.label not in est.get(ctx):
            out.append(Violation("membrane", f"{P.label} not in I{_fmt_slot(ctx)}"))
        have = est.get(inner)
        for a in sorted(actions_of(P.proc), key=str):
            if canon_action(a) not in have:
                out.append(Violation("membrane", f"{a} not in I{_fmt_slot(inner)}"))
        _check_term(est, P.content, inner, out)
    else:
        raise TypeError(P)


def validate(est: Estimate, P, mode: str = SOUND) -> list[Violation]:
    """Every obligation of the judgement ``I |= P`` at ``(*,*,*)`` that ``est`` violates.

    An empty list means the estimate is valid.  Both the syntax-directed
    clauses and all closure rules are checked.
    """
    out: list[Violation] = []
    _check_term(est, P, ROOT_SLOT, out)
    multi, rep = multiplicity(_syntactic_multiplicity(canonicalize(P)), est.I, est.C)
    if est.multiple is not None:
        multi = est.multiple
    adj = _adjacency(est.R)
    closure = transitive_closure(est.R)

    lineage = Lineage(est.C, multi)

    def blocked(s1, s2):
        return lineage.excludes(s1[2], s2[2]) or _blocked(adj, multi, s1, s2)

    for inst in instances(est.I, blocked, multi):
        con = conclusions(inst, est.I, mode, rep)
        label = inst.describe()
        for slot, item in con.I:
            if item not in est.get(slot):
                out.append(Violation(label, f"{item} not in I{_fmt_slot(slot)}"))
        for mu, rec in con.C:
            if rec not in est.causes(mu):
                out.append(Violation(label, f"{rec} not in C({mu})"))
        for a, b in con.R:
            if (a, b) not in closure:
                out.append(Violation(label, f"({_fmt_slot(a)}, {_fmt_slot(b)}) not in R"))
    # drop duplicates while keeping order
    return list(dict.fromkeys(out))


# -------------------------------------------------------------------- diff


@dataclass
class EstimateDiff:
    I: tuple[list, list]
    C: tuple[list, list]
    R: tuple[list, list]

    @property
    def empty(self) -> bool:
        return not any(self.I + self.C + self.R)

    def left_only(self) -> dict:
        return {"I": self.I[0], "C": self.C[0], "R": self.R[0]}

    def right_only(self) -> dict:
        return {"I": self.I[1], "C": self.C[1], "R": self.R[1]}

    def report(self) -> str:
        lines = []
        for name in ("I", "C", "R"):
            a, b = getattr(self, name)
            lines += [f"{name} only in left: {x}" for x in a]
            lines += [f"{name} only in right: {x}" for x in b]
        return "\n".join(lines)


def _fmt_I(entry) -> str:
    slot, item = entry
    return f"{item} in I{_fmt_slot(slot)}"


def diff_estimates(a: Estimate, b: Estimate) -> EstimateDiff:
    """Symmetric difference per component, each side in canonical order."""
    ia, ib = set(a.entries()), set(b.entries())
    ca, cb = set(a.records()), set(b.records())
    ra, rb = set(a.R), set(b.R)

    def ikey(e):
        return (e[0], item_key(e[1]))

    def ckey(e):
        return (e[0], e[1].sort_key())

    return EstimateDiff(
        ([_fmt_I(e) for e in sorted(ia - ib, key=ikey)], [_fmt_I(e) for e in sorted(ib - ia, key=ikey)]),
        ([f"{r} in C({m})" for m, r in sorted(ca - cb, key=ckey)],
         [f"{r} in C({m})" for m, r in sorted(cb - ca, key=ckey)]),
        ([f"({_fmt_slot(x)}, {_fmt_slot(y)})" for x, y in sorted(ra - rb)],
         [f"({_fmt_slot(x)}, {_fmt_slot(y)})" for x, y in sorted(rb - ra)]),
    )


def contains(big: Estimate, small: Estimate) -> EstimateDiff:
    """Entries of ``small`` missing from ``big`` (R compared up to transitivity)."""
    closure = transitive_closure(big.R)
    bigger = Estimate(big.I, big.C, closure)
    d = diff_estimates(small, bigger)
    return EstimateDiff((d.I[0], []), (d.C[0], []), (d.R[0], []))


# ---------------------------------------------------------------- goldens


def resolve_labels(defs: Mapping[str, dict]) -> dict[str, str]:
    """Map symbolic names of derived membranes to generated ids.

    Each definition is ``{"rule", "a", "muP", ["coa", "muQ"], "ctx"}`` whose
    membrane fields may refer to other symbolic names.
    """
    table: dict[str, str] = {}
    pending = dict(defs)
    while pending:
        progress = False
        for name, d in list(pending.items()):
            refs = [d["muP"], *d["ctx"]] + ([d["muQ"]] if "muQ" in d else [])
            if any(r in pending for r in refs):
                continue
            ren = lambda x: table.get(x, x)  # noqa: E731
            co = d.get("coa")
            key = MiKey(
                d["rule"],
                parse_action(d["a"]),
                ren(d["muP"]),
                None if co is None else parse_action(co),
                None if co is None else ren(d["muQ"]),
                tuple(ren(x) for x in d["ctx"]),
            )
            table[name] = MiRegistry.name_for(key)
            del pending[name]
            progress = True
        if not progress:
            raise ValueError(f"circular label definitions: {sorted(pending)}")
    return table


def load_golden(data: dict) -> tuple[Estimate, dict[str, str]]:
    """Read an expected-entries file; returns the estimate and the symbol table used."""
    # solver output also carries "labels", mapping ids to key strings; only dicts are definitions
    defs = {k: v for k, v in data.get("labels", {}).items() if isinstance(v, dict)}
    table = resolve_labels(defs)
    est = Estimate.from_json(data, rename=lambda x: table.get(x, x))
    return est, table
