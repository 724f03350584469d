"""Reduction semantics for MBD and PEP actions and bounded state-space exploration.

States are :class:`~branecfa.syntax.CanonicalSystem` values.  New membranes
get their identity from :class:`MiRegistry`, which names a membrane by a
digest of the action, participants and context that created it, so the same
firing always yields the same label no matter which exploration (or which
analysis run) asks for it.
"""

from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator

from .syntax import (
    ROOT,
    Action,
    CAtom,
    CanonicalSystem,
    CMembrane,
    CProc,
    canonicalize,
)

Slot = tuple[str, str, str]
ROOT_SLOT: Slot = (ROOT, ROOT, ROOT)

DEFAULT_STATE_CAP = 10_000


class ExplorationError(RuntimeError):
    pass


class StateCapExceeded(ExplorationError):
    def __init__(self, cap: int):
        super().__init__(f"state space exceeds the cap of {cap} states")
        self.cap = cap


# ----------------------------------------------------------- identities


@dataclass(frozen=True)
class MiKey:
    """Arguments of one MI_* call.  ``coaction``/``mu_q`` are None for drip and pino."""

    rule: str
    action: Action
    mu_p: str
    coaction: Action | None
    mu_q: str | None
    ctx: Slot

    def fields(self) -> tuple:
        return (
            self.rule,
            str(self.action),
            self.mu_p,
            None if self.coaction is None else str(self.coaction),
            self.mu_q,
            tuple(self.ctx),
        )

    def __str__(self):
        ctx = ",".join(self.ctx)
        if self.coaction is None:
            return f"MI_{self.rule}({self.action}, {self.mu_p}, {ctx})"
        return f"MI_{self.rule}({self.action}, {self.mu_p}, {self.coaction}, {self.mu_q}, {ctx})"


class MiRegistry:
    """Memoised, injective generator of fresh membrane identities."""

    def __init__(self):
        self._ids: dict[tuple, str] = {}
        self._keys: dict[str, MiKey] = {}

    @staticmethod
    def name_for(key: MiKey) -> str:
        digest = hashlib.sha256(repr(key.fields()).encode()).hexdigest()[:10]
        prefix = key.rule if key.action.channel is None else f"{key.rule}_{key.action.channel}"
        return f"{prefix}#{digest}"

    def get(self, key: MiKey) -> str:
        f = key.fields()
        mu = self._ids.get(f)
        if mu is None:
            mu = self.name_for(key)
            other = self._keys.get(mu)
            if other is not None and other.fields() != f:
                raise RuntimeError(f"identity collision between {other} and {key}")
            self._ids[f] = mu
            self._keys[mu] = key
        return mu

    def key_of(self, mu: str) -> MiKey | None:
        return self._keys.get(mu)

    def describe(self, mu: str) -> str:
        key = self._keys.get(mu)
        return mu if key is None else f"{mu} = {key}"

    def items(self) -> list[tuple[MiKey, str]]:
        return [(self._keys[mu], mu) for mu in sorted(self._keys)]

    def __len__(self):
        return len(self._ids)

    def __contains__(self, mu: str) -> bool:
        return mu in self._keys


def is_generated(mu: str) -> bool:
    return "#" in mu


# --------------------------------------------------------------- redexes


@dataclass(frozen=True)
class Redex:
    rule: str  # mate | bud | drip | phago | exo | pino
    mu_p: str
    mu_q: str | None
    channel: str | None
    rho: CProc | None
    ctx: Slot
    created: str | None = None

    @property
    def edge_label(self) -> str:
        return f"{self.rule}@{self.channel}" if self.channel else self.rule

    def __str__(self):
        parts = [self.mu_p] + ([self.mu_q] if self.mu_q else [])
        return f"{self.edge_label}({', '.join(parts)}) in ({','.join(self.ctx)})"


# ------------------------------------------------------ level normalisation


def _norm_proc(atoms: Iterable[CAtom]) -> CProc:
    atoms = list(atoms)
    banged = {a.text[1:] for a in atoms if a.banged}
    # a.s || !a.s == !a.s
    return CProc(tuple(a for a in atoms if a.banged or a.text not in banged))


def _norm_level(items: Iterable[CMembrane]) -> CanonicalSystem:
    items = [m for m in items if not m.erased]
    banged = {m.text[1:] for m in items if m.banged}
    return CanonicalSystem(tuple(m for m in items if m.banged or m.text not in banged))


def _fire(proc: CProc, atom: CAtom) -> CProc:
    """Consume ``atom`` (kept when replicated) and release its continuation."""
    rest = list(proc.atoms)
    if not atom.banged:
        rest.remove(atom)
    return _norm_proc(rest + list(atom.cont.atoms))


def _distinct_atoms(proc: CProc, kind: str) -> list[CAtom]:
    seen, out = set(), []
    for a in proc.atoms:
        if a.action.kind == kind and a.text not in seen:
            seen.add(a.text)
            out.append(a)
    return out


@dataclass
class _Entry:
    """A membrane available for reduction at one level."""

    mem: CMembrane  # with banged=False
    index: int
    copy: bool  # materialised from a replicated item


def _expand(items: tuple[CMembrane, ...], budget: int) -> list[_Entry]:
    pool = []
    for i, m in enumerate(items):
        if m.banged:
            plain = m.replace(banged=False)
            pool.extend(_Entry(plain, i, True) for _ in range(min(budget, 2)))
        else:
            pool.append(_Entry(m, i, False))
    return pool


def _rebuild(items, consumed: list[_Entry], added: list[CMembrane]) -> CanonicalSystem:
    drop = {e.index for e in consumed if not e.copy}
    kept = [m for i, m in enumerate(items) if i not in drop]
    return _norm_level(kept + added)


def _level_steps(level: CanonicalSystem, ctx: Slot, reg: MiRegistry, budget: int) -> Iterator[tuple[Redex, CanonicalSystem]]:
    items = level.items
    pool = _expand(items, budget)
    gp, p, mu = ctx
    # first copy of each item only, for unary rules and recursion
    singles = []
    seen_idx = set()
    for e in pool:
        if e.index not in seen_idx:
            seen_idx.add(e.index)
            singles.append(e)

    for e in singles:
        m = e.mem
        # (Brane): reduce inside the membrane
        for redex, content in _level_steps(m.content, (p, mu, m.label), reg, budget):
            yield redex, _rebuild(items, [e], [m.replace(content=content)])
        # (Drip)
        for atom in _distinct_atoms(m.proc, "drip"):
            rho = atom.action.rho
            r = reg.get(MiKey("drip", atom.action, m.label, None, None, ctx))
            new = [CMembrane(rho, CanonicalSystem(), r), m.replace(proc=_fire(m.proc, atom))]
            yield Redex("drip", m.label, None, None, rho, ctx, r), _rebuild(items, [e], new)
        # (Pino)
        for atom in _distinct_atoms(m.proc, "pino"):
            rho = atom.action.rho
            r = reg.get(MiKey("pino", atom.action, m.label, None, None, ctx))
            inner = CMembrane(rho, CanonicalSystem(), r)
            new = [m.replace(proc=_fire(m.proc, atom), content=_norm_level(m.content.items + (inner,)))]
            yield Redex("pino", m.label, None, None, rho, ctx, r), _rebuild(items, [e], new)
        # (Bud) and (Exo): m is the outer membrane
        for co_kind, kind in (("cobud", "bud"), ("coexo", "exo")):
            for co in _distinct_atoms(m.proc, co_kind):
                chan = co.action.channel
                inner_items = m.content.items
                inner_pool = _expand(inner_items, budget)
                done = set()
                for c in inner_pool:
                    if c.index in done:
                        continue
                    done.add(c.index)
                    for atom in _distinct_atoms(c.mem.proc, kind):
                        if atom.action.channel != chan:
                            continue
                        yield _outer_inner(kind, m, co, c, atom, inner_items, items, e, ctx, reg)

    # (Mate) and (Phago): ordered pairs of siblings; two copies of one
    # replicated item may interact when the budget allows both
    by_index: dict[int, list[_Entry]] = {}
    for e in pool:
        by_index.setdefault(e.index, []).append(e)
    for kind, co_kind in (("mate", "comate"), ("phago", "cophago")):
        for i, entries_i in by_index.items():
            e1 = entries_i[0]
            acts = _distinct_atoms(e1.mem.proc, kind)
            if not acts:
                continue
            for j, entries_j in by_index.items():
                if i == j:
                    if len(entries_j) < 2:
                        continue
                    e2 = entries_j[1]
                else:
                    e2 = entries_j[0]
                for atom in acts:
                    for co in _distinct_atoms(e2.mem.proc, co_kind):
                        if co.action.channel == atom.action.channel:
                            yield _siblings(kind, e1, atom, e2, co, items, ctx, reg)


def _siblings(kind, e1: _Entry, atom: CAtom, e2: _Entry, co: CAtom, items, ctx, reg):
    m1, m2 = e1.mem, e2.mem
    key = MiKey(kind, atom.action, m1.label, co.action, m2.label, ctx)
    r = reg.get(key)
    rest1, rest2 = _fire(m1.proc, atom), _fire(m2.proc, co)
    if kind == "mate":
        fused = CMembrane(
            _norm_proc(rest1.atoms + rest2.atoms),
            _norm_level(m1.content.items + m2.content.items),
            r,
        )
        redex = Redex("mate", m1.label, m2.label, atom.action.channel, None, ctx, r)
        return redex, _rebuild(items, [e1, e2], [fused])
    rho = co.action.rho
    wrapped = CMembrane(rho, _norm_level([m1.replace(proc=rest1)]), r)
    host = m2.replace(proc=rest2, content=_norm_level(m2.content.items + (wrapped,)))
    redex = Redex("phago", m1.label, m2.label, atom.action.channel, rho, ctx, r)
    return redex, _rebuild(items, [e1, e2], [host])


def _outer_inner(kind, outer: CMembrane, co: CAtom, inner: _Entry, atom: CAtom, inner_items, items, e_outer, ctx, reg):
    m_in = inner.mem
    rest_out = _fire(outer.proc, co)
    rest_in = _fire(m_in.proc, atom)
    remaining = _rebuild(inner_items, [inner], [])
    if kind == "bud":
        rho = co.action.rho
        r = reg.get(MiKey("bud", atom.action, m_in.label, co.action, outer.label, ctx))
        budded = CMembrane(rho, _norm_level([m_in.replace(proc=rest_in)]), r)
        new = [budded, outer.replace(proc=rest_out, content=remaining)]
        redex = Redex("bud", m_in.label, outer.label, atom.action.channel, rho, ctx, r)
        return redex, _rebuild(items, [e_outer], new)
    # exo: the inner content is released next to the outer membrane, whose
    # process absorbs the inner one's
    merged = outer.replace(proc=_norm_proc(rest_out.atoms + rest_in.atoms), content=remaining)
    redex = Redex("exo", m_in.label, outer.label, atom.action.channel, None, ctx, None)
    return redex, _rebuild(items, [e_outer], [merged, *m_in.content.items])


def step(P, reg: MiRegistry, unfold_budget: int = 2) -> list[tuple[Redex, CanonicalSystem]]:
    """All one-step successors of ``P``, deduplicated and in a fixed order."""
    if unfold_budget < 0:
        raise ValueError("unfold_budget must be >= 0")
    P = canonicalize(P)
    seen = {}
    for redex, succ in _level_steps(P, ROOT_SLOT, reg, unfold_budget):
        seen.setdefault((redex, succ.text), (redex, succ))
    return [seen[k] for k in sorted(seen, key=lambda k: (str(k[0]), k[0].created or "", k[1]))]


# ----------------------------------------------------------- exploration


@dataclass(frozen=True)
class TransitionSystem:
    initial: CanonicalSystem
    states: tuple[CanonicalSystem, ...]  # discovery order
    edges: tuple[tuple[str, Redex, str], ...]  # (src text, redex, dst text)
    truncated: bool
    registry: MiRegistry

    def state_index(self) -> dict[str, int]:
        return {s.text: i for i, s in enumerate(self.states)}

    def labels(self) -> set[str]:
        out: set[str] = set()
        for s in self.states:
            out.update(_labels(s))
        return out

    def to_json(self) -> dict:
        index = self.state_index()
        return {
            "states": [s.text for s in self.states],
            "edges": [
                {"src": index[a], "rule": r.rule, "channel": r.channel, "dst": index[b]}
                for a, r, b in self.edges
            ],
            "truncated": self.truncated,
        }

    def to_dot(self) -> str:
        index = self.state_index()
        lines = ["digraph transitions {"]
        for i, s in enumerate(self.states):
            shape = ', shape=doublecircle' if i == 0 else ""
            lines.append(f"  s{i} [label={json.dumps(s.text)}{shape}];")
        for a, r, b in self.edges:
            lines.append(f"  s{index[a]} -> s{index[b]} [label={json.dumps(r.edge_label)}];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _labels(S: CanonicalSystem) -> Iterator[str]:
    for m in S.items:
        yield m.label
        yield from _labels(m.content)


def explore(
    P,
    depth: int = 4,
    unfold_budget: int = 2,
    state_cap: int = DEFAULT_STATE_CAP,
    registry: MiRegistry | None = None,
) -> TransitionSystem:
    """Breadth-first exploration of ``P`` up to ``depth`` reduction steps."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    reg = registry if registry is not None else MiRegistry()
    init = canonicalize(P)
    states = {init.text: init}
    order = [init]
    edges: list[tuple[str, Redex, str]] = []
    truncated = False
    frontier = deque([(init, 0)])
    while frontier:
        S, d = frontier.popleft()
        succs = step(S, reg, unfold_budget)
        if unfold_budget < 2 and not truncated:
            wider = step(S, reg, 2)
            if {t.text for _, t in wider} - {t.text for _, t in succs}:
                truncated = True
        if d == depth:
            if succs:
                truncated = True
            continue
        for redex, T in succs:
            if T.text not in states:
                if len(states) >= state_cap:
                    raise StateCapExceeded(state_cap)
                states[T.text] = T
                order.append(T)
                frontier.append((T, d + 1))
            edges.append((S.text, redex, T.text))
    return TransitionSystem(init, tuple(order), tuple(edges), truncated, reg)


# ------------------------------------------------------- dynamic facts


def containments(S: CanonicalSystem) -> set[tuple[Slot, object]]:
    """Concrete containment/residency facts of one state, addressed by slot."""
    out: set[tuple[Slot, object]] = set()

    def walk(level: CanonicalSystem, ctx: Slot):
        gp, p, mu = ctx
        for m in level.items:
            out.add((ctx, m.label))
            inner = (p, mu, m.label)
            for a in m.proc.actions():
                out.add((inner, a))
            walk(m.content, inner)

    walk(S, ROOT_SLOT)
    return out


def dynamic_containments(ts: TransitionSystem) -> set[tuple[Slot, object]]:
    out: set[tuple[Slot, object]] = set()
    for S in ts.states:
        out |= containments(S)
    return out
