"""Spatial-structure properties and causality queries over estimates and explorations.

Static checks read an estimate, dynamic checks read every state of a bounded
exploration.  A statically true property is guaranteed to hold at run time;
the converse does not hold in general.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Union

from .cfa import CausalRecord, Estimate, is_label
from .semantics import TransitionSystem
from .syntax import Action, CanonicalSystem, ParseError, parse_action


class VacuousQueryWarning(UserWarning):
    """A query names a membrane that never occurs, so it holds trivially."""


@dataclass(frozen=True)
class ActionPattern:
    """An action to look for.  With ``rho`` omitted a co-bud/co-phago/drip/pino matches any argument."""

    kind: str
    channel: str | None = None
    rho: object | None = None

    def matches(self, a) -> bool:
        if not isinstance(a, Action) or a.kind != self.kind or a.channel != self.channel:
            return False
        return self.rho is None or a.rho == self.rho

    def __str__(self):
        if self.rho is not None:
            return str(Action(self.kind, self.channel, self.rho))
        return f"{self.kind}({self.channel})" if self.channel is not None else self.kind


_ABBREV = re.compile(r"^\s*(cobud|cophago)\s*\(\s*([A-Za-z][A-Za-z0-9_]*)\s*\)\s*$|^\s*(drip|pino)\s*$")


def parse_pattern(text: str) -> ActionPattern:
    m = _ABBREV.match(text)
    if m:
        if m.group(3):
            return ActionPattern(m.group(3))
        return ActionPattern(m.group(1), m.group(2))
    a = parse_action(text)
    return ActionPattern(a.kind, a.channel, a.rho)


@dataclass(frozen=True)
class NeverOn:
    action: ActionPattern
    mu: str

    def __str__(self):
        return f"never-on {self.action} {self.mu}"

    def labels(self) -> tuple[str, ...]:
        return (self.mu,)


@dataclass(frozen=True)
class NeverInside:
    inner: str
    mu: str

    def __str__(self):
        return f"never-inside {self.inner} {self.mu}"

    def labels(self) -> tuple[str, ...]:
        return (self.inner, self.mu)


@dataclass(frozen=True)
class NeverTogether:
    first: str
    second: str
    mu: str

    def __str__(self):
        return f"never-together {self.first} {self.second} {self.mu}"

    def labels(self) -> tuple[str, ...]:
        return (self.first, self.second, self.mu)


PropertyQuery = Union[NeverOn, NeverInside, NeverTogether]


def parse_query(line: str) -> PropertyQuery:
    words = line.split(None, 1)
    if not words:
        raise ParseError("empty query")
    cmd, rest = words[0], (words[1] if len(words) > 1 else "")
    if cmd == "never-on":
        # the action may contain spaces, the label is the last word
        head, _, mu = rest.rstrip().rpartition(" ")
        if not head:
            raise ParseError("never-on needs an action and a label")
        return NeverOn(parse_pattern(head), mu)
    args = rest.split()
    if cmd == "never-inside" and len(args) == 2:
        return NeverInside(*args)
    if cmd == "never-together" and len(args) == 3:
        return NeverTogether(*args)
    raise ParseError(f"malformed query {line.strip()!r}")


_COMMENT = re.compile(r"(^|\s)#.*$")


def parse_queries(text: str) -> list[PropertyQuery]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        # derived ids contain '#', so a comment must start a line or follow a blank
        line = _COMMENT.sub("", line).strip()
        if not line:
            continue
        try:
            out.append(parse_query(line))
        except (ParseError, ValueError) as exc:
            raise ParseError(str(exc), lineno, 1) from exc
    return out


# ------------------------------------------------------------------ static


def _slots_of(est: Estimate, mu: str) -> list:
    return [slot for slot in sorted(est.I) if slot[2] == mu]


def _descendants(est: Estimate, slot) -> set[str]:
    """Every membrane that may sit at any depth below the occupant of ``slot``."""
    out: set[str] = set()
    stack = [slot]
    seen = {slot}
    while stack:
        gp, p, mu = stack.pop()
        for x in est.get((gp, p, mu)):
            if is_label(x):
                out.add(x)
                nxt = (p, mu, x)
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
    return out


def is_vacuous(est: Estimate, q: PropertyQuery) -> bool:
    universe = est.membrane_ids()
    return any(x not in universe for x in q.labels())


def check_static(est: Estimate, q: PropertyQuery, transitive: bool = False) -> bool:
    """Decide ``q`` from the estimate alone; ``True`` means it holds in every reachable state."""
    if is_vacuous(est, q):
        missing = [x for x in q.labels() if x not in est.membrane_ids()]
        warnings.warn(f"{q}: {', '.join(missing)} never occurs in the estimate", VacuousQueryWarning, stacklevel=2)
        return True
    for slot in _slots_of(est, q.mu):
        items = est.get(slot)
        if isinstance(q, NeverOn):
            if any(q.action.matches(x) for x in items):
                return False
            continue
        inside = _descendants(est, slot) if transitive else {x for x in items if is_label(x)}
        if isinstance(q, NeverInside) and q.inner in inside:
            return False
        if isinstance(q, NeverTogether) and q.first in inside and q.second in inside:
            return False
    return True


# ----------------------------------------------------------------- dynamic


@dataclass(frozen=True)
class DynamicVerdict:
    holds: bool
    inconclusive: bool = False

    def __bool__(self):
        return self.holds


def _occurrences(S: CanonicalSystem, mu: str) -> Iterator:
    for m in S.items:
        if m.label == mu:
            yield m
        yield from _occurrences(m.content, mu)


def _inside(m, transitive: bool) -> list[str]:
    out = []
    for child in m.content.items:
        out.append(child.label)
        if transitive:
            out.extend(_inside(child, True))
    return out


def _state_violates(S: CanonicalSystem, q: PropertyQuery, transitive: bool) -> bool:
    for m in _occurrences(S, q.mu):
        if isinstance(q, NeverOn):
            if any(q.action.matches(a) for a in m.proc.actions()):
                return True
            continue
        inside = _inside(m, transitive)
        if isinstance(q, NeverInside) and q.inner in inside:
            return True
        if isinstance(q, NeverTogether) and q.first in inside and q.second in inside:
            return True
    return False


def check_dynamic(ts: TransitionSystem, q: PropertyQuery, transitive: bool = False) -> DynamicVerdict:
    """Evaluate ``q`` on every explored state; inconclusive when the exploration was cut short."""
    holds = not any(_state_violates(S, q, transitive) for S in ts.states)
    # a violation found is definite; only a positive verdict can be undermined by truncation
    return DynamicVerdict(holds, holds and ts.truncated)


def violating_state(ts: TransitionSystem, q: PropertyQuery, transitive: bool = False) -> CanonicalSystem | None:
    for S in ts.states:
        if _state_violates(S, q, transitive):
            return S
    return None


# --------------------------------------------------------------- causality


def causes_of(est: Estimate, mu: str) -> frozenset:
    return est.causes(mu)


@dataclass(frozen=True)
class CausalChain:
    """Firings leading to ``target``, each derived membrane appearing before it is used."""

    target: str
    links: tuple[tuple[str, CausalRecord], ...] = ()

    def records(self) -> list[CausalRecord]:
        return [r for _, r in self.links]

    def __str__(self):
        if not self.links:
            return f"{self.target}: (source)"
        return f"{self.target}: " + " ; ".join(f"{mu} <- {r}" for mu, r in self.links)


@dataclass
class ChainReport:
    chains: list[CausalChain]
    cycles: list[tuple[str, ...]] = field(default_factory=list)

    def __iter__(self):
        return iter(self.chains)

    def __len__(self):
        return len(self.chains)


def causal_chain(est: Estimate, mu: str) -> ChainReport:
    """Unwind ``C`` from ``mu`` through every derived participant or context membrane.

    One chain is produced per combination of alternative records.  A source
    membrane has the single empty chain.  Cycles are cut and reported.
    """
    cycles: list[tuple[str, ...]] = []
    memo: dict[str, list[tuple]] = {}

    def unwind(x: str, path: tuple[str, ...]) -> list[tuple]:
        if x in memo:
            return memo[x]
        recs = sorted(est.causes(x), key=CausalRecord.sort_key)
        if not recs:
            return [()]
        out: list[tuple] = []
        for rec in recs:
            deps = []
            for d in dict.fromkeys((*rec.participants(), *rec.ctx)):
                if not est.causes(d):
                    continue
                if d in path or d == x:
                    cycles.append(path + (x, d))
                    continue
                deps.append(unwind(d, path + (x,)))
            for combo in product(*deps):
                links: dict = {}
                for chain in combo:
                    for link in chain:
                        links.setdefault(link, None)
                links.setdefault((x, rec), None)
                out.append(tuple(links))
        memo[x] = list(dict.fromkeys(out))
        return memo[x]

    chains = [CausalChain(mu, links) for links in unwind(mu, ())]
    return ChainReport(chains, list(dict.fromkeys(cycles)))
