"""``brane-cfa`` command line: parse, run, analyze, check and verify brane terms."""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .cfa import (
    DEFAULT_MEMBRANE_CAP,
    MODES,
    SOUND,
    Estimate,
    MembraneCapExceeded,
    load_golden,
    solve,
    validate,
)
from .properties import (
    VacuousQueryWarning,
    check_dynamic,
    check_static,
    parse_queries,
    violating_state,
)
from .semantics import (
    DEFAULT_STATE_CAP,
    StateCapExceeded,
    containments,
    explore,
)
from .syntax import ParseError, labels_of, parse, pretty, rearrange, to_term

EXIT_SYNTAX = 1
EXIT_IO = 2
EXIT_STATE_CAP = 3
EXIT_MEMBRANE_CAP = 4
EXIT_VERIFY = 5

CONGRUENCE_SAMPLES = 100


@dataclass
class RunConfig:
    command: str
    input: str
    depth: int = 4
    unfold: int = 2
    state_cap: int = DEFAULT_STATE_CAP
    membrane_cap: int = DEFAULT_MEMBRANE_CAP
    mode: str = SOUND
    format: str | None = None
    queries: str | None = None
    estimate_file: str | None = None
    seed: int = 0


class _Color:
    def __init__(self, stream):
        self.on = os.environ.get("BRANE_CFA_COLOR", "1") != "0" and getattr(stream, "isatty", lambda: False)()

    def __call__(self, text: str, code: str) -> str:
        return f"\033[{code}m{text}\033[0m" if self.on else text

    def verdict(self, ok: bool) -> str:
        return self("PASS", "32") if ok else self("FAIL", "31")


def corpus_path(name: str) -> Path | None:
    entry = resources.files("branecfa") / "corpus" / name
    return Path(str(entry)) if entry.is_file() else None


def _resolve(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    # fall back to the bundled corpus so `brane-cfa analyze example1.brane` works anywhere
    shipped = corpus_path(p.name)
    return shipped if shipped is not None else p


def _read(path: str) -> str:
    with open(_resolve(path), encoding="utf-8") as fh:
        return fh.read()


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _estimate(cfg: RunConfig, term) -> Estimate:
    if cfg.estimate_file:
        # golden transcriptions name derived membranes symbolically
        return load_golden(json.loads(_read(cfg.estimate_file)))[0]
    return solve(term, cfg.mode, cfg.membrane_cap)


def _queries_for(cfg: RunConfig) -> list:
    if cfg.queries:
        return parse_queries(_read(cfg.queries))
    sidecar = _resolve(cfg.input).with_suffix(".queries")
    return parse_queries(sidecar.read_text(encoding="utf-8")) if sidecar.exists() else []


# ---------------------------------------------------------------- commands


def cmd_parse(cfg: RunConfig, term, out, err) -> int:
    if cfg.format == "json":
        out.write(_dump_json({"term": pretty(term), "labels": labels_of(term)}))
    else:
        out.write(pretty(term) + "\n")
    return 0


def cmd_run(cfg: RunConfig, term, out, err) -> int:
    ts = explore(term, cfg.depth, cfg.unfold, cfg.state_cap)
    fmt = cfg.format or "json"
    if fmt == "dot":
        out.write(ts.to_dot())
    elif fmt == "text":
        index = ts.state_index()
        for i, s in enumerate(ts.states):
            out.write(f"s{i}: {s.text}\n")
        for a, r, b in ts.edges:
            out.write(f"s{index[a]} --{r.edge_label}--> s{index[b]}\n")
    else:
        out.write(_dump_json(ts.to_json()))
    if ts.truncated:
        err.write(f"note: exploration truncated at depth {cfg.depth} (unfold budget {cfg.unfold})\n")
    return 0


def _estimate_dot(est: Estimate) -> str:
    lines = ["digraph estimate {"]
    for (gp, p, mu), x in est.entries():
        if isinstance(x, str):
            lines.append(f"  {json.dumps(mu)} -> {json.dumps(x)} [label={json.dumps(gp + ',' + p)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_analyze(cfg: RunConfig, term, out, err) -> int:
    est = solve(term, cfg.mode, cfg.membrane_cap)
    fmt = cfg.format or "json"
    if fmt == "dot":
        out.write(_estimate_dot(est))
    elif fmt == "text":
        for slot, x in est.entries():
            out.write(f"{x} in I({','.join(slot)})\n")
        for mu, rec in est.records():
            out.write(f"{rec} in C({mu})\n")
        for a, b in sorted(est.R):
            out.write(f"(({','.join(a)}), ({','.join(b)})) in R\n")
    else:
        out.write(est.dumps())
    return 0


def cmd_check(cfg: RunConfig, term, out, err) -> int:
    queries = _queries_for(cfg)
    est = _estimate(cfg, term)
    ts = explore(term, cfg.depth, cfg.unfold, cfg.state_cap) if cfg.depth > 0 else None
    results = []
    for q in queries:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", VacuousQueryWarning)
            static = check_static(est, q)
        row = {"query": str(q), "static": static}
        for w in caught:
            row["vacuous"] = True
            err.write(f"warning: {w.message}\n")
        if ts is not None:
            dyn = check_dynamic(ts, q)
            row["dynamic"] = dyn.holds
            row["inconclusive"] = dyn.inconclusive
        results.append(row)
    if cfg.format == "text":
        for row in results:
            extra = "" if "dynamic" not in row else f" dynamic={row['dynamic']}" + (" (inconclusive)" if row["inconclusive"] else "")
            out.write(f"{row['query']}: static={row['static']}{extra}\n")
    else:
        out.write(_dump_json(results))
    return 0


def verify_suites(cfg: RunConfig, term) -> list[dict]:
    """Run every property suite for ``term``; each result carries the first counterexample, if any."""
    est = _estimate(cfg, term)
    ts = explore(term, cfg.depth, cfg.unfold, cfg.state_cap)
    results = []

    def record(name, ok, checked, counterexample=None):
        row = {"suite": name, "pass": ok, "checked": checked}
        if counterexample is not None:
            row["counterexample"] = counterexample
        results.append(row)

    # the estimate itself
    bad = validate(est, term, cfg.mode)
    record("validate", not bad, 1, None if not bad else {"state": pretty(term), "violations": [str(v) for v in bad[:5]]})

    # every reachable state
    first = None
    for S in ts.states:
        bad = validate(est, to_term(S), cfg.mode)
        if bad:
            first = {"state": S.text, "violations": [str(v) for v in bad[:5]]}
            break
    record("subject-reduction", first is None, len(ts.states), first)

    first = None
    for S in ts.states:
        escapes = sorted(f"{x} in I({','.join(slot)})" for slot, x in containments(S) if x not in est.get(slot))
        if escapes:
            first = {"state": S.text, "escapes": escapes[:5]}
            break
    record("soundness-containment", first is None, len(ts.states), first)

    rng = random.Random(cfg.seed)
    first = None
    for _ in range(CONGRUENCE_SAMPLES):
        variant = rearrange(term, rng)
        bad = validate(est, variant, cfg.mode)
        if bad:
            first = {"state": pretty(variant), "violations": [str(v) for v in bad[:5]]}
            break
    record("congruence-invariance", first is None, CONGRUENCE_SAMPLES, first)

    first = None
    queries = _queries_for(cfg)
    checked = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", VacuousQueryWarning)
        for q in queries:
            if not check_static(est, q) or ts.truncated:
                continue
            checked += 1
            if not check_dynamic(ts, q).holds:
                first = {"query": str(q), "state": violating_state(ts, q).text}
                break
    record("theorem-transfer", first is None, checked, first)
    return results


def cmd_verify(cfg: RunConfig, term, out, err) -> int:
    results = verify_suites(cfg, term)
    ok = all(r["pass"] for r in results)
    if cfg.format == "json":
        out.write(_dump_json({"pass": ok, "suites": results}))
    else:
        color = _Color(out)
        for r in results:
            out.write(f"{color.verdict(r['pass'])} {r['suite']} ({r['checked']} checked)\n")
        failed = next((r for r in results if not r["pass"]), None)
        if failed is not None:
            out.write(f"first counterexample ({failed['suite']}):\n")
            out.write(_dump_json(failed["counterexample"]))
    return 0 if ok else EXIT_VERIFY


COMMANDS = {
    "parse": cmd_parse,
    "run": cmd_run,
    "analyze": cmd_analyze,
    "check": cmd_check,
    "verify": cmd_verify,
}


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def _count(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="brane-cfa", description="Brane calculus interpreter and contextual control flow analysis.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("input", help="term file (bundled corpus names such as example1.brane are also accepted)")
    ap.add_argument("--depth", type=_count, default=4, help="exploration depth (default 4)")
    ap.add_argument("--unfold", type=_count, default=2, help="replication unfold budget (default 2)")
    ap.add_argument("--state-cap", type=_positive, default=DEFAULT_STATE_CAP)
    ap.add_argument("--membrane-cap", type=_positive, default=DEFAULT_MEMBRANE_CAP)
    ap.add_argument("--mode", choices=MODES, default=SOUND)
    ap.add_argument("--format", choices=("json", "dot", "text"))
    ap.add_argument("--queries", help="property query file (defaults to INPUT with a .queries suffix, if present)")
    ap.add_argument("--estimate-file", help="use this estimate JSON instead of solving")
    ap.add_argument("--seed", type=int, default=0, help="seed for the congruence rearrangements")
    return ap


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    cfg = RunConfig(**{k: v for k, v in vars(args).items()})
    try:
        text = _read(cfg.input)
    except OSError as exc:
        err.write(f"error: cannot read {cfg.input}: {exc.strerror or exc}\n")
        return EXIT_IO
    try:
        term = parse(text)
        return COMMANDS[cfg.command](cfg, term, out, err)
    except ParseError as exc:
        err.write(f"{cfg.input}:{exc}\n")
        return EXIT_SYNTAX
    except OSError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_IO
    except StateCapExceeded as exc:
        err.write(f"error: {exc}\n")
        return EXIT_STATE_CAP
    except MembraneCapExceeded as exc:
        err.write(f"error: {exc}\n")
        return EXIT_MEMBRANE_CAP


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
