"""Command line driver: ``run``, ``erase`` and ``check``.

Exit codes: 0 ok, 1 a violation was found, 2 parse or usage error,
3 every verdict was inconclusive.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .concrete import (ConcreteSemantics, NotWellFormed, check_functorial, iso_f, iso_f_inv,
                       random_wf_config, wf)
from .extensions import clearance_predicates, combine, p_norefs
from .generate import GenParams
from .ifc import filter_queue, no_filter
from .labels import PUB, SEC, Label, LatticeError, parse_label
from .niharness import INCONCLUSIVE, PASS, VIOLATION, run_suite
from .runtime import KAPPAS, SCHEDULERS, Semantics, run
from .surface import ParseError, format_config, format_task_id, parse_program

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3

_FAMILIES = {"norefs": p_norefs, "clearance": clearance_predicates}


class UsageError(Exception):
    pass


def _restrictions(names):
    if not names:
        return None
    for n in names:
        if n not in _FAMILIES:
            raise UsageError(f"unknown restriction family {n!r}")
    return combine(*(_FAMILIES[n]() for n in names))


def build_engine(scheduler="rr", engine="abstract", kappa="identity", restrict=(),
                 broken_recv=False):
    """The semantics object for a set of command line choices."""
    sched = SCHEDULERS[scheduler]
    recv = no_filter if broken_recv else filter_queue
    if engine == "concrete":
        extra = tuple(n for n in restrict if n != "norefs")   # norefs is always on
        return ConcreteSemantics(sched, _restrictions(extra), recv)
    return Semantics(sched, KAPPAS[kappa], _restrictions(restrict), recv)


def _split(value: str | None):
    if value is None:
        return None
    return tuple(v for v in value.split(",") if v)


def _settings(args, prog_settings=None):
    """Command line flags override the program header."""
    s = prog_settings
    pick = lambda flag, attr, default: (flag if flag is not None
                                        else getattr(s, attr) if s else default)
    return dict(scheduler=pick(args.scheduler, "scheduler", "rr"),
                engine=pick(args.engine, "engine", "abstract"),
                kappa=pick(args.kappa, "kappa", "identity"),
                restrict=pick(_split(args.restrict), "restrict", ()))


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError(str(e)) from None
    return parse_program(text)


def _record(**kw) -> str:
    return json.dumps(kw, ensure_ascii=False)


def _trace(args):
    prog = _load(args.file)
    opts = _settings(args, prog.settings)
    sem = build_engine(**opts)
    c = prog.config
    if opts["engine"] == "concrete":
        c = iso_f_inv(c)
    max_steps = args.max_steps if args.max_steps is not None else prog.settings.max_steps
    return prog, sem, c, run(c, max_steps=max_steps, engine=sem)


def cmd_run(args) -> int:
    _, sem, c, trace = _trace(args)
    out = sys.stdout
    if args.format == "records":
        for i, s in enumerate(trace.steps, 1):
            out.write(_record(step=i, rule=s.rule, task=format_task_id(s.task),
                              label=str(s.label), terminal=sem.is_terminal(s.config),
                              config=format_config(s.config)) + "\n")
        out.write(_record(outcome=trace.outcome, steps=len(trace.steps),
                          final=format_config(trace.final)) + "\n")
    else:
        out.write(f"initial  {format_config(c)}\n")
        for i, s in enumerate(trace.steps, 1):
            out.write(f"{i:>5}  {s.rule:<14} #{format_task_id(s.task)} {s.label}\n")
        out.write(f"outcome  {trace.outcome} after {len(trace.steps)} steps\n")
        out.write(f"final    {format_config(trace.final)}\n")
    return EXIT_OK


def _label(prog, text: str) -> Label:
    try:
        return parse_label(text, prog.settings.lattice)
    except LatticeError as e:
        raise UsageError(f"bad label {text!r}: {e}") from None


def cmd_erase(args) -> int:
    prog, sem, c, trace = _trace(args)
    l = _label(prog, args.at)
    if args.step is None:
        target = trace.final
    elif 0 <= args.step <= len(trace.steps):
        target = c if args.step == 0 else trace.steps[args.step - 1].config
    else:
        raise UsageError(f"--step must be between 0 and {len(trace.steps)}")
    erased = sem.erase(target, l)
    if args.format == "records":
        sys.stdout.write(_record(at=str(l), step=args.step if args.step is not None
                                 else len(trace.steps), config=format_config(erased)) + "\n")
    else:
        sys.stdout.write(format_config(erased) + "\n")
    return EXIT_OK


def _check_iso(args, opts) -> tuple[int, int, list]:
    sem = build_engine(**{**opts, "engine": "concrete"})
    params = GenParams(clearance="clearance" in opts["restrict"])
    good = bad = 0
    failures = []
    for k in range(args.pairs):
        seed = args.seed + k
        c = random_wf_config(seed, sem, params=params)
        ok = wf(c) and iso_f_inv(iso_f(c)) == c
        why = "round trip failed" if not ok else ""
        if ok:
            ok, why = check_functorial(c, sem, (PUB, SEC))
        if ok:
            good += 1
        else:
            bad += 1
            failures.append((seed, why))
    return good, bad, failures


def cmd_check(args) -> int:
    opts = _settings(args)
    if args.at not in (None, "pub"):
        raise UsageError("generated pairs are observed at pub on the two-point lattice")
    out = sys.stdout
    if args.mode == "iso":
        good, bad, failures = _check_iso(args, opts)
        for seed, why in failures:
            if args.format == "records":
                out.write(_record(seed=seed, outcome=VIOLATION, reason=why) + "\n")
            else:
                out.write(f"seed {seed}: {why}\n")
        summary = f"iso: {good + bad} configurations, {good} commute, {bad} fail"
        out.write((_record(mode="iso", configs=good + bad, ok=good, failed=bad)
                   if args.format == "records" else summary) + "\n")
        return EXIT_VIOLATION if bad else EXIT_OK

    engine = build_engine(**opts, broken_recv=args.broken_recv)
    lift = iso_f_inv if opts["engine"] == "concrete" else None
    params = GenParams(clearance="clearance" in opts["restrict"])
    res = run_suite(args.mode, engine, args.pairs, args.seed, args.budget, params, PUB, lift)
    for seed, v in res.verdicts:
        if args.format == "records":
            out.write(_record(seed=seed, **v.to_record()) + "\n")
        elif v.outcome == VIOLATION:
            out.write(f"seed {seed}: violation, {v.reason}"
                      + (f" at collapsed index {v.index}" if v.index is not None else "") + "\n")
    if args.format == "records":
        out.write(_record(mode=args.mode, pairs=len(res.verdicts), passed=res.count(PASS),
                          violations=res.count(VIOLATION),
                          inconclusive=res.count(INCONCLUSIVE)) + "\n")
    else:
        out.write(res.summary() + "\n")
    if res.count(VIOLATION):
        return EXIT_VIOLATION
    if res.verdicts and res.count(INCONCLUSIVE) == len(res.verdicts):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _default_seed() -> int:
    raw = os.environ.get("IFC_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"IFC_SEED must be an integer, got {raw!r}") from None


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coarseifc",
                                description="Run, erase and check coarse-grained IFC programs.")
    sub = p.add_subparsers(dest="command", required=True)

    def engine_flags(sp):
        sp.add_argument("--scheduler", choices=sorted(SCHEDULERS))
        sp.add_argument("--engine", choices=("abstract", "concrete"))
        sp.add_argument("--kappa", choices=sorted(KAPPAS))
        sp.add_argument("--restrict", metavar="FAMILIES",
                        help="comma separated: norefs, clearance")
        sp.add_argument("--format", choices=("pretty", "records"), default="pretty")

    r = sub.add_parser("run", help="run a program and print its trace")
    r.add_argument("file")
    engine_flags(r)
    r.add_argument("--max-steps", type=int)
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("erase", help="print a configuration erased at a label")
    e.add_argument("file")
    engine_flags(e)
    e.add_argument("--max-steps", type=int)
    e.add_argument("--at", required=True, metavar="LABEL")
    e.add_argument("--step", type=int, help="trace position to erase (default: final)")
    e.set_defaults(func=cmd_erase)

    c = sub.add_parser("check", help="check non-interference on generated pairs")
    engine_flags(c)
    c.add_argument("--mode", choices=("tsni", "tini", "iso"), default="tsni")
    c.add_argument("--pairs", type=int, default=100)
    c.add_argument("--seed", type=int)
    c.add_argument("--budget", type=int, default=500)
    c.add_argument("--at", metavar="LABEL")
    c.add_argument("--broken-recv", action="store_true",
                   help="use a receive that ignores labels (the harness should object)")
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 10000))
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        if getattr(args, "seed", "absent") is None:
            args.seed = _default_seed()
        return args.func(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, NotWellFormed) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
