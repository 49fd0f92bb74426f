"""Command line interface.

Exit codes: 0 success or accepted, 1 verified rejection or non-empty diff,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .classifier import (
    CONSTELLATIONS,
    SearchConfig,
    builtin_table,
    csv_rows,
    reproduce_theorem,
    verify_candidate,
)
from .gitfan import GitFanError, chambers, effective_cone, moving_cone, mu_is_ample
from .grading import GradingError, SpecifyingData

TABLE_HEADER = ["no", "clgroup", "Q", "mu", "u"]
INVARIANT_HEADER = ["no", "l", "dims", "mu3", "anticanonical", "mu_ample"]


class InputError(Exception):
    pass


def _load_one(d) -> SpecifyingData:
    if not isinstance(d, dict):
        raise InputError("specifying data must be a JSON object")
    try:
        sd = SpecifyingData.from_json(d)
        sd.Q.validate()
    except (GradingError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    return sd


def load_inputs(path: str) -> list[SpecifyingData]:
    """A single SpecifyingData object or a list of them."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc
    if isinstance(data, list):
        return [_load_one(d) for d in data]
    return [_load_one(data)]


def _load_single(path: str) -> SpecifyingData:
    sds = load_inputs(path)
    if len(sds) != 1:
        raise InputError("expected exactly one specifying datum")
    return sds[0]


def _write_csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


# --- commands -------------------------------------------------------------

def _parse_constellations(values) -> tuple:
    if not values:
        return tuple(CONSTELLATIONS)
    out = []
    for v in values:
        out.extend(x.strip() for x in v.split(",") if x.strip())
    return tuple(dict.fromkeys(out))


def cmd_classify(args) -> int:
    try:
        cfg = SearchConfig(B=args.bound, torsion_max=args.torsion_max,
                           constellations=_parse_constellations(args.constellation), jobs=args.jobs)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    diff = reproduce_theorem(cfg)
    numbers = diff.numbers()
    table = _write_csv(csv_rows(diff.accepted, [n if n is not None else "new" for n in numbers]), TABLE_HEADER)
    report = diff.to_json()
    report["config"] = {"bound": cfg.B, "torsion_max": cfg.torsion_max,
                        "constellations": list(cfg.constellations)}
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        (out / "table.csv").write_text(table)
        (out / "table.json").write_text(_dump(report["accepted"]) + "\n")
        (out / "diff.json").write_text(_dump({k: report[k] for k in ("config", "missing", "extra",
                                                                      "rejected", "candidates")}) + "\n")
    if args.json:
        print(_dump(report))
    else:
        sys.stdout.write(table)
        print(f"# accepted {len(diff.accepted)}, candidates {diff.candidates}, "
              f"missing {diff.missing}, extra {len(diff.extra)}")
    return 0 if diff.empty else 1


def _report_text(rep) -> str:
    lines = [f"verdict: {rep.verdict}" + (f" ({rep.reason})" if rep.reason else "")]
    for name in ("weakly_cy", "window", "torsion", "minimal", "locally_factorial", "normality"):
        val = getattr(rep, name)
        if val is not None:
            lines.append(f"{name}: {val}")
    if rep.primes is not None:
        lines.append("primes: " + ", ".join(f"T{i + 1}={v}" for i, v in sorted(rep.primes.items())))
    if rep.route is not None:
        lines.append(f"route: {rep.route['route']}")
    if rep.smooth is not None:
        lines.append(f"smooth: bertini={rep.smooth['bertini']} flops={rep.smooth['flops']}")
    if rep.invariants is not None:
        inv = rep.invariants
        lines.append(f"invariants: l={inv['l']} dims={tuple(inv['dims'])} mu3={inv['mu3']}")
    return "\n".join(lines)


def cmd_check(args) -> int:
    sd = _load_single(args.path)
    rep = verify_candidate(sd, invariants=args.invariants)
    print(_dump(rep.to_json()) if args.json else _report_text(rep))
    return 0 if rep.accepted else 1


def _invariant_rows(sds, numbers) -> list[list[str]]:
    from .invariants import invariant_row

    rows = []
    for no, sd in zip(numbers, sds):
        inv = invariant_row(sd)
        anti = inv["anticanonical"]
        anti_s = f"({anti.u[0]},{anti.u[1]})" + (f"+{anti.zeta}" if sd.t > 1 else "")
        try:
            ample = str(mu_is_ample(sd)).lower()
        except GitFanError:
            ample = "n/a"
        rows.append([str(no), str(inv["l"]), "(" + ",".join(map(str, inv["dims"])) + ")",
                     str(inv["mu3"]), anti_s, ample])
    return rows


def cmd_invariants(args) -> int:
    if args.builtin:
        table = builtin_table()
        sds, numbers = [r.sd for r in table], [r.no for r in table]
    elif args.path:
        sds = load_inputs(args.path)
        numbers = list(range(1, len(sds) + 1))
    else:
        print("error: give a file or --builtin", file=sys.stderr)
        return 2
    sys.stdout.write(_write_csv(_invariant_rows(sds, numbers), INVARIANT_HEADER))
    return 0


def cmd_gitfan(args) -> int:
    sd = _load_single(args.path)
    Q, mu = sd.Q, sd.mu
    eff, mov = effective_cone(Q), moving_cone(Q)
    chs = chambers(Q, mu)
    info = {
        "Eff": eff.to_json(),
        "Mov": mov.to_json(),
        "mu": list(mu.u),
        "chambers": [],
    }
    for ch in chs:
        d = ch.to_json()
        if ch.cone.contains_interior(mu.u):
            d["mu"] = "interior"
        elif ch.cone.contains(mu.u):
            d["mu"] = "boundary"
        else:
            d["mu"] = "outside"
        info["chambers"].append(d)
    if args.json:
        print(_dump(info))
    else:
        print(f"Eff = cone{tuple(map(tuple, info['Eff']))}")
        print(f"Mov = cone{tuple(map(tuple, info['Mov']))}")
        print(f"mu = {tuple(mu.u)}")
        for n, d in enumerate(info["chambers"], 1):
            print(f"chamber {n}: cone{tuple(map(tuple, d['cone']))} "
                  f"lambda- = {d['lambda_minus']} lambda+ = {d['lambda_plus']} mu {d['mu']}")
    return 0


# --- entry point ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cyrank2", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="run the bounded search and compare with the table")
    c.add_argument("--bound", type=int, default=9)
    c.add_argument("--torsion-max", type=int, default=3)
    c.add_argument("--constellation", action="append",
                   help="restrict to constellations (I..VII), repeatable or comma separated")
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--json", action="store_true")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_classify)

    c = sub.add_parser("check", help="verify one specifying datum")
    c.add_argument("path")
    c.add_argument("--json", action="store_true")
    c.add_argument("--invariants", action="store_true")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("invariants", help="invariant table as CSV")
    c.add_argument("path", nargs="?")
    c.add_argument("--builtin", action="store_true")
    c.set_defaults(func=cmd_invariants)

    c = sub.add_parser("gitfan", help="effective cone, moving cone and chambers")
    c.add_argument("path")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_gitfan)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (GitFanError, GradingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
