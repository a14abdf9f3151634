"""Command-line front end.

Exit codes: 0 success (or axiom holds), 1 axiom fails, 2 input error,
3 cap exceeded, 4 numerical solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import core
from .axioms import CFS_MAX_N, GFS_MAX_N, Axiom, check
from .core import CapExceededError, InstanceError, round12
from .pof import best_fair_welfare, welfare_bounds
from .rules import RP_MAX_N, Rule, run_rule
from .solver import SolverError, kkt_residual, optimal_egalitarian

EXIT_OK, EXIT_FAILS, EXIT_INPUT, EXIT_CAP, EXIT_SOLVER = 0, 1, 2, 3, 4

TABLE1_N = (3, 8)
TABLE2_MIN_N = 4


def _rounded(obj):
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_rounded(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round12(obj)
    return obj


def envelope(command: str, inputs: dict, result, exactness: str = "exact", witnesses=()) -> dict:
    return {
        "command": command,
        "inputs": inputs,
        "result": result,
        "exactness": exactness,
        "witnesses": list(witnesses),
    }


def _read_instance(path: str) -> core.Instance:
    try:
        return core.parse_instance(Path(path).read_bytes())
    except OSError as e:
        raise InstanceError(f"cannot read instance {path}: {e.strerror}") from e


def _read_distribution(path: str, m: int) -> np.ndarray:
    try:
        return core.parse_distribution(Path(path).read_bytes(), m)
    except OSError as e:
        raise InstanceError(f"cannot read distribution {path}: {e.strerror}") from e


def _evaluate(inst: core.Instance, x: np.ndarray, sw_star: float) -> dict:
    u = inst.incidence @ x
    return {
        "distribution": x,
        "utilities": u,
        "welfare": float(u.min()),
        "sw_star": sw_star,
        "normalized_welfare": float(u.min()) / sw_star,
    }


# -- commands ------------------------------------------------------------------

def cmd_eval(args):
    inst = _read_instance(args.instance)
    rule = Rule(args.rule)
    opts = {"max_n": args.max_n_rp} if rule is Rule.RP else {}
    x = run_rule(rule, inst, **opts)
    _, sw_star = optimal_egalitarian(inst)
    result = {"rule": rule.value, **_evaluate(inst, x, sw_star)}
    if rule is Rule.NASH:
        result["kkt_residual"] = kkt_residual(inst, x)
    return envelope("eval", {"rule": rule.value, "instance": args.instance}, result), EXIT_OK


def cmd_check(args):
    inst = _read_instance(args.instance)
    x = _read_distribution(args.distribution, inst.m)
    axiom = Axiom(args.axiom)
    report = check(axiom, inst, x, tol=args.tol, max_n=args.max_n_subsets)
    out = envelope("check", {"axiom": axiom.value, "instance": args.instance,
                             "distribution": args.distribution},
                   {"axiom": axiom.value, "holds": report.holds},
                   witnesses=[report.witness.to_json()] if report.witness else [])
    return out, EXIT_OK if report.holds else EXIT_FAILS


def cmd_pof(args):
    inst = _read_instance(args.instance)
    res = best_fair_welfare(inst, args.axiom, max_n_subsets=args.max_n_subsets)
    return envelope("pof", {"axiom": res.axiom.value, "instance": args.instance},
                    res.to_json(), exactness=res.exactness), EXIT_OK


def cmd_bounds(args):
    inst = _read_instance(args.instance)
    b = welfare_bounds(inst)
    return envelope("bounds", {"instance": args.instance}, b.to_json()), EXIT_OK


def cmd_gen(args):
    family = args.family
    if family == "es":
        inst = core.es_instance(args.n, args.k)
    elif family == "pv":
        inst = core.pv_instance(args.n, args.m if args.m is not None else args.n)
    else:
        inst = core.FAMILIES[family](args.n)
    text = core.serialize_instance(inst)
    if args.out:
        Path(args.out).write_bytes(text + b"\n")
    params = {"n": args.n, "k": args.k, "m": args.m}
    return envelope("gen", {"family": family, **params, "out": args.out},
                    json.loads(text)), EXIT_OK


def emit_table1(n: int, max_n_subsets: int | None = None) -> list[dict]:
    """Per-axiom POF on the UFS gap family and the GFS tight family."""
    lo, hi = TABLE1_N
    if n < lo:
        raise InstanceError(f"table 1 needs n >= {lo}")
    if n > hi:
        raise CapExceededError("n", n, hi)
    gap = core.ufs_gap_instance(n)
    tight = core.gfs_tight_instance(n)
    bounds = {
        Axiom.IFS: (1.0, 1.0),
        Axiom.UFS: (2 / n, 2 / n),
        Axiom.GFS: (2 / n, 2 / n),
    }
    rows = []
    for axiom in Axiom:
        a = best_fair_welfare(gap, axiom, max_n_subsets=max_n_subsets)
        b = best_fair_welfare(tight, axiom, max_n_subsets=max_n_subsets)
        low, up = bounds.get(axiom, (2 / n - 1 / n ** 2, 2 / n))
        rows.append({
            "axiom": axiom.value,
            "ufs_gap_pof": a.ratio,
            "ufs_gap_exactness": a.exactness,
            "gfs_tight_pof": b.ratio,
            "gfs_tight_exactness": b.exactness,
            "pof_lower": low,
            "pof_upper": up,
        })
    return rows


def gfs_witness_welfare(n: int) -> float:
    inst = core.gfs_tight_instance(n)
    _, sw_star = optimal_egalitarian(inst)
    return core.normalized_welfare(inst, core.gfs_witness_distribution(n), sw_star)


def emit_table2(n: int, k: int = 1, pv_m: int | None = None, max_n_rp: int = RP_MAX_N) -> list[dict]:
    """Normalized welfare of each rule on its worst-case family."""
    if n < TABLE2_MIN_N:
        raise InstanceError(f"table 2 needs n >= {TABLE2_MIN_N}")
    if n > max_n_rp:
        raise CapExceededError("n", n, max_n_rp)
    pv_m = pv_m if pv_m is not None else n
    gap = core.ufs_gap_instance(n)
    cases = [
        (Rule.UTIL, "ufs_gap", gap, 0.0, 0.0),
        (Rule.CUT, "cut", core.cut_instance(n), 1 / n, 1 / (n - 3)),
        (Rule.NASH, "ufs_gap", gap, 2 / n - 1 / n ** 2, 2 / n),
        (Rule.EGAL, "ufs_gap", gap, 1.0, 1.0),
        (Rule.PV, f"pv(m={pv_m})", core.pv_instance(n, pv_m), 0.0, 2 / ((pv_m - 1) * (n - 1) + 1)),
        (Rule.ES, "ufs_gap", gap, 1 / n, None),
        (Rule.ES, f"es(k={k})", core.es_instance(n, k), 1 / n, (n ** (k - 1) + 1) / (n ** k + 1)),
        (Rule.RP, "ufs_gap", gap, 2 / n, 2 / n),
    ]
    rows = []
    for rule, family, inst, low, up in cases:
        opts = {"max_n": max_n_rp} if rule is Rule.RP else {}
        x = run_rule(rule, inst, **opts)
        _, sw_star = optimal_egalitarian(inst)
        rows.append({
            "rule": rule.value,
            "family": family,
            "welfare": core.egalitarian_welfare(inst, x),
            "sw_star": sw_star,
            "ratio": core.egalitarian_welfare(inst, x) / sw_star,
            "guarantee_lower": low,
            "worst_case_upper": up,
        })
    return rows


def cmd_tables(args):
    inputs = {"n": args.n, "which": args.which}
    if args.which == 1:
        rows = emit_table1(args.n, args.max_n_subsets)
        result = {"rows": rows, "gfs_witness_normalized_welfare": gfs_witness_welfare(args.n)}
        exactness = "lower-bound"  # the CFS column
    else:
        inputs.update(k=args.k, pv_m=args.pv_m)
        rows = emit_table2(args.n, args.k, args.pv_m, args.max_n_rp)
        result = {"rows": rows}
        exactness = "exact"
    return envelope("tables", inputs, result, exactness=exactness), EXIT_OK


# -- rendering -------------------------------------------------------------------

def _tsv_value(v) -> str:
    if isinstance(v, list):
        return ",".join(_tsv_value(e) for e in v)
    if isinstance(v, dict):
        return json.dumps(v)
    return "" if v is None else str(v)


def render_tsv(out: dict) -> str:
    result = out["result"]
    lines = []
    if isinstance(result, dict) and "rows" in result:
        rows = result["rows"]
        header = list(rows[0])
        lines.append("\t".join(header))
        for r in rows:
            lines.append("\t".join(_tsv_value(r[h]) for h in header))
        for key, value in result.items():
            if key != "rows":
                lines.append(f"# {key}\t{_tsv_value(value)}")
    else:
        for key, value in result.items():
            lines.append(f"{key}\t{_tsv_value(value)}")
    for w in out["witnesses"]:
        lines.append(f"witness\t{json.dumps(w)}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "tsv"), default="json")
    common.add_argument("--tol", type=float, default=core.EPS, help="tolerance for non-strict axiom inequalities")
    common.add_argument("--max-n-rp", type=int, default=RP_MAX_N, help="largest n for random priority")
    common.add_argument("--max-n-subsets", type=int, default=None,
                        help=f"coalition enumeration cap (defaults: GFS {GFS_MAX_N}, CFS {CFS_MAX_N})")

    p = argparse.ArgumentParser(prog="egalbudget", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("eval", parents=[common], help="run a voting rule")
    s.add_argument("rule", choices=[r.value for r in Rule])
    s.add_argument("instance")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("check", parents=[common], help="check a fairness axiom")
    s.add_argument("axiom", choices=[a.value for a in Axiom])
    s.add_argument("instance")
    s.add_argument("distribution")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("pof", parents=[common], help="price of fairness on one instance")
    s.add_argument("axiom", choices=[a.value for a in Axiom])
    s.add_argument("instance")
    s.set_defaults(func=cmd_pof)

    s = sub.add_parser("bounds", parents=[common], help="cover/support/score bounds on the optimum")
    s.add_argument("instance")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("gen", parents=[common], help="generate a worst-case instance")
    s.add_argument("family", choices=sorted(core.FAMILIES))
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, default=1, help="es family exponent")
    s.add_argument("--m", type=int, default=None, help="pv family project count (default n)")
    s.add_argument("-o", "--out", default=None)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("tables", parents=[common], help="reproduce the POF / efficiency tables")
    s.add_argument("n", type=int)
    s.add_argument("--which", type=int, choices=(1, 2), default=1)
    s.add_argument("--k", type=int, default=1, help="es family exponent for table 2")
    s.add_argument("--pv-m", type=int, default=None, help="pv family project count for table 2")
    s.set_defaults(func=cmd_tables)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    fmt = args.format
    inputs = {k: v for k, v in vars(args).items() if k not in ("func", "command", "format")}
    try:
        out, code = args.func(args)
    except CapExceededError as e:
        out, code = envelope(args.command, inputs, {"error": str(e)}, exactness="none"), EXIT_CAP
    except (InstanceError, ValueError, IndexError, OSError) as e:
        out, code = envelope(args.command, inputs, {"error": str(e)}, exactness="none"), EXIT_INPUT
    except SolverError as e:
        out, code = envelope(args.command, inputs, {"error": str(e)}, exactness="none"), EXIT_SOLVER
    out = _rounded(out)
    if fmt == "tsv":
        print(render_tsv(out))
    else:
        print(json.dumps(out))
    return code


if __name__ == "__main__":
    sys.exit(main())
