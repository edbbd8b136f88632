"""Command-line front end.

Usage::

    stein-dmc classify  --config problem.json
    stein-dmc exponents --config problem.json --out report.json
    stein-dmc evaluate  --config problem.json --format csv --out exact.csv
    stein-dmc simulate  --config problem.json --seed 7 --trials 100000
    stein-dmc selftest

Exit codes: 0 success, 1 self-test failure or solver error, 2 validation
error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from typing import Callable, Optional, Sequence

import numpy as np

from .channel_analysis import check_useless_communication_condition, classify, gamma_min
from .config import ProblemConfig, dumps_structured, format_float
from .errors import ResourceLimit, SteinDmcError, ValidationError
from .evaluation import evaluate_exact, fit_exponent, simulate
from .exponents import regime_exponent, resolve_exponents
from .schemes import resolve_instance
from .typicality import count_types

EVALUATE_COLUMNS = (
    "regime", "n", "alpha", "log2_beta", "expected_cost_H0", "expected_cost_H1",
    "theory_exponent", "fit_slope",
)
SIMULATE_COLUMNS = (
    "regime", "n", "trials", "alpha", "log2_beta", "expected_cost_H0", "expected_cost_H1",
    "ci_halfwidth", "ci_halfwidth_beta", "beta_upper_bound", "exact_alpha", "exact_log2_beta",
    "theory_exponent",
)

EXIT_OK, EXIT_FAIL, EXIT_VALIDATION, EXIT_RESOURCE = 0, 1, 2, 3


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def _csv(rows: list[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_classify(cfg: ProblemConfig, args) -> int:
    rep = classify(cfg.dmc)
    if rep.is_fully_connected:
        text = f"fully-connected, γ_min={gamma_min(cfg.dmc):.6g}"
    else:
        text = rep.describe()
    data = {
        "connectivity": "fully-connected" if rep.is_fully_connected else "partially-connected",
        "triple": list(rep.triple) if rep.triple else None,
        "gamma_x0": rep.gamma_x0,
        "gamma_min": gamma_min(cfg.dmc),
        "description": text,
    }
    if args.format == "csv":
        body = _csv([data | {"triple": " ".join(map(str, rep.triple)) if rep.triple else None}], list(data))
    else:
        body = dumps_structured(data)
    if args.out:
        print(text)
        _emit(body, args.out)
    else:
        _emit(body if args.format == "structured" else text + "\n", None)
    return EXIT_OK


def cmd_exponents(cfg: ProblemConfig, args) -> int:
    rep = resolve_exponents(cfg.P, cfg.Q, cfg.dmc, cfg.cost_function)
    data = rep.as_dict()
    data["useless_communication_condition"] = check_useless_communication_condition(cfg.P, cfg.Q)
    data["epsilon"] = cfg.epsilon
    if args.format == "csv":
        body = _csv([{"quantity": k, "value": v} for k, v in data.items()], ("quantity", "value"))
    else:
        body = dumps_structured(data)
    if args.out:
        for k, v in data.items():
            print(f"{k:<32} {_cell(v)}")
        _emit(body, args.out)
    else:
        _emit(body, None)
    return EXIT_OK


def _theory(cfg: ProblemConfig):
    rep = resolve_exponents(cfg.P, cfg.Q, cfg.dmc, cfg.cost_function)
    return lambda regime: regime_exponent(rep, regime)


def _instance(cfg: ProblemConfig, regime, n):
    return resolve_instance(regime, n, cfg.P, cfg.Q, cfg.dmc, cfg.cost_function, cfg.schedules,
                            mu=cfg.mu, mu_v=cfg.mu_v, grid=cfg.grid)


def cmd_evaluate(cfg: ProblemConfig, args) -> int:
    theory = _theory(cfg)
    rows, fits = [], []
    for regime in cfg.regimes:
        results = []
        for n in sorted(cfg.grid):
            res = evaluate_exact(_instance(cfg, regime, n), cfg.P, cfg.Q, cfg.dmc, cap=cfg.type_cap)
            results.append(res)
        finite = [r for r in results if math.isfinite(r.log2_beta)]
        slope = fit_exponent(finite).slope if len(finite) >= 3 else math.nan
        fits.append({"regime": regime.value, "fit_slope": slope, "theory_exponent": theory(regime)})
        for r in results:
            rows.append({
                "regime": regime.value, "n": r.n, "alpha": r.alpha, "log2_beta": r.log2_beta,
                "expected_cost_H0": r.expected_cost_H0, "expected_cost_H1": r.expected_cost_H1,
                "theory_exponent": theory(regime), "fit_slope": slope,
            })
    if args.format == "csv":
        body = _csv(rows, EVALUATE_COLUMNS)
    else:
        body = dumps_structured({"rows": rows, "fits": fits})
    _emit(body, args.out)
    return EXIT_OK


def cmd_simulate(cfg: ProblemConfig, args) -> int:
    theory = _theory(cfg)
    cells = cfg.P.shape[0] * cfg.P.shape[1]
    rows = []
    for regime in cfg.regimes:
        for n in sorted(cfg.grid):
            inst = _instance(cfg, regime, n)
            mc = simulate(inst, cfg.P, cfg.Q, cfg.dmc, cfg.trials, cfg.seed, workers=cfg.workers)
            row = {
                "regime": regime.value, "n": n, "trials": mc.trials, "alpha": mc.alpha,
                "log2_beta": mc.log2_beta, "expected_cost_H0": mc.expected_cost_H0,
                "expected_cost_H1": mc.expected_cost_H1, "ci_halfwidth": mc.ci_halfwidth,
                "ci_halfwidth_beta": mc.ci_halfwidth_beta, "beta_upper_bound": mc.beta_upper_bound,
                "theory_exponent": theory(regime),
            }
            if count_types(n, cells) <= cfg.type_cap:
                ex = evaluate_exact(inst, cfg.P, cfg.Q, cfg.dmc, cap=cfg.type_cap)
                row.update(exact_alpha=ex.alpha, exact_log2_beta=ex.log2_beta)
            rows.append(row)
    body = _csv(rows, SIMULATE_COLUMNS) if args.format == "csv" else dumps_structured({"rows": rows})
    _emit(body, args.out)
    return EXIT_OK


def cmd_selftest(cfg: Optional[ProblemConfig], args) -> int:
    from .selftest import run_selftest

    ok = run_selftest(print)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS: dict[str, Callable] = {
    "classify": cmd_classify,
    "exponents": cmd_exponents,
    "evaluate": cmd_evaluate,
    "simulate": cmd_simulate,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stein-dmc", description="Stein exponents of distributed detection over DMCs.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="problem instance (JSON); required except for selftest")
    p.add_argument("--out", help="write the structured/CSV output here instead of stdout")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--grid", help="comma-separated blocklengths overriding the config grid")
    p.add_argument("--format", choices=("csv", "structured"), default="csv")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = None
        if args.config:
            grid = None
            if args.grid:
                try:
                    grid = [int(t) for t in args.grid.split(",") if t.strip()]
                except ValueError as exc:
                    raise ValidationError(f"--grid must be comma-separated integers: {args.grid!r}") from exc
            cfg = ProblemConfig.load(args.config).with_overrides(args.seed, args.trials, grid)
        elif args.command != "selftest":
            raise ValidationError("--config is required")
        with np.errstate(all="ignore"):
            return COMMANDS[args.command](cfg, args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ResourceLimit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except SteinDmcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
