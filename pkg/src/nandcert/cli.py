"""Command-line front end: reproducible, machine-readable runs of every module.

Subcommands: oracle (exhaustive minimal certificates), classical
(randomized evaluation vs. exact expectation), adv (spectral bounds for
the built-in constructions or user tables), direct-sum (scaling report),
sim (query-cost simulation of the zero-error wrapper), bounds
(closed-form bound table).  Identical arguments and seeds produce
byte-identical output; every error path emits a one-line JSON reason.
"""

from __future__ import annotations

import argparse
import io
import csv
import json
import math
import random
import statistics
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import adversary, cert_sim, classical_eval, direct_sum, formula
from .caps import CapExceeded


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Validated arguments for one dispatch."""

    subcommand: str
    d: Optional[int] = None
    k: Optional[int] = None
    b: Optional[int] = None
    t_max: Optional[int] = None
    trials: Optional[int] = None
    seed: Optional[str] = None
    model_path: Optional[str] = None
    output_format: str = "json"
    input_bits: Optional[str] = None
    worst_case: bool = False
    random_input_seed: Optional[str] = None
    construction: Optional[str] = None
    table_path: Optional[str] = None
    dual_path: Optional[str] = None
    d_max: Optional[int] = None
    k_max: Optional[int] = None
    eps: float = 0.0
    log_base: float = math.e


def _json_line(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True) + "\n"


def _float_or_inf(value: float):
    return "inf" if math.isinf(value) else value


def _csv_text(fieldnames: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise UsageError(message)


def _run_oracle(cfg: RunConfig) -> str:
    shape = formula.FormulaShape(cfg.d, cfg.k)
    x = formula.parse_assignment(shape, cfg.input_bits)
    certs = formula.brute_force_minimal_certificates(shape, x)
    return _json_line(
        {
            "d": cfg.d,
            "k": cfg.k,
            "input": cfg.input_bits,
            "value": formula.evaluate(shape, x),
            "size": len(certs[0]) if certs else 0,
            "certificates": [list(c.sorted_indices) for c in certs],
        }
    )


def _run_classical(cfg: RunConfig) -> str:
    shape = formula.FormulaShape(cfg.d, cfg.k)
    if cfg.worst_case:
        x, expected = classical_eval.worst_case_expected(shape)
        bits = formula.format_assignment(x)
    else:
        _require(cfg.input_bits is not None, "classical needs --input or --worst-case")
        x = formula.parse_assignment(shape, cfg.input_bits)
        expected = classical_eval.exact_expected_queries(shape, x)
        bits = cfg.input_bits
    empirical = stderr = None
    if cfg.trials:
        _require(cfg.seed is not None, "--trials requires --seed for reproducibility")
        empirical, stderr = classical_eval.monte_carlo_queries(shape, x, cfg.trials, cfg.seed)
    return _json_line(
        {
            "d": cfg.d,
            "k": cfg.k,
            "input": bits,
            "expected": float(expected),
            "expected_exact": str(Fraction(expected)) if isinstance(expected, Fraction) else None,
            "empirical_mean": empirical,
            "stderr": stderr,
            "lambda_d": classical_eval.growth_constant(cfg.d),
            "trials": cfg.trials,
            "seed": cfg.seed,
        }
    )


def _built_construction(construction: str, d: int):
    if construction == "promise":
        gamma = adversary.build_promise_gamma(d)
    elif construction == "search":
        gamma = adversary.build_search_gamma(d)
    else:
        raise UsageError(f"unknown construction {construction!r}")
    return gamma.table, gamma


def _run_adv(cfg: RunConfig) -> str:
    if cfg.table_path is not None:
        table = adversary.FunctionTable.from_json(_load_json(cfg.table_path))
        _require(cfg.dual_path is not None, "--table requires --dual (a witness to score)")
        dual_data = _load_json(cfg.dual_path)
        witness = adversary.DualWitness(table, dual_data["p"])
        value = adversary.dual_value(table, witness)
        return _json_line({"n": table.n, "rows": table.size, "dual_value": _float_or_inf(value)})
    _require(cfg.construction is not None, "adv needs --construction or --table")
    table, gamma = _built_construction(cfg.construction, cfg.d)
    masked = [adversary.hadamard_difference_norm(gamma, i) for i in range(1, table.n + 1)]
    return _json_line(
        {
            "construction": cfg.construction,
            "d": cfg.d,
            "gamma_norm": adversary.spectral_norm(gamma.entries),
            "max_masked_norm": max(masked),
            "primal_value": adversary.primal_value(table, gamma),
        }
    )


def _run_direct_sum(cfg: RunConfig) -> str:
    table, gamma = _built_construction(cfg.construction, cfg.d)
    witness = adversary.uniform_dual_witness(table)
    rows = [
        row.as_dict()
        for row in direct_sum.verify_direct_sum(table, gamma, witness, cfg.t_max)
    ]
    if cfg.output_format == "csv":
        return _csv_text(["t", "primal", "dual", "primal_ratio", "dual_ratio"], [
            {k: r[k] for k in ("t", "primal", "dual", "primal_ratio", "dual_ratio")}
            for r in rows
        ])
    return _json_line(
        {"construction": cfg.construction, "d": cfg.d, "t_max": cfg.t_max, "rows": rows}
    )


def _run_sim(cfg: RunConfig) -> str:
    shape = formula.FormulaShape(cfg.d, cfg.k)
    _require(cfg.seed is not None, "sim requires --seed")
    _require(cfg.trials is not None and cfg.trials >= 1, "sim requires --trials >= 1")
    model = cert_sim.CostModel.from_json(_load_json(cfg.model_path)) if cfg.model_path else cert_sim.CostModel()
    if cfg.input_bits is not None:
        x = formula.parse_assignment(shape, cfg.input_bits)
        _require(
            formula.evaluate(shape, x) == cfg.b,
            f"input evaluates to {formula.evaluate(shape, x)}, not the claimed {cfg.b}",
        )
    else:
        _require(cfg.random_input_seed is not None, "sim needs --input or --random-input")
        rng = random.Random(f"input:{cfg.random_input_seed}")
        while True:
            x = tuple(rng.randrange(2) for _ in range(shape.n))
            if formula.evaluate(shape, x) == cfg.b:
                break
    costs = []
    restarts = []
    for t in range(cfg.trials):
        record = cert_sim.simulate_zero_error_wrapper(shape, x, cfg.b, model, f"{cfg.seed}/{t}")
        costs.append(record.queries)
        restarts.append(record.restarts)
    mean_cost = statistics.fmean(costs)
    stderr = statistics.stdev(costs) / math.sqrt(len(costs)) if len(costs) > 1 else 0.0
    bound = cert_sim.closed_form_bound(cfg.d, cfg.k, cfg.b)
    return _json_line(
        {
            "d": cfg.d,
            "k": cfg.k,
            "b": cfg.b,
            "input": formula.format_assignment(x),
            "trials": cfg.trials,
            "seed": cfg.seed,
            "mean_cost": mean_cost,
            "stderr": stderr,
            "restarts_mean": statistics.fmean(restarts),
            "bound": bound,
            "ratio": mean_cost / bound,
        }
    )


def _run_bounds(cfg: RunConfig) -> str:
    rows = []
    for d in range(cfg.d, cfg.d_max + 1):
        for k in range(cfg.k, cfg.k_max + 1):
            zero_lower = math.sqrt(float(d ** (k + 1)))
            one_lower = math.sqrt(float(d**k))
            rows.append(
                {
                    "d": d,
                    "k": k,
                    "zero_upper": cert_sim.closed_form_bound(d, k, 0, cfg.log_base),
                    "zero_lower": zero_lower,
                    "one_upper": cert_sim.closed_form_bound(d, k, 1, cfg.log_base),
                    "one_lower": one_lower,
                    "zero_query_bound": adversary.query_lower_bound(zero_lower, cfg.eps),
                    "one_query_bound": adversary.query_lower_bound(one_lower, cfg.eps),
                }
            )
    if cfg.output_format == "csv":
        return _csv_text(list(rows[0].keys()), rows)
    return _json_line({"eps": cfg.eps, "rows": rows})


_HANDLERS = {
    "oracle": _run_oracle,
    "classical": _run_classical,
    "adv": _run_adv,
    "direct-sum": _run_direct_sum,
    "sim": _run_sim,
    "bounds": _run_bounds,
}


def dispatch(cfg: RunConfig) -> tuple[int, str]:
    """Route a validated config to its module; (exit status, output text)."""
    try:
        return 0, _HANDLERS[cfg.subcommand](cfg)
    except UsageError as exc:
        return 2, _json_line({"error": str(exc)})
    except (CapExceeded, ValueError, OSError, KeyError, cert_sim.RestartLimitExceeded) as exc:
        return 1, _json_line({"error": str(exc)})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="certify",
        description="Certificates for balanced NAND trees: oracles, bounds, simulations.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    oracle = sub.add_parser("oracle", help="exhaustive minimal certificates")
    oracle.add_argument("--d", type=int, required=True)
    oracle.add_argument("--k", type=int, required=True)
    oracle.add_argument("--input", required=True, help="0/1 string, leaf 1 first")

    classical = sub.add_parser("classical", help="randomized evaluation statistics")
    classical.add_argument("--d", type=int, required=True)
    classical.add_argument("--k", type=int, required=True)
    group = classical.add_mutually_exclusive_group(required=True)
    group.add_argument("--input")
    group.add_argument("--worst-case", action="store_true")
    classical.add_argument("--trials", type=int)
    classical.add_argument("--seed")

    adv = sub.add_parser("adv", help="adversary bound values")
    adv.add_argument("--construction", choices=["promise", "search"])
    adv.add_argument("--d", type=int)
    adv.add_argument("--table", dest="table_path", help="function table JSON")
    adv.add_argument("--dual", dest="dual_path", help="dual witness JSON")

    ds = sub.add_parser("direct-sum", help="t-fold scaling report")
    ds.add_argument("--construction", choices=["promise", "search"], required=True)
    ds.add_argument("--d", type=int, required=True)
    ds.add_argument("--t-max", type=int, required=True)
    ds.add_argument("--format", choices=["json", "csv"], default="json")

    sim = sub.add_parser("sim", help="zero-error wrapper cost simulation")
    sim.add_argument("--d", type=int, required=True)
    sim.add_argument("--k", type=int, required=True)
    sim.add_argument("--b", type=int, choices=[0, 1], required=True)
    group = sim.add_mutually_exclusive_group(required=True)
    group.add_argument("--input")
    group.add_argument("--random-input", dest="random_input_seed")
    sim.add_argument("--trials", type=int, required=True)
    sim.add_argument("--seed", required=True)
    sim.add_argument("--model", dest="model_path", help="cost model JSON")

    bounds = sub.add_parser("bounds", help="closed-form bound table over a (d, k) grid")
    bounds.add_argument("--d", type=int, required=True)
    bounds.add_argument("--d-max", type=int)
    bounds.add_argument("--k", type=int, required=True)
    bounds.add_argument("--k-max", type=int)
    bounds.add_argument("--eps", type=float, default=0.0)
    bounds.add_argument("--log2", action="store_true", help="use base-2 logs in the bound")
    bounds.add_argument("--format", choices=["json", "csv"], default="json")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        subcommand=args.subcommand,
        d=getattr(args, "d", None),
        k=getattr(args, "k", None),
        b=getattr(args, "b", None),
        t_max=getattr(args, "t_max", None),
        trials=getattr(args, "trials", None),
        seed=getattr(args, "seed", None),
        model_path=getattr(args, "model_path", None),
        output_format=getattr(args, "format", "json"),
        input_bits=getattr(args, "input", None),
        worst_case=getattr(args, "worst_case", False),
        random_input_seed=getattr(args, "random_input_seed", None),
        construction=getattr(args, "construction", None),
        table_path=getattr(args, "table_path", None),
        dual_path=getattr(args, "dual_path", None),
        d_max=getattr(args, "d_max", None) or getattr(args, "d", None),
        k_max=getattr(args, "k_max", None) or getattr(args, "k", None),
        eps=getattr(args, "eps", 0.0),
        log_base=2.0 if getattr(args, "log2", False) else math.e,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles usage errors with exit code 2
        return int(exc.code or 0)
    status, text = dispatch(config_from_args(args))
    stream = sys.stdout if status == 0 else sys.stderr
    stream.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
