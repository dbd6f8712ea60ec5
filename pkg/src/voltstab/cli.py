"""Command-line front end.

    voltstab solve          --network FILE --lambda X
    voltstab indices        --network FILE --lambda X
    voltstab sweep          --network FILE [--lambda-max X] [--steps N] [--bus ID] [--output csv|json]
    voltstab nose           --network FILE [--lambda-max X] [--steps N] [--bus ID]
    voltstab counterexample [--lambda-max X] [--steps N]

Exit status: 0 success, 1 input error, 2 numerical failure, 3 counterexample
assertion failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

from . import continuation, indices, netmodel, powerflow

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2
EXIT_ASSERT = 3

COMMANDS = ("solve", "indices", "sweep", "nose", "counterexample")


class InputError(Exception):
    pass


class NumericalFailure(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    network_path: str | None = None
    lam: float | None = None
    lambda_max: float = 5.0
    steps: int = continuation.DEFAULT_STEPS
    bus: int | None = None
    output: str | None = None
    out_path: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.command != "counterexample" and not self.network_path:
            raise InputError(f"{self.command} requires --network")
        if self.command in ("solve", "indices"):
            if self.lam is None:
                raise InputError(f"{self.command} requires --lambda")
            if not (self.lam >= 0 and math.isfinite(self.lam)):
                raise InputError("--lambda must be a finite number >= 0")
        if self.steps < 2:
            raise InputError("--steps must be at least 2")
        if not (self.lambda_max > 0 and math.isfinite(self.lambda_max)):
            raise InputError("--lambda-max must be positive")
        if self.output not in (None, "csv", "json"):
            raise InputError("--output must be csv or json")
        if self.output == "csv" and self.command != "sweep":
            raise InputError(f"{self.command} only supports --output json")

    @property
    def fmt(self) -> str:
        return self.output or ("csv" if self.command == "sweep" else "json")


# --------------------------------------------------------------------------
# Rendering
# --------------------------------------------------------------------------


def _num(x):
    """12 significant digits; NaN/inf become null."""
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return None
    x = float(format(x, ".12g"))
    return 0.0 if x == 0 else x


def _cplx(z):
    if z is None:
        return None
    z = complex(z)
    return [_num(z.real), _num(z.imag)]


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def solution_doc(sol: powerflow.PowerFlowSolution) -> dict:
    return {
        "command": "solve",
        "lambda": _num(sol.lam),
        "converged": bool(sol.converged),
        "iterations": int(sol.iterations),
        "max_mismatch": _num(sol.max_mismatch),
        "buses": list(sol.order),
        "V": [_cplx(v) for v in sol.V],
        "I": [_cplx(i) for i in sol.I],
    }


def _ena_doc(ena: indices.EnaEquivalent | None):
    if ena is None:
        return None
    return {
        "V_s": _cplx(ena.V_s),
        "Z_eq": _cplx(ena.Z_eq),
        "S_eq": _cplx(ena.S_eq),
        "phi": _num(ena.phi),
        "alpha1": _num(ena.alpha1),
        "alpha2": _num(ena.alpha2),
        "Delta": _num(ena.Delta),
    }


def report_doc(sol: powerflow.PowerFlowSolution, rep: indices.StabilityReport) -> dict:
    buses = []
    for bus in rep.buses:
        le = rep.load_equivalent(bus)
        buses.append(
            {
                "bus": bus,
                "V": _cplx(sol.voltage(bus)),
                "E": _cplx(le.E),
                "z_eq_line": _cplx(le.z_eq_line),
                "L_term": _num(le.L_term),
                "margin": _num(rep.margin(bus)),
                "zl_mag": _num(rep.zl(bus)),
                "ena": _ena_doc(rep.ena_equivalent(bus)),
            }
        )
    return {
        "command": "indices",
        "lambda": _num(rep.lam),
        "L": _num(rep.L),
        "min_margin": _num(rep.min_margin),
        "buses": buses,
    }


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def _load(cfg: RunConfig) -> netmodel.Network:
    try:
        return netmodel.load_network(cfg.network_path)
    except OSError as exc:
        raise InputError(f"cannot read {cfg.network_path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise InputError(f"{cfg.network_path}: not UTF-8 text") from None
    except netmodel.NetworkError as exc:
        raise InputError(f"{cfg.network_path}: {exc}") from None


def _sweep(net, cfg: RunConfig) -> continuation.ContinuationTrace:
    if cfg.bus is not None:
        try:
            kind = net.bus(cfg.bus)
        except KeyError:
            raise InputError(f"unknown bus {cfg.bus}") from None
        if not kind.is_load:
            raise InputError(f"bus {cfg.bus} is not a load bus")
    if not net.loads:
        raise InputError("network has no load bus")
    try:
        return continuation.sweep(net, cfg.lambda_max, cfg.steps, cfg.bus)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    except continuation.ContinuationError as exc:
        raise NumericalFailure(str(exc)) from None


def _match_reference(net, bus):
    try:
        return indices.impedance_match_reference(net, bus)
    except indices.NotRadialLeafError:
        return None


def _cmd_solve(cfg):
    net = _load(cfg)
    sol = powerflow.solve(net, cfg.lam)
    return solution_doc(sol)


def _cmd_indices(cfg):
    net = _load(cfg)
    if not net.loads:
        raise InputError("network has no load bus")
    sol = powerflow.solve(net, cfg.lam)
    if not sol.converged:
        raise NumericalFailure(f"power flow did not converge at lambda = {cfg.lam:g}")
    return report_doc(sol, indices.stability_report(net, sol))


def _cmd_sweep(cfg):
    trace = _sweep(_load(cfg), cfg)
    if cfg.fmt == "csv":
        return continuation.export_trace(trace)
    rows = [
        [row["bus"] if c == "bus" else _num(row[c]) for c in continuation.CSV_COLUMNS]
        for row in continuation.trace_rows(trace)
    ]
    return {"command": "sweep", "columns": list(continuation.CSV_COLUMNS), "rows": rows}


def _nose_summary(net, trace):
    bus = trace.monitored_bus
    rep = trace.last.report
    ena = rep.ena_equivalent(bus)
    return {
        "bus": bus,
        "lambda_nose": trace.lambda_nose,
        "lambda_delta_zero": trace.lambda_delta_zero,
        "zl_at_nose": rep.zl(bus),
        "zeq_mag": None if ena is None else abs(ena.Z_eq),
        "delta_at_nose": None if ena is None else ena.Delta,
        "match_reference": _match_reference(net, bus),
    }


def _cmd_nose(cfg):
    net = _load(cfg)
    s = _nose_summary(net, _sweep(net, cfg))
    return {
        "command": "nose",
        "bus": s["bus"],
        "lambda_nose": _num(s["lambda_nose"]),
        "lambda_delta_zero": _num(s["lambda_delta_zero"]),
        "zl_at_nose": _num(s["zl_at_nose"]),
        "zeq_mag": _num(s["zeq_mag"]),
        "match_reference": _num(s["match_reference"]),
    }


def counterexample_checks(net, trace) -> tuple[dict, list[dict]]:
    """Run the three findings on a two-bus sweep; returns (summary, assertions)."""
    bus = trace.monitored_bus
    s = _nose_summary(net, trace)
    gen = net.generators[0]
    line = [br for br in net.branches if bus in (br.from_bus, br.to_bus)][0]
    oracle = continuation.two_bus_nose_oracle(abs(gen.voltage), 1 / line.admittance, net.bus(bus).base_power)
    s["lambda_star"] = oracle.lambda_star
    s["v_nose_mag"] = abs(trace.last.solution.voltage(bus))
    s["L_at_nose"] = trace.last.report.L

    zl, ref, zeq, delta = s["zl_at_nose"], s["match_reference"], s["zeq_mag"], s["delta_at_nose"]
    checks = [
        (
            "nose_at_impedance_matching_limit",
            abs(s["lambda_nose"] - oracle.lambda_star) <= 0.005,
            f"lambda_nose={s['lambda_nose']:.6g}, closed-form limit={oracle.lambda_star:.6g}",
        ),
        (
            "zl_matches_line_impedance_not_zeq",
            zeq is not None and abs(zl - ref) <= 0.01 * ref and abs(zl - zeq) > 0.3,
            f"|Z_L|={zl:.6g}, |1/Y12|={ref:.6g}, |Z_eq|={zeq if zeq is None else format(zeq, '.6g')}",
        ),
        (
            "delta_nonzero_at_nose",
            delta is not None and abs(delta) > 0.1,
            f"Delta at nose={delta if delta is None else format(delta, '.6g')}",
        ),
    ]
    return s, [{"name": n, "passed": bool(p), "detail": d} for n, p, d in checks]


def _cmd_counterexample(cfg):
    net = netmodel.two_bus_network()
    trace = _sweep(net, RunConfig("counterexample", lambda_max=cfg.lambda_max, steps=cfg.steps, bus=2))
    s, assertions = counterexample_checks(net, trace)
    doc = {
        "command": "counterexample",
        "lambda_nose": _num(s["lambda_nose"]),
        "lambda_star": _num(s["lambda_star"]),
        "v_nose_mag": _num(s["v_nose_mag"]),
        "lambda_delta_zero": _num(s["lambda_delta_zero"]),
        "zl_at_nose": _num(s["zl_at_nose"]),
        "zeq_mag": _num(s["zeq_mag"]),
        "match_reference": _num(s["match_reference"]),
        "delta_at_nose": _num(s["delta_at_nose"]),
        "L_at_nose": _num(s["L_at_nose"]),
        "assertions": assertions,
        "verdict": "pass" if all(a["passed"] for a in assertions) else "fail",
    }
    return doc


_DISPATCH = {
    "solve": _cmd_solve,
    "indices": _cmd_indices,
    "sweep": _cmd_sweep,
    "nose": _cmd_nose,
    "counterexample": _cmd_counterexample,
}


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute one command; returns (exit status, rendered document).

    Errors are reported by raising InputError / NumericalFailure; `main` maps
    them to exit codes.
    """
    doc = _DISPATCH[cfg.command](cfg)
    text = doc if isinstance(doc, str) else _dumps(doc)
    if cfg.command == "counterexample" and doc["verdict"] != "pass":
        return EXIT_ASSERT, text
    return EXIT_OK, text


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="voltstab", description="Voltage stability indices and the ENA counterexample.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--network", dest="network_path", metavar="PATH")
    p.add_argument("--lambda", dest="lam", type=float, metavar="X")
    p.add_argument("--lambda-max", dest="lambda_max", type=float, default=5.0, metavar="X")
    p.add_argument("--steps", type=int, default=continuation.DEFAULT_STEPS, metavar="N")
    p.add_argument("--bus", type=int, metavar="ID")
    p.add_argument("--output", choices=("csv", "json"))
    p.add_argument("--out", dest="out_path", metavar="PATH")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig(**vars(args))
        status, text = run(cfg)
    except InputError as exc:
        print(f"voltstab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalFailure, ArithmeticError, ValueError) as exc:
        print(f"voltstab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    if cfg.out_path:
        try:
            with open(cfg.out_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"voltstab: error: cannot write {cfg.out_path}: {exc.strerror}", file=sys.stderr)
            return EXIT_INPUT
    else:
        sys.stdout.write(text)
    if status == EXIT_ASSERT:
        print("voltstab: counterexample assertions failed", file=sys.stderr)
    return status
