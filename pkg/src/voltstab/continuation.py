"""Load-scaling sweeps, nose location and the ENA discriminant crossing.

All loads are scaled together, S_i(lam) = lam * S_i, and power flow is solved
along a uniform lam grid with each point warm-started from the previous one.
The nose (maximum loadability) is bracketed by the last converged and first
failed grid points and refined by bisection on solver convergence.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .indices import StabilityReport, stability_report
from .netmodel import Network, build_ybus
from .powerflow import PowerFlowSolution, solve

NOSE_TOL = 1e-4
# Bisection runs well past NOSE_TOL: |V| ~ sqrt(distance to nose), so a 1e-4
# relative bracket still leaves |V| about 1% above its nose value.
NOSE_BISECT_TOL = 1e-8
DELTA_TOL = 1e-6
MAX_EXTEND = 50
DEFAULT_STEPS = 200

CSV_COLUMNS = (
    "lambda",
    "bus",
    "v_mag",
    "v_angle_rad",
    "margin",
    "L_term",
    "L_max",
    "delta",
    "alpha1",
    "alpha2",
    "vs_mag",
    "zeq_mag",
    "seq_mag",
    "phi",
    "zl_mag",
)


class ContinuationError(RuntimeError):
    pass


@dataclass(frozen=True)
class TraceRecord:
    lam: float
    solution: PowerFlowSolution
    report: StabilityReport


@dataclass(frozen=True)
class ContinuationTrace:
    records: tuple[TraceRecord, ...]
    lambda_nose: float
    nose_bracket: tuple[float, float]
    lambda_delta_zero: float | None
    monitored_bus: int
    delta_crossings: tuple[tuple[float, float], ...] = field(default=())

    @property
    def last(self) -> TraceRecord:
        return self.records[-1]

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([r.lam for r in self.records])

    def series(self, name: str) -> np.ndarray:
        """Per-record values at the monitored bus: v_mag, L, delta, zl, zeq, margin."""
        bus = self.monitored_bus
        out = []
        for r in self.records:
            ena = r.report.ena_equivalent(bus)
            out.append(
                {
                    "v_mag": abs(r.solution.voltage(bus)),
                    "L": r.report.L,
                    "margin": r.report.margin(bus),
                    "zl": r.report.zl(bus),
                    "delta": math.nan if ena is None else ena.Delta,
                    "zeq": math.nan if ena is None else abs(ena.Z_eq),
                }[name]
            )
        return np.array(out)


@dataclass(frozen=True)
class NoseOracle:
    lambda_star: float
    V_nose_mag: float


def two_bus_nose_oracle(E_mag: float, z_line: complex, S_dir: complex) -> NoseOracle:
    """Closed-form maximum load scale for a constant source behind impedance `z_line`.

    With a = Re(z conj(S_dir)) and m = |z||S_dir|, the scale sigma on the drawn
    power sigma*S_dir at which the voltage quadratic loses its real roots solves
    4 sigma^2 (a^2 - m^2) - 4 sigma a E^2 + E^4 = 0.
    """
    z_line = complex(z_line)
    S_dir = complex(S_dir)
    if abs(S_dir) == 0:
        raise ValueError("load direction must be nonzero")
    if z_line == 0:
        raise ValueError("line impedance must be nonzero")
    E2 = E_mag**2
    a = (z_line * S_dir.conjugate()).real
    m = abs(z_line) * abs(S_dir)
    qa = 4 * (a * a - m * m)
    qb = -4 * a * E2
    qc = E2 * E2
    if abs(qa) <= 1e-14 * m * m:
        roots = [-qc / qb] if qb != 0 else []
    else:
        roots = [r.real for r in np.roots([qa, qb, qc]) if abs(r.imag) <= 1e-12 * max(1.0, abs(r))]
    positive = sorted(r for r in roots if r > 0)
    if not positive:
        raise ValueError("no positive loadability limit: this load direction never reaches a nose")
    sigma = positive[0]
    u = (E2 - 2 * sigma * a) / 2
    return NoseOracle(lambda_star=float(sigma), V_nose_mag=float(math.sqrt(max(u, 0.0))))


def _delta(report: StabilityReport, bus: int) -> float | None:
    ena = report.ena_equivalent(bus)
    return None if ena is None else ena.Delta


def sweep(
    net: Network,
    lambda_max_guess: float,
    steps: int = DEFAULT_STEPS,
    monitored_bus: int | None = None,
) -> ContinuationTrace:
    """Scale all loads from zero until power flow fails and locate the nose.

    The grid step is ``lambda_max_guess / steps``; if no failure occurs by
    `lambda_max_guess` the same grid is continued (up to MAX_EXTEND times
    further).
    """
    if steps < 2:
        raise ValueError("steps must be at least 2")
    if not (lambda_max_guess > 0 and math.isfinite(lambda_max_guess)):
        raise ValueError("lambda_max_guess must be positive")
    partition = build_ybus(net)
    if monitored_bus is None:
        if not partition.load_index:
            raise ValueError("network has no load bus to monitor")
        monitored_bus = partition.load_index[0]
    if monitored_bus not in partition.load_index:
        raise ValueError(f"monitored bus {monitored_bus} is not a load bus")
    if all(net.bus(b).base_power == 0 for b in partition.load_index):
        raise ValueError("degenerate scaling direction: all base loads are zero")

    h = lambda_max_guess / steps
    records: list[TraceRecord] = []
    V_prev = None
    failed_at = None
    for k in range((MAX_EXTEND + 1) * steps + 1):
        lam = k * h
        sol = solve(net, lam, V0=V_prev, partition=partition)
        if not sol.converged:
            if k == 0:
                raise ContinuationError("power flow fails at zero loading")
            failed_at = lam
            break
        records.append(TraceRecord(lam, sol, stability_report(net, sol, partition)))
        V_prev = sol.V_L
    if failed_at is None:
        raise ContinuationError(f"no voltage collapse found up to lambda = {records[-1].lam:g}")

    lo_rec = records[-1]
    lo, hi = lo_rec.lam, failed_at
    best = lo_rec.solution
    while hi - lo > NOSE_BISECT_TOL * hi:
        mid = 0.5 * (lo + hi)
        sol = solve(net, mid, V0=best.V_L, partition=partition)
        if sol.converged:
            lo, best = mid, sol
        else:
            hi = mid
    if best is not lo_rec.solution:
        records.append(TraceRecord(best.lam, best, stability_report(net, best, partition)))

    crossings = _delta_crossings(records, monitored_bus)
    lambda_delta_zero = None
    if crossings:
        lambda_delta_zero = _refine_delta_zero(net, partition, records, crossings[0], monitored_bus)

    return ContinuationTrace(
        records=tuple(records),
        lambda_nose=0.5 * (lo + hi),
        nose_bracket=(lo, hi),
        lambda_delta_zero=lambda_delta_zero,
        monitored_bus=monitored_bus,
        delta_crossings=tuple((records[k].lam, records[k + 1].lam) for k in crossings),
    )


def _delta_crossings(records: list[TraceRecord], bus: int) -> list[int]:
    """Indices k where Delta changes sign between records k and k+1."""
    out = []
    for k in range(len(records) - 1):
        d0 = _delta(records[k].report, bus)
        d1 = _delta(records[k + 1].report, bus)
        if d0 is None or d1 is None:
            continue
        if d0 == 0 or (d0 > 0) != (d1 > 0):
            out.append(k)
    return out


def _refine_delta_zero(net, partition, records, k, bus) -> float:
    lo_rec, hi_rec = records[k], records[k + 1]
    d_lo = _delta(lo_rec.report, bus)
    if d_lo == 0:
        return lo_rec.lam
    lo, hi = lo_rec.lam, hi_rec.lam
    V_lo = lo_rec.solution.V_L
    while hi - lo > DELTA_TOL:
        mid = 0.5 * (lo + hi)
        sol = solve(net, mid, V0=V_lo, partition=partition)
        if not sol.converged:
            break
        d_mid = _delta(stability_report(net, sol, partition), bus)
        if d_mid == 0:
            return mid
        if (d_mid > 0) == (d_lo > 0):
            lo, V_lo = mid, sol.V_L
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    if x == 0:
        x = 0.0  # drop the sign of -0.0
    return format(x, ".12g")


def trace_rows(trace: ContinuationTrace):
    """Row dicts for every (lambda, load bus) pair, in CSV column order."""
    for rec in trace.records:
        rep = rec.report
        for bus in rep.buses:
            v = rec.solution.voltage(bus)
            le = rep.load_equivalent(bus)
            ena = rep.ena_equivalent(bus)
            yield {
                "lambda": rec.lam,
                "bus": bus,
                "v_mag": abs(v),
                "v_angle_rad": math.atan2(v.imag, v.real),
                "margin": rep.margin(bus),
                "L_term": le.L_term,
                "L_max": rep.L,
                "delta": None if ena is None else ena.Delta,
                "alpha1": None if ena is None else ena.alpha1,
                "alpha2": None if ena is None else ena.alpha2,
                "vs_mag": None if ena is None else abs(ena.V_s),
                "zeq_mag": None if ena is None else abs(ena.Z_eq),
                "seq_mag": None if ena is None else abs(ena.S_eq),
                "phi": None if ena is None else ena.phi,
                "zl_mag": rep.zl(bus),
            }


def export_trace(trace: ContinuationTrace) -> str:
    """CSV text, one row per (lambda, load bus), 12 significant digits.

    Quantities that are undefined (ENA on a shuntless network) are left empty.
    """
    if not trace.records:
        raise ValueError("empty trace")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in trace_rows(trace):
        writer.writerow([str(row["bus"]) if c == "bus" else _fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def read_trace_csv(text: str) -> list[dict]:
    """Parse exported CSV back into dicts of floats (``bus`` as int, blanks as None)."""
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = []
    for raw in reader:
        rows.append({k: int(v) if k == "bus" else (float(v) if v != "" else None) for k, v in raw.items()})
    return rows
