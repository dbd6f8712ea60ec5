"""Network data model, JSON parser/serializer and bus admittance matrix.

Network file format (UTF-8 JSON, per-unit, complex numbers as ``[re, im]``)::

    {
      "buses": [{"id": 1, "kind": "generator", "voltage": [1.0, 0.0]},
                {"id": 2, "kind": "load", "power": [0.0, 0.2]}],
      "branches": [{"from": 1, "to": 2, "admittance": [0.0, -3.0]}],
      "shunts": [{"bus": 1, "admittance": [0.0, 1.0]}]
    }

Load ``power`` is the complex power *drawn* by the load, so the bus injection
is its negative.
"""

from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import cnum


class BusKind(str, enum.Enum):
    GENERATOR = "generator"
    LOAD = "load"


class NetworkError(ValueError):
    """Base class for network input errors; `location` points into the document."""

    def __init__(self, message: str, location: str = ""):
        self.message = message
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class NetworkSyntaxError(NetworkError):
    pass


class NetworkSemanticError(NetworkError):
    pass


@dataclass(frozen=True)
class Bus:
    id: int
    kind: BusKind
    voltage: complex | None = None
    base_power: complex | None = None

    @property
    def is_generator(self) -> bool:
        return self.kind is BusKind.GENERATOR

    @property
    def is_load(self) -> bool:
        return self.kind is BusKind.LOAD


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    admittance: complex


@dataclass(frozen=True)
class Shunt:
    bus: int
    admittance: complex


@dataclass(frozen=True)
class Network:
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...] = ()
    shunts: tuple[Shunt, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "branches", tuple(self.branches))
        object.__setattr__(self, "shunts", tuple(self.shunts))
        validate(self)

    @property
    def bus_ids(self) -> tuple[int, ...]:
        return tuple(b.id for b in self.buses)

    def bus(self, bus_id: int) -> Bus:
        for b in self.buses:
            if b.id == bus_id:
                return b
        raise KeyError(f"unknown bus {bus_id}")

    @property
    def generators(self) -> tuple[Bus, ...]:
        return tuple(b for b in self.buses if b.is_generator)

    @property
    def loads(self) -> tuple[Bus, ...]:
        return tuple(b for b in self.buses if b.is_load)

    def without_shunts(self) -> Network:
        return Network(self.buses, self.branches, ())


def validate(net: Network) -> None:
    """Check the Network invariants, raising NetworkSemanticError on the first violation."""
    seen: set[int] = set()
    for k, bus in enumerate(net.buses):
        loc = f"buses[{k}]"
        if isinstance(bus.id, bool) or not isinstance(bus.id, int) or bus.id < 0:
            raise NetworkSemanticError("bus id must be a non-negative integer", loc + ".id")
        if bus.id in seen:
            raise NetworkSemanticError(f"duplicate bus id {bus.id}", loc + ".id")
        seen.add(bus.id)
        if bus.is_generator:
            if bus.voltage is None:
                raise NetworkSemanticError("generator bus requires 'voltage'", loc)
            if bus.base_power is not None:
                raise NetworkSemanticError("generator bus must not carry 'power'", loc)
            if not abs(bus.voltage) > 0:
                raise NetworkSemanticError("generator voltage magnitude must be positive", loc + ".voltage")
        elif bus.is_load:
            if bus.base_power is None:
                raise NetworkSemanticError("load bus requires 'power'", loc)
            if bus.voltage is not None:
                raise NetworkSemanticError("load bus must not carry 'voltage'", loc)
        else:
            raise NetworkSemanticError(f"unknown bus kind {bus.kind!r}", loc + ".kind")

    if not any(b.is_generator for b in net.buses):
        raise NetworkSemanticError("network needs at least one generator bus", "buses")

    for k, br in enumerate(net.branches):
        loc = f"branches[{k}]"
        for end, bid in (("from", br.from_bus), ("to", br.to_bus)):
            if bid not in seen:
                raise NetworkSemanticError(f"unknown bus {bid}", f"{loc}.{end}")
        if br.from_bus == br.to_bus:
            raise NetworkSemanticError("branch endpoints must differ", loc)
        if br.admittance == 0:
            raise NetworkSemanticError("branch admittance must be nonzero", loc + ".admittance")

    for k, sh in enumerate(net.shunts):
        loc = f"shunts[{k}]"
        if sh.bus not in seen:
            raise NetworkSemanticError(f"unknown bus {sh.bus}", loc + ".bus")
        if sh.admittance == 0:
            raise NetworkSemanticError("shunt admittance must be nonzero", loc + ".admittance")

    if not _connected(net):
        raise NetworkSemanticError("network graph is disconnected", "branches")


def _connected(net: Network) -> bool:
    if len(net.buses) <= 1:
        return True
    adj: dict[int, set[int]] = {b.id: set() for b in net.buses}
    for br in net.branches:
        adj[br.from_bus].add(br.to_bus)
        adj[br.to_bus].add(br.from_bus)
    start = net.buses[0].id
    reached = {start}
    queue = deque([start])
    while queue:
        for nxt in adj[queue.popleft()]:
            if nxt not in reached:
                reached.add(nxt)
                queue.append(nxt)
    return len(reached) == len(adj)


# --------------------------------------------------------------------------
# JSON format
# --------------------------------------------------------------------------

_TOP_KEYS = {"buses", "branches", "shunts"}
_BUS_KEYS = {"id", "kind", "voltage", "power"}
_BRANCH_KEYS = {"from", "to", "admittance"}
_SHUNT_KEYS = {"bus", "admittance"}


def _expect_keys(obj, allowed: set[str], required: set[str], loc: str) -> None:
    if not isinstance(obj, dict):
        raise NetworkSemanticError("expected an object", loc)
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise NetworkSemanticError(f"unknown field {unknown[0]!r}", loc)
    for key in sorted(required):
        if key not in obj:
            raise NetworkSemanticError(f"missing required field {key!r}", loc)


def _complex(value, loc: str) -> complex:
    ok = (
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    )
    if not ok:
        raise NetworkSemanticError("complex values must be [re, im] number pairs", loc)
    z = complex(float(value[0]), float(value[1]))
    if not np.isfinite(z):
        raise NetworkSemanticError("complex value must be finite", loc)
    return z


def _int(value, loc: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise NetworkSemanticError("expected an integer bus id", loc)
    return value


def network_from_dict(doc) -> Network:
    _expect_keys(doc, _TOP_KEYS, {"buses"}, "$")
    raw_buses = doc["buses"]
    if not isinstance(raw_buses, list):
        raise NetworkSemanticError("expected a list", "buses")
    buses = []
    for k, rb in enumerate(raw_buses):
        loc = f"buses[{k}]"
        _expect_keys(rb, _BUS_KEYS, {"id", "kind"}, loc)
        kind = rb["kind"]
        if kind not in ("generator", "load"):
            raise NetworkSemanticError(f"unknown bus kind {kind!r}", loc + ".kind")
        voltage = _complex(rb["voltage"], loc + ".voltage") if "voltage" in rb else None
        power = _complex(rb["power"], loc + ".power") if "power" in rb else None
        buses.append(Bus(_int(rb["id"], loc + ".id"), BusKind(kind), voltage, power))

    branches = []
    raw_branches = doc.get("branches", [])
    if not isinstance(raw_branches, list):
        raise NetworkSemanticError("expected a list", "branches")
    for k, rb in enumerate(raw_branches):
        loc = f"branches[{k}]"
        _expect_keys(rb, _BRANCH_KEYS, _BRANCH_KEYS, loc)
        branches.append(
            Branch(
                _int(rb["from"], loc + ".from"),
                _int(rb["to"], loc + ".to"),
                _complex(rb["admittance"], loc + ".admittance"),
            )
        )

    shunts = []
    raw_shunts = doc.get("shunts", [])
    if not isinstance(raw_shunts, list):
        raise NetworkSemanticError("expected a list", "shunts")
    for k, rs in enumerate(raw_shunts):
        loc = f"shunts[{k}]"
        _expect_keys(rs, _SHUNT_KEYS, _SHUNT_KEYS, loc)
        shunts.append(Shunt(_int(rs["bus"], loc + ".bus"), _complex(rs["admittance"], loc + ".admittance")))

    return Network(tuple(buses), tuple(branches), tuple(shunts))


def parse_network(text: str) -> Network:
    """Parse and validate a network document.

    Raises NetworkSyntaxError for malformed JSON (location is ``line:col``) and
    NetworkSemanticError for well-formed documents that violate the model.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkSyntaxError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None
    return network_from_dict(doc)


def load_network(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def network_to_dict(net: Network) -> dict:
    buses = []
    for b in net.buses:
        entry = {"id": b.id, "kind": b.kind.value}
        if b.is_generator:
            entry["voltage"] = _pair(b.voltage)
        else:
            entry["power"] = _pair(b.base_power)
        buses.append(entry)
    return {
        "buses": buses,
        "branches": [
            {"from": br.from_bus, "to": br.to_bus, "admittance": _pair(br.admittance)} for br in net.branches
        ],
        "shunts": [{"bus": s.bus, "admittance": _pair(s.admittance)} for s in net.shunts],
    }


def serialize_network(net: Network) -> str:
    return json.dumps(network_to_dict(net), indent=2)


# --------------------------------------------------------------------------
# Admittance matrix
# --------------------------------------------------------------------------


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AdmittancePartition:
    """Bus admittance matrix in generator-first order, with its four blocks."""

    Y: np.ndarray
    gen_index: tuple[int, ...]
    load_index: tuple[int, ...]
    Y_GG: np.ndarray = field(init=False, repr=False)
    Y_GL: np.ndarray = field(init=False, repr=False)
    Y_LG: np.ndarray = field(init=False, repr=False)
    Y_LL: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        Y = _readonly(np.array(self.Y, dtype=complex))
        ng, nl = len(self.gen_index), len(self.load_index)
        if Y.shape != (ng + nl, ng + nl):
            raise ValueError(f"Y has shape {Y.shape}, expected {(ng + nl, ng + nl)}")
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "Y_GG", _readonly(Y[:ng, :ng].copy()))
        object.__setattr__(self, "Y_GL", _readonly(Y[:ng, ng:].copy()))
        object.__setattr__(self, "Y_LG", _readonly(Y[ng:, :ng].copy()))
        object.__setattr__(self, "Y_LL", _readonly(Y[ng:, ng:].copy()))

    @property
    def order(self) -> tuple[int, ...]:
        """Bus ids in row/column order of Y."""
        return self.gen_index + self.load_index

    @property
    def n_gen(self) -> int:
        return len(self.gen_index)

    @property
    def n_load(self) -> int:
        return len(self.load_index)

    @cached_property
    def Z_LL(self) -> np.ndarray:
        """inv(Y_LL); raises SingularMatrixError if Y_LL is singular."""
        return _readonly(cnum.invert(self.Y_LL))

    @cached_property
    def Z_tilde(self) -> np.ndarray | None:
        """inv(Y), or None when Y is singular (no shunt path to ground)."""
        if not invertibility_check(self.Y).invertible:
            return None
        return _readonly(cnum.invert(self.Y))

    def position(self, bus_id: int) -> int:
        return self.order.index(bus_id)

    def load_position(self, bus_id: int) -> int:
        return self.load_index.index(bus_id)


def build_ybus(net: Network) -> AdmittancePartition:
    """Assemble Y by stamping each branch and shunt; generators first, loads second."""
    gen_index = tuple(b.id for b in net.buses if b.is_generator)
    load_index = tuple(b.id for b in net.buses if b.is_load)
    pos = {bid: k for k, bid in enumerate(gen_index + load_index)}
    n = len(pos)
    Y = np.zeros((n, n), dtype=complex)
    for br in net.branches:
        i, j = pos[br.from_bus], pos[br.to_bus]
        y = br.admittance
        Y[i, i] += y
        Y[j, j] += y
        Y[i, j] -= y
        Y[j, i] -= y
    for sh in net.shunts:
        k = pos[sh.bus]
        Y[k, k] += sh.admittance
    return AdmittancePartition(Y, gen_index, load_index)


@dataclass(frozen=True)
class InvertibilityResult:
    invertible: bool
    pivot_ratio: float

    def __bool__(self) -> bool:
        return self.invertible


def invertibility_check(Y) -> InvertibilityResult:
    ratio = cnum.pivot_ratio(Y)
    return InvertibilityResult(ratio > cnum.PIVOT_TOL, ratio)


# --------------------------------------------------------------------------
# Built-in two-bus system
# --------------------------------------------------------------------------


def two_bus_network(
    v1: complex = 1.0,
    y12: complex = -3j,
    y_shunt: complex | None = 1j,
    load: complex = 0.2j,
) -> Network:
    """Slack bus 1 feeding constant-power load bus 2 over one line.

    Defaults give the counterexample system: V1 = 1, line admittance -3i,
    shunt i at bus 1, base load 0.2i drawn at bus 2.
    """
    shunts = (Shunt(1, complex(y_shunt)),) if y_shunt is not None else ()
    return Network(
        (Bus(1, BusKind.GENERATOR, voltage=complex(v1)), Bus(2, BusKind.LOAD, base_power=complex(load))),
        (Branch(1, 2, complex(y12)),),
        shunts,
    )
