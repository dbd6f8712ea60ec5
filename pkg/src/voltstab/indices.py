"""Load-bus equivalents: the L-index and the Equivalent Nodal Analysis (ENA) quantities.

Two different two-bus equivalents are computed for each load bus i:

* L-index equivalent, from V_L = E + Z I_L with Z = inv(Y_LL) and
  E = -Z Y_LG V_G.  E is independent of the loading.
* ENA equivalent, from V = Zt I with Zt = inv(Y):
  V_s = sum_{j in G} Zt_ij I_j,  Z_eq = Zt_ii,
  S_eq = V_i conj(sum_{j in L} Zt_ij / Zt_ii I_j).
  V_s depends on the generator currents, hence on the operating point.

Sign convention: currents are injections (I = Y V).  S_eq therefore carries
injection sign, and the ENA discriminant uses phi = angle(S_eq) - angle(Z_eq).
The quadratic in |V|^2 is an identity when written with the power drawn
through Z_eq, P_eq + i Q_eq = -S_eq; :func:`quadratic_residual` uses that form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cnum
from .netmodel import AdmittancePartition, Network, build_ybus, invertibility_check
from .powerflow import PowerFlowSolution, dominance_margins, load_powers

ZERO_CURRENT_TOL = 1e-12


class EnaUndefinedError(ValueError):
    """The full admittance matrix is singular, so Zt = inv(Y) does not exist."""

    def __init__(self, pivot_ratio: float = 0.0):
        self.pivot_ratio = pivot_ratio
        super().__init__(f"admittance matrix singular: ENA undefined (pivot ratio {pivot_ratio:.3e})")


class NotRadialLeafError(ValueError):
    pass


@dataclass(frozen=True)
class LoadEquivalent:
    bus: int
    E: complex
    z_eq_line: complex | None
    L_term: float


@dataclass(frozen=True)
class EnaEquivalent:
    bus: int
    V_s: complex
    Z_eq: complex
    S_eq: complex
    phi: float
    alpha1: float
    alpha2: float
    Delta: float

    @property
    def R_eq(self) -> float:
        return self.Z_eq.real

    @property
    def X_eq(self) -> float:
        return self.Z_eq.imag


@dataclass(frozen=True)
class StabilityReport:
    lam: float
    buses: tuple[int, ...]
    load_equivalents: tuple[LoadEquivalent, ...]
    ena: tuple[EnaEquivalent, ...] | None
    L: float
    Z_L_mag: tuple[float, ...]
    margins: tuple[float, ...]
    min_margin: float

    def _k(self, bus_id: int) -> int:
        return self.buses.index(bus_id)

    def load_equivalent(self, bus_id: int) -> LoadEquivalent:
        return self.load_equivalents[self._k(bus_id)]

    def ena_equivalent(self, bus_id: int) -> EnaEquivalent | None:
        return None if self.ena is None else self.ena[self._k(bus_id)]

    def zl(self, bus_id: int) -> float:
        return self.Z_L_mag[self._k(bus_id)]

    def margin(self, bus_id: int) -> float:
        return self.margins[self._k(bus_id)]


def equivalent_voltages(partition: AdmittancePartition, V_G) -> np.ndarray:
    """E = -inv(Y_LL) Y_LG V_G."""
    return -cnum.lu_solve(partition.Y_LL, partition.Y_LG @ cnum.as_vector(V_G))


def lindex_equivalents(partition: AdmittancePartition, V_G, V_L, I_L, Z=None) -> list[LoadEquivalent]:
    V_L = cnum.as_vector(V_L)
    I_L = cnum.as_vector(I_L)
    if Z is None:
        Z = cnum.invert(partition.Y_LL)
    E = equivalent_voltages(partition, V_G)
    drop = Z @ I_L
    out = []
    for k, bus in enumerate(partition.load_index):
        z_line = complex(drop[k] / I_L[k]) if abs(I_L[k]) >= ZERO_CURRENT_TOL else None
        out.append(
            LoadEquivalent(
                bus=bus,
                E=complex(E[k]),
                z_eq_line=z_line,
                L_term=float(abs((E[k] - V_L[k]) / V_L[k])),
            )
        )
    return out


def l_index(equivalents) -> float:
    """max_i |(E_i - V_i) / V_i| over the load buses."""
    terms = [eq.L_term for eq in equivalents]
    if not terms:
        raise ValueError("L-index needs at least one load bus")
    return max(terms)


def _wrap(angle: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.remainder(angle, 2 * math.pi)
    return math.pi if w == -math.pi else w


def discriminant(vs_sq: float, alpha1: float, alpha2: float) -> float:
    return (vs_sq - alpha1) * (vs_sq + alpha2)


def ena_equivalent(Y, Z_tilde, sol: PowerFlowSolution, bus: int) -> EnaEquivalent:
    """ENA two-bus equivalent seen from load bus `bus`.

    `Y` and `Z_tilde` are in the solution's bus order.  Pass ``Z_tilde=None``
    to have it computed; a singular `Y` raises EnaUndefinedError either way.
    """
    check = invertibility_check(Y)
    if not check.invertible:
        raise EnaUndefinedError(check.pivot_ratio)
    if Z_tilde is None:
        Z_tilde = cnum.invert(Y)
    return _ena(Z_tilde, sol, bus)


def _ena(Z_tilde, sol: PowerFlowSolution, bus: int) -> EnaEquivalent:
    i = sol.order.index(bus)
    if i < sol.n_gen:
        raise ValueError(f"bus {bus} is not a load bus")
    ng = sol.n_gen
    row = Z_tilde[i]
    V_s = complex(row[:ng] @ sol.I[:ng])
    Z_eq = complex(row[i])
    S_eq = complex(sol.V[i] * np.conj((row[ng:] / Z_eq) @ sol.I[ng:]))
    phi = _wrap(_angle(S_eq) - _angle(Z_eq))
    zs = abs(Z_eq) * abs(S_eq)
    alpha1 = 2 * zs * (1 + math.cos(phi))
    alpha2 = 2 * zs * (1 - math.cos(phi))
    vs_sq = abs(V_s) ** 2
    return EnaEquivalent(
        bus=bus,
        V_s=V_s,
        Z_eq=Z_eq,
        S_eq=S_eq,
        phi=phi,
        alpha1=alpha1,
        alpha2=alpha2,
        Delta=discriminant(vs_sq, alpha1, alpha2),
    )


def _angle(z: complex) -> float:
    return math.atan2(z.imag, z.real)


def quadratic_residual(eq: EnaEquivalent, V_i: complex) -> float:
    """|V|^4 + (2(P R + Q X) - |V_s|^2)|V|^2 + |S|^2 |Z|^2 with P + iQ = -S_eq.

    Zero whenever V_i, V_s, Z_eq and S_eq come from the same operating point.
    """
    u = abs(V_i) ** 2
    drawn = -eq.S_eq
    b = 2 * (drawn.real * eq.R_eq + drawn.imag * eq.X_eq) - abs(eq.V_s) ** 2
    return u * u + b * u + abs(drawn) ** 2 * abs(eq.Z_eq) ** 2


def load_impedance(V_i: complex, S_drawn: complex) -> float:
    """|Z_L| = |V|^2 / |S|."""
    if abs(S_drawn) == 0:
        raise ValueError("load impedance undefined for zero load power")
    return abs(V_i) ** 2 / abs(S_drawn)


def impedance_match_reference(net: Network, bus: int) -> float:
    """|1 / y| of the single branch feeding a radial leaf load bus."""
    if not net.bus(bus).is_load:
        raise ValueError(f"bus {bus} is not a load bus")
    incident = [br for br in net.branches if bus in (br.from_bus, br.to_bus)]
    if len(incident) != 1:
        raise NotRadialLeafError(f"bus {bus} is not a radial leaf: no closed-form reference")
    return 1.0 / abs(incident[0].admittance)


def stability_report(
    net: Network,
    sol: PowerFlowSolution,
    partition: AdmittancePartition | None = None,
) -> StabilityReport:
    """All indices at one operating point.

    ENA fields are ``None`` when Y is singular (no shunts); everything else is
    still reported.  |Z_L| is infinite at buses drawing no power.
    """
    if partition is None:
        partition = build_ybus(net)
    if partition.n_load == 0:
        raise ValueError("stability report needs at least one load bus")
    Z = partition.Z_LL
    V_L, I_L = sol.V_L, sol.I_L
    leq = lindex_equivalents(partition, sol.V_G, V_L, I_L, Z=Z)
    margins = dominance_margins(V_L, Z, I_L)

    ena = None
    Zt = partition.Z_tilde
    if Zt is not None:
        ena = tuple(_ena(Zt, sol, b) for b in partition.load_index)

    S = sol.lam * load_powers(net, partition)
    zl = tuple(float(load_impedance(v, s)) if abs(s) > 0 else math.inf for v, s in zip(V_L, S))
    return StabilityReport(
        lam=sol.lam,
        buses=partition.load_index,
        load_equivalents=tuple(leq),
        ena=ena,
        L=l_index(leq),
        Z_L_mag=zl,
        margins=tuple(float(m) for m in margins),
        min_margin=float(margins.min()),
    )
