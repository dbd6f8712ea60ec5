"""Newton power flow with fixed-voltage generators and constant-power loads.

Also builds the similarity-transformed complex Jacobian

    J = diag([V_L; conj(V_L)]) + [[0, B], [conj(B), 0]],   B[i, j] = Z[i, j] * I_L[j]

with Z = inv(Y_LL), and the per-row diagonal dominance margins of J.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cnum
from .netmodel import AdmittancePartition, Network, build_ybus

MISMATCH_TOL = 1e-10
MAX_ITER = 50
DIVERGE_NORM = 1e3
# give up after this many iterations without improving the best mismatch
STALL_ITER = 10


@dataclass(frozen=True)
class PowerFlowSolution:
    """Power flow state, vectors in partition order (generators then loads)."""

    V: np.ndarray
    I: np.ndarray
    converged: bool
    iterations: int
    max_mismatch: float
    lam: float
    order: tuple[int, ...]
    n_gen: int

    @property
    def V_G(self) -> np.ndarray:
        return self.V[: self.n_gen]

    @property
    def V_L(self) -> np.ndarray:
        return self.V[self.n_gen :]

    @property
    def I_G(self) -> np.ndarray:
        return self.I[: self.n_gen]

    @property
    def I_L(self) -> np.ndarray:
        return self.I[self.n_gen :]

    def voltage(self, bus_id: int) -> complex:
        return complex(self.V[self.order.index(bus_id)])

    def current(self, bus_id: int) -> complex:
        return complex(self.I[self.order.index(bus_id)])


def load_powers(net: Network, partition: AdmittancePartition) -> np.ndarray:
    """Base drawn power of every load bus, in partition load order."""
    return np.array([net.bus(b).base_power for b in partition.load_index], dtype=complex)


def generator_voltages(net: Network, partition: AdmittancePartition) -> np.ndarray:
    return np.array([net.bus(b).voltage for b in partition.gen_index], dtype=complex)


def bus_currents(partition: AdmittancePartition, V) -> np.ndarray:
    """Injection currents I = Y V (partition bus order)."""
    V = cnum.as_vector(V)
    if V.shape[0] != partition.Y.shape[0]:
        raise ValueError(f"dimension mismatch: Y is {partition.Y.shape}, V has length {V.shape[0]}")
    return partition.Y @ V


def mismatch(partition: AdmittancePartition, V_G, V_L, S_load, lam: float) -> np.ndarray:
    """Complex mismatch f_i = V_i conj(I_i) + lam S_i at each load bus.

    S_load is drawn power, so f vanishes when the injection equals -lam S.
    """
    I_L = partition.Y_LG @ V_G + partition.Y_LL @ V_L
    return V_L * np.conj(I_L) + lam * S_load


def newton_jacobian(partition: AdmittancePartition, V_G, V_L) -> np.ndarray:
    """Real Jacobian of [Re f; Im f] with respect to [Re V_L; Im V_L].

    Uses df = diag(conj I_L) dV + diag(V_L) conj(Y_LL) dconj(V).
    """
    I_L = partition.Y_LG @ V_G + partition.Y_LL @ V_L
    A = np.diag(np.conj(I_L))
    Bm = V_L[:, None] * np.conj(partition.Y_LL)
    d_re = A + Bm
    d_im = 1j * (A - Bm)
    n = len(V_L)
    out = np.empty((2 * n, 2 * n))
    out[:n, :n] = d_re.real
    out[:n, n:] = d_im.real
    out[n:, :n] = d_re.imag
    out[n:, n:] = d_im.imag
    return out


def solve(
    net: Network,
    lam: float,
    V0=None,
    partition: AdmittancePartition | None = None,
) -> PowerFlowSolution:
    """Newton power flow at load scale `lam`.

    Starts from `V0` (load-bus voltages, partition order) when given, else from
    a flat start at the mean generator voltage.  Failure to converge is
    reported through ``converged=False``, never raised.
    """
    if lam < 0 or not np.isfinite(lam):
        raise ValueError(f"load scale must be a finite non-negative number, got {lam}")
    if partition is None:
        partition = build_ybus(net)
    V_G = generator_voltages(net, partition)
    S = load_powers(net, partition)
    nl = partition.n_load

    if V0 is None:
        V_L = np.full(nl, V_G.mean(), dtype=complex)
    else:
        V_L = np.array(V0, dtype=complex)
        if V_L.shape != (nl,):
            raise ValueError(f"warm start has shape {V_L.shape}, expected ({nl},)")

    converged = False
    iterations = 0
    f = mismatch(partition, V_G, V_L, S, lam)
    err = cnum.inf_norm(f)
    best, since_best = err, 0
    while True:
        if not np.isfinite(err):
            break
        if err <= MISMATCH_TOL:
            converged = True
            break
        if iterations >= MAX_ITER or since_best >= STALL_ITER:
            break
        Jr = newton_jacobian(partition, V_G, V_L)
        rhs = -np.concatenate([f.real, f.imag])
        try:
            dx = cnum.lu_solve(Jr, rhs).real
        except cnum.SingularMatrixError:
            break
        V_L = V_L + dx[:nl] + 1j * dx[nl:]
        iterations += 1
        if not np.all(np.isfinite(V_L)) or cnum.inf_norm(V_L) > DIVERGE_NORM:
            f = mismatch(partition, V_G, V_L, S, lam) if np.all(np.isfinite(V_L)) else f
            err = cnum.inf_norm(f)
            break
        f = mismatch(partition, V_G, V_L, S, lam)
        err = cnum.inf_norm(f)
        if err < best:
            best, since_best = err, 0
        else:
            since_best += 1

    V = np.concatenate([V_G, V_L])
    I = bus_currents(partition, V) if np.all(np.isfinite(V)) else np.full_like(V, np.nan)
    return PowerFlowSolution(
        V=V,
        I=I,
        converged=converged,
        iterations=iterations,
        max_mismatch=err,
        lam=float(lam),
        order=partition.order,
        n_gen=partition.n_gen,
    )


@dataclass(frozen=True)
class TransformedJacobian:
    J: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        n = self.B.shape[0]
        if self.J.shape != (2 * n, 2 * n):
            raise ValueError("J and B dimensions disagree")
        if not (np.array_equal(self.J[:n, n:], self.B) and np.array_equal(self.J[n:, :n], np.conj(self.B))):
            raise ValueError("J off-diagonal blocks do not match B")


def _check_dims(Z, V_L, I_L):
    Z = cnum.as_matrix(Z)
    V_L = cnum.as_vector(V_L)
    I_L = cnum.as_vector(I_L)
    n = V_L.shape[0]
    if Z.shape != (n, n) or I_L.shape != (n,):
        raise ValueError(f"dimension mismatch: Z {Z.shape}, V_L {V_L.shape}, I_L {I_L.shape}")
    return Z, V_L, I_L


def transformed_jacobian(Z, V_L, I_L) -> TransformedJacobian:
    Z, V_L, I_L = _check_dims(Z, V_L, I_L)
    n = V_L.shape[0]
    B = Z * I_L[None, :]
    J = np.zeros((2 * n, 2 * n), dtype=complex)
    J[np.arange(2 * n), np.arange(2 * n)] = np.concatenate([V_L, np.conj(V_L)])
    J[:n, n:] = B
    J[n:, :n] = np.conj(B)
    return TransformedJacobian(J=J, B=B)


def dominance_margins(V_L, Z, I_L) -> np.ndarray:
    """|V_i| - sum_j |Z_ij I_j| per load bus; all positive certifies J nonsingular."""
    Z, V_L, I_L = _check_dims(Z, V_L, I_L)
    return np.abs(V_L) - np.abs(Z * I_L[None, :]).sum(axis=1)
