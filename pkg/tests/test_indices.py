import math

import numpy as np
import pytest

from voltstab import cnum
from voltstab import indices as ix
from voltstab import netmodel as nm
from voltstab import powerflow as pf
from netgen import random_feasible, random_network

Y_IV = np.array([[-2j, 3j], [3j, -3j]])
ZT_IV = np.array([[-1j, -1j], [-1j, -2j / 3]])


def v2_closed_form(lam):
    return (1 + math.sqrt(1 - 4 * lam * 0.2 / 3)) / 2


def state(V2):
    """Two-bus operating point with load voltage V2 (real), currents from I = Y V."""
    V = np.array([1.0, V2], dtype=complex)
    I = Y_IV @ V
    return pf.PowerFlowSolution(V=V, I=I, converged=True, iterations=0, max_mismatch=0.0,
                                lam=3 * V2 * (1 - V2) / 0.2, order=(1, 2), n_gen=1)


def test_equivalent_voltage_two_bus(two_bus):
    p = nm.build_ybus(two_bus)
    np.testing.assert_allclose(ix.equivalent_voltages(p, [1.0]), [1.0])


def test_lindex_unit_load(two_bus):
    sol = pf.solve(two_bus, 1.0)
    p = nm.build_ybus(two_bus)
    (eq,) = ix.lindex_equivalents(p, sol.V_G, sol.V_L, sol.I_L)
    V = v2_closed_form(1.0)
    assert eq.E == pytest.approx(1.0)
    assert eq.L_term == pytest.approx((1 - V) / V, abs=1e-10)
    assert eq.L_term == pytest.approx(0.077383, abs=1e-6)
    # single radial load: the equivalent line impedance is the line itself
    assert eq.z_eq_line == pytest.approx(1j / 3)
    assert ix.l_index([eq]) == pytest.approx(0.077383, abs=1e-6)


def test_lindex_zero_load(two_bus):
    sol = pf.solve(two_bus, 0.0)
    eqs = ix.lindex_equivalents(nm.build_ybus(two_bus), sol.V_G, sol.V_L, sol.I_L)
    assert eqs[0].L_term == pytest.approx(0.0, abs=1e-15)
    assert eqs[0].z_eq_line is None
    assert ix.l_index(eqs) == pytest.approx(0.0, abs=1e-15)


def test_lindex_at_nose():
    sol = state(0.5)
    p = nm.build_ybus(nm.two_bus_network())
    eqs = ix.lindex_equivalents(p, sol.V_G, sol.V_L, sol.I_L)
    assert ix.l_index(eqs) == pytest.approx(1.0, abs=1e-12)


def test_l_index_requires_loads():
    with pytest.raises(ValueError):
        ix.l_index([])


def test_lindex_singular_yll():
    net = nm.Network(
        (nm.Bus(1, nm.BusKind.GENERATOR, voltage=1.0), nm.Bus(2, nm.BusKind.LOAD, base_power=0.1j),
         nm.Bus(3, nm.BusKind.LOAD, base_power=0.1j)),
        (nm.Branch(1, 2, -1j), nm.Branch(2, 3, -1j)),
        (nm.Shunt(2, 1j),),  # cancels the series admittance seen from bus 2
    )
    p = nm.build_ybus(net)
    # Y_LL = [[-1j, 1j], [1j, -1j]] is singular
    with pytest.raises(cnum.SingularMatrixError):
        ix.lindex_equivalents(p, [1.0], [1.0, 1.0], [0, 0])


def test_ena_at_nose():
    sol = state(0.5)
    np.testing.assert_allclose(sol.I, [-0.5j, 1.5j])
    eq = ix.ena_equivalent(Y_IV, ZT_IV, sol, 2)
    # direct evaluation from Zt and I
    V_s = ZT_IV[1, 0] * sol.I[0]
    S_eq = sol.V[1] * np.conj(ZT_IV[1, 1] / ZT_IV[1, 1] * sol.I[1])
    assert eq.V_s == pytest.approx(V_s) and eq.V_s == pytest.approx(-0.5)
    assert eq.Z_eq == pytest.approx(-2j / 3)
    assert eq.S_eq == pytest.approx(S_eq) and eq.S_eq == pytest.approx(-0.75j)
    assert eq.phi == pytest.approx(0.0, abs=1e-12)
    assert eq.alpha1 == pytest.approx(2.0)
    assert eq.alpha2 == pytest.approx(0.0, abs=1e-12)
    assert eq.Delta == pytest.approx(-0.4375)


def test_ena_unit_load(two_bus):
    sol = pf.solve(two_bus, 1.0)
    eq = ix.ena_equivalent(nm.build_ybus(two_bus).Y, None, sol, 2)
    V = v2_closed_form(1.0)
    # V_s = Zt_21 I_1 = -1j * (-2j + 3j V) = 3V - 2 ; |S_eq| = 3 V (1 - V) = 0.2
    vs2 = (3 * V - 2) ** 2
    a1 = 4 * (2 / 3) * 0.2
    assert abs(eq.V_s) ** 2 == pytest.approx(vs2, abs=1e-10)
    assert eq.alpha1 == pytest.approx(a1, abs=1e-10)
    assert eq.Delta == pytest.approx((vs2 - a1) * vs2, abs=1e-10)
    # printed reference values, rounded from V2 = 0.928175
    assert abs(eq.V_s) ** 2 == pytest.approx(0.615481, abs=5e-6)
    assert eq.alpha1 == pytest.approx(0.533333, abs=1e-6)
    assert eq.Delta == pytest.approx(0.050560, abs=5e-6)


def test_ena_zero_load(two_bus):
    eq = ix.ena_equivalent(nm.build_ybus(two_bus).Y, None, pf.solve(two_bus, 0.0), 2)
    assert eq.S_eq == 0
    assert eq.alpha1 == 0 and eq.alpha2 == 0
    assert eq.Delta == pytest.approx(abs(eq.V_s) ** 4)
    assert eq.Delta >= 0


def test_ena_refused_without_shunt(two_bus_no_shunt):
    sol = pf.solve(two_bus_no_shunt, 1.0)
    assert sol.converged
    with pytest.raises(ix.EnaUndefinedError, match="admittance matrix singular"):
        ix.ena_equivalent(nm.build_ybus(two_bus_no_shunt).Y, None, sol, 2)
    rep = ix.stability_report(two_bus_no_shunt, sol)
    assert rep.ena is None and rep.ena_equivalent(2) is None
    assert rep.L == pytest.approx((1 - v2_closed_form(1.0)) / v2_closed_form(1.0))


def test_ena_rejects_generator_bus(two_bus):
    with pytest.raises(ValueError):
        ix.ena_equivalent(Y_IV, ZT_IV, pf.solve(two_bus, 1.0), 1)


@pytest.mark.parametrize("lam", [1.0, 3.75])
def test_quadratic_residual_identity(lam):
    sol = state(v2_closed_form(lam))
    eq = ix.ena_equivalent(Y_IV, ZT_IV, sol, 2)
    assert abs(ix.quadratic_residual(eq, sol.V[1])) < 1e-8


@pytest.mark.parametrize("lam", [1.0, 3.75])
def test_quadratic_residual_sensitivity(lam):
    sol = state(v2_closed_form(lam))
    eq = ix.ena_equivalent(Y_IV, ZT_IV, sol, 2)
    assert abs(ix.quadratic_residual(eq, 1.1 * sol.V[1])) > 1e-3


def test_load_impedance():
    assert ix.load_impedance(0.5, 0.75j) == pytest.approx(1 / 3)
    V = v2_closed_form(1.0)
    assert ix.load_impedance(V, 0.2j) == pytest.approx(V * V / 0.2)
    assert ix.load_impedance(V, 0.2j) == pytest.approx(4.30754, abs=5e-5)
    assert ix.load_impedance(1.0, 1.0) == 1.0
    with pytest.raises(ValueError):
        ix.load_impedance(1.0, 0)


def test_impedance_match_reference(two_bus):
    assert ix.impedance_match_reference(two_bus, 2) == pytest.approx(1 / 3)
    real_line = nm.two_bus_network(y12=4.0)
    assert ix.impedance_match_reference(real_line, 2) == 0.25
    meshed = nm.Network(
        (nm.Bus(1, nm.BusKind.GENERATOR, voltage=1.0), nm.Bus(2, nm.BusKind.GENERATOR, voltage=1.0),
         nm.Bus(3, nm.BusKind.LOAD, base_power=0.1j)),
        (nm.Branch(1, 3, -2j), nm.Branch(2, 3, -2j)),
    )
    with pytest.raises(ix.NotRadialLeafError, match="not a radial leaf"):
        ix.impedance_match_reference(meshed, 3)


def test_report_fields(two_bus):
    sol = pf.solve(two_bus, 1.0)
    rep = ix.stability_report(two_bus, sol)
    assert rep.buses == (2,)
    assert rep.L == max(le.L_term for le in rep.load_equivalents)
    assert rep.zl(2) == pytest.approx(abs(sol.voltage(2)) ** 2 / 0.2)
    assert rep.min_margin == pytest.approx(min(rep.margins))
    assert math.isinf(ix.stability_report(two_bus, pf.solve(two_bus, 0.0)).zl(2))


def test_identities_random_networks():
    rng = np.random.default_rng(21)
    for _ in range(150):
        net, sol = random_feasible(rng)
        p = nm.build_ybus(net)
        rep = ix.stability_report(net, sol, p)
        Z = cnum.invert(p.Y_LL)
        for k, le in enumerate(rep.load_equivalents):
            # V_L = E + Z I_L row-wise, so V_i - E_i = z_i^T I_L
            assert abs(sol.V_L[k] - le.E - Z[k] @ sol.I_L) < 1e-10
            assert le.L_term == pytest.approx(abs(Z[k] @ sol.I_L) / abs(sol.V_L[k]), rel=1e-9)
            if le.z_eq_line is not None:
                assert le.z_eq_line * sol.I_L[k] == pytest.approx(Z[k] @ sol.I_L, abs=1e-12)
        for k, eq in enumerate(rep.ena):
            assert eq.alpha1 >= 0 and eq.alpha2 >= 0
            assert eq.Delta == ix.discriminant(abs(eq.V_s) ** 2, eq.alpha1, eq.alpha2)
            zs2 = (abs(eq.Z_eq) * abs(eq.S_eq)) ** 2
            assert eq.alpha1 * eq.alpha2 == pytest.approx(4 * zs2 * math.sin(eq.phi) ** 2, abs=1e-12)
            assert -math.pi < eq.phi <= math.pi
            assert abs(ix.quadratic_residual(eq, sol.V_L[k])) < 1e-8


def test_ena_matches_definition_on_random_networks():
    rng = np.random.default_rng(22)
    for _ in range(30):
        net, sol = random_feasible(rng)
        p = nm.build_ybus(net)
        Zt = np.linalg.inv(p.Y)
        ng = p.n_gen
        for b in p.load_index:
            i = p.position(b)
            eq = ix.ena_equivalent(p.Y, None, sol, b)
            vs = sum(Zt[i, j] * sol.I[j] for j in range(ng))
            k = sum(Zt[i, j] / Zt[i, i] * sol.I[j] for j in range(ng, len(sol.I)))
            assert eq.V_s == pytest.approx(vs, abs=1e-10)
            assert eq.Z_eq == pytest.approx(Zt[i, i], abs=1e-10)
            assert eq.S_eq == pytest.approx(sol.V[i] * np.conj(k), abs=1e-10)
            # V_i = V_s + Z_eq * k reconstructs the bus voltage
            assert eq.V_s + eq.Z_eq * k == pytest.approx(sol.V[i], abs=1e-10)
