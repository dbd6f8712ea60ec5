"""Why the ENA discriminant misleads: its "source" voltage moves with the load.

The L-index equivalent source E = -inv(Y_LL) Y_LG V_G depends only on the
network and generator voltages.  The ENA source V_s = sum_G inv(Y)_ij I_j is a
weighted sum of generator currents, so it changes as the load grows.  The
quadratic in |V|^2 built from (V_s, Z_eq, S_eq) is then satisfied identically
at every operating point.  Its coefficients are not fixed, and its
discriminant says nothing about where the nose is.
"""

import numpy as np

from voltstab import continuation, indices, netmodel

net = netmodel.two_bus_network()
trace = continuation.sweep(net, 5.0, 25, monitored_bus=2)

print(f"{'lambda':>8} {'|E|':>7} {'|V_s|':>7} {'quadratic residual':>19} {'Delta':>9}")
for r in trace.records[::3] + (trace.last,):
    le = r.report.load_equivalent(2)
    ena = r.report.ena_equivalent(2)
    res = indices.quadratic_residual(ena, r.solution.voltage(2))
    print(f"{r.lam:8.4f} {abs(le.E):7.4f} {abs(ena.V_s):7.4f} {res:19.2e} {ena.Delta:9.4f}")

vs = np.array([abs(r.report.ena_equivalent(2).V_s) for r in trace.records])
print(f"\n|V_s| ranges over [{vs.min():.3f}, {vs.max():.3f}] while |E| stays at 1.")
