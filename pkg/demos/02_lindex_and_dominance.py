"""L-index and the Jacobian diagonal-dominance margin on a meshed 3-bus system.

Both loads are scaled together.  Along the sweep we print the L-index, the
smallest dominance margin |V_i| - sum_j |Z_ij I_j| of the transformed Jacobian
J, and its smallest singular value.  A positive margin certifies that J (and
hence the power flow Jacobian) is nonsingular; near the nose the margin goes
negative before J actually becomes singular, so it is a conservative test.
"""

from pathlib import Path

from voltstab import cnum, continuation, netmodel, powerflow

net = netmodel.load_network(Path(__file__).parent / "data" / "three_bus.json")
part = netmodel.build_ybus(net)
trace = continuation.sweep(net, lambda_max_guess=2.0, steps=40, monitored_bus=3)
print(f"nose at lambda = {trace.lambda_nose:.5f}")

print(f"{'lambda':>9} {'L':>8} {'min margin':>11} {'sigma_min(J)':>13}")
for r in trace.records[::4] + (trace.last,):
    sol = r.solution
    J = powerflow.transformed_jacobian(part.Z_LL, sol.V_L, sol.I_L).J
    print(f"{r.lam:9.5f} {r.report.L:8.4f} {r.report.min_margin:11.5f} {cnum.min_singular_value(J):13.6f}")

# On a meshed system L does not have to hit exactly 1 at the nose.  What
# does hold everywhere: margin > 0 never coincides with a singular J.
