"""Two-bus counterexample to the ENA voltage stability condition.

Bus 1 is a slack bus at V1 = 1 with a shunt admittance i (so that Y is
invertible), bus 2 draws a constant power 0.2i through a line of admittance
-3i.  We scale the load until power flow stops converging and watch three
candidate collapse indicators along the way.

Run:  python demos/01_two_bus_counterexample.py [--plot delta.png]
"""

import argparse

import numpy as np

from voltstab import cnum, continuation, indices, netmodel

parser = argparse.ArgumentParser()
parser.add_argument("--plot", help="save a Delta-vs-lambda figure (needs matplotlib)")
args = parser.parse_args()

net = netmodel.two_bus_network()
part = netmodel.build_ybus(net)

# %% The admittance matrix and its inverse
print("Y =\n", part.Y)
print("inv(Y) =\n", np.round(cnum.invert(part.Y), 12))
# Z_eq for bus 2 is inv(Y)[1, 1] = 1/Y_sh + 1/Y12 = -2i/3, so ENA predicts
# collapse at |Z_L| = 2/3.  Impedance matching says |Z_L| = |1/Y12| = 1/3.

# %% Sweep the load up to the nose
trace = continuation.sweep(net, lambda_max_guess=5.0, steps=200, monitored_bus=2)
oracle = continuation.two_bus_nose_oracle(1.0, 1 / -3j, 0.2j)
print(f"\nnose found by bisection : lambda = {trace.lambda_nose:.6f}")
print(f"closed-form nose        : lambda = {oracle.lambda_star:.6f}, |V2| = {oracle.V_nose_mag:.4f}")
print(f"Delta changes sign at   : lambda = {trace.lambda_delta_zero:.6f}")

# %% A few rows of the trace
lam = trace.lambdas
rows = np.unique(np.r_[np.searchsorted(lam, [0.5, 1.0, 1.09, 1.1, 2.0, 3.0, 3.5]), len(lam) - 1])
print(f"\n{'lambda':>9} {'|V2|':>8} {'L':>8} {'Delta':>9} {'|Z_L|':>8} {'|Z_eq|':>8}")
for k in rows:
    r = trace.records[k]
    ena = r.report.ena_equivalent(2)
    print(f"{r.lam:9.5f} {abs(r.solution.voltage(2)):8.5f} {r.report.L:8.5f} "
          f"{ena.Delta:9.5f} {r.report.zl(2):8.5f} {abs(ena.Z_eq):8.5f}")

last = trace.last.report
print(f"\nat the nose: |Z_L| = {last.zl(2):.5f} vs |1/Y12| = {indices.impedance_match_reference(net, 2):.5f}"
      f" vs |Z_eq| = {abs(last.ena_equivalent(2).Z_eq):.5f}")
print(f"             L = {last.L:.5f}, Delta = {last.ena_equivalent(2).Delta:.5f}")
# L reaches 1 and |Z_L| reaches the line impedance exactly at collapse.
# Delta crosses zero near lambda = 1.09, less than a third of the way there.

# %% Optional figure of Delta along the sweep
if args.plot:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(lam, trace.series("delta"), label="Delta (bus 2)")
    ax.axhline(0, color="k", lw=0.5)
    ax.axvline(trace.lambda_nose, ls="--", color="r", label="voltage collapse")
    ax.set_xlabel("load scale lambda")
    ax.set_ylabel("Delta")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.plot, dpi=150)
    print(f"saved {args.plot}")
