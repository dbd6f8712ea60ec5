"""Random small networks for identity and property tests."""

import numpy as np

from voltstab import netmodel as nm
from voltstab import powerflow as pf


def random_network(rng, n_bus=None, shunt_all=True, load_scale=1.0):
    n_bus = int(rng.integers(3, 6)) if n_bus is None else n_bus
    n_gen = int(rng.integers(1, min(2, n_bus - 1) + 1))
    ids = [int(i) for i in rng.permutation(np.arange(1, 3 * n_bus))[:n_bus]]
    buses = []
    for k, bid in enumerate(ids):
        if k < n_gen:
            v = rng.uniform(0.95, 1.05) * np.exp(1j * rng.uniform(-0.1, 0.1))
            buses.append(nm.Bus(bid, nm.BusKind.GENERATOR, voltage=complex(v)))
        else:
            s = load_scale * complex(rng.uniform(0.0, 0.5), rng.uniform(-0.1, 0.3))
            buses.append(nm.Bus(bid, nm.BusKind.LOAD, base_power=s))
    order = list(rng.permutation(n_bus))
    buses = [buses[k] for k in order]

    def line():
        x = rng.uniform(0.05, 0.4)
        r = rng.uniform(0.0, 0.3) * x
        return complex(1.0 / complex(r, x))

    branches = []
    shuffled = [ids[k] for k in rng.permutation(n_bus)]
    for k in range(1, n_bus):
        other = shuffled[int(rng.integers(0, k))]
        branches.append(nm.Branch(shuffled[k], other, line()))
    for _ in range(int(rng.integers(0, n_bus))):
        a, b = rng.choice(ids, size=2, replace=False)
        branches.append(nm.Branch(int(a), int(b), line()))

    shunts = []
    if shunt_all:
        for bid in ids:
            shunts.append(nm.Shunt(bid, complex(rng.uniform(0.0, 0.02), rng.uniform(0.01, 0.2))))
    return nm.Network(tuple(buses), tuple(branches), tuple(shunts))


def random_feasible(rng, shunt_all=True, tries=8):
    """A random network together with a converged solution at lambda = 1.

    Loads are halved until the flat-start Newton solve converges.
    """
    while True:
        net = random_network(rng, shunt_all=shunt_all)
        scale = 1.0
        for _ in range(tries):
            scaled = nm.Network(
                tuple(
                    b if b.is_generator else nm.Bus(b.id, b.kind, base_power=b.base_power * scale)
                    for b in net.buses
                ),
                net.branches,
                net.shunts,
            )
            sol = pf.solve(scaled, 1.0)
            if sol.converged:
                return scaled, sol
            scale *= 0.5
