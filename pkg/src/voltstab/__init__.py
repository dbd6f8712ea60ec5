"""Steady-state voltage stability indices: L-index, Jacobian dominance margins and ENA.

Includes the two-bus counterexample showing that the ENA stability condition
(Delta = 0, |Z_L| = |Z_eq|) does not mark voltage collapse.
"""

from .cnum import SingularMatrixError, invert, lu_solve, min_singular_value
from .continuation import ContinuationTrace, NoseOracle, export_trace, sweep, two_bus_nose_oracle
from .indices import (
    EnaEquivalent,
    EnaUndefinedError,
    LoadEquivalent,
    StabilityReport,
    ena_equivalent,
    impedance_match_reference,
    l_index,
    lindex_equivalents,
    load_impedance,
    quadratic_residual,
    stability_report,
)
from .netmodel import (
    AdmittancePartition,
    Branch,
    Bus,
    BusKind,
    Network,
    NetworkSemanticError,
    NetworkSyntaxError,
    Shunt,
    build_ybus,
    invertibility_check,
    parse_network,
    serialize_network,
    two_bus_network,
)
from .powerflow import PowerFlowSolution, bus_currents, dominance_margins, solve, transformed_jacobian

__version__ = "0.1.0"
