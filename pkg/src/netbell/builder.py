"""Assembly of the nonlinear network inequality from a topology and FCBIs.

The inequality reads S = sum_j |I_j|^(1/l) <= bound, where each column j
combines the Delta-weighted observables of every leaf with all intermediate
parties fixed at input j. The classical bound is the geometric mean of the
peripheral FCBI classical bounds; the quantum bound uses their quantum
optima instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ColumnMismatchError,
    DegenerateBipartiteError,
    LeafPairSourceError,
    MissingFcbiError,
    TooFewLeavesError,
)
from .fcbi import CoefficientMatrix, state_max
from .qstate import TwoQubitState
from .topology import LeafAnalysis, NetworkTopology, find_leaves


@dataclass(frozen=True)
class NetworkInequality:
    """Built inequality: topology, leaf analysis, k, per-source FCBIs, bounds."""

    topology: NetworkTopology
    leaves: LeafAnalysis
    k: int
    fcbi_map: dict[int, CoefficientMatrix]
    classical_bound: float
    quantum_bound: float

    @property
    def l(self) -> int:  # noqa: E743
        return self.leaves.l

    def leaf_fcbi(self, leaf: int) -> CoefficientMatrix:
        return self.fcbi_map[self.leaves.peripheral_map[leaf]]

    def intermediate_sources(self) -> list[int]:
        peripheral = self.leaves.peripheral_set
        return [
            s for s in range(1, self.topology.n_sources + 1) if s not in peripheral
        ]

    def term(self, j: int) -> dict:
        """Human-readable description of the column-j correlator."""
        if not 1 <= j <= self.k:
            raise IndexError(f"column {j} outside [1, {self.k}]")
        leaves = {}
        for leaf, source in self.leaves.peripheral_map.items():
            m = self.fcbi_map[source]
            leaves[leaf] = {
                "source": source,
                "coefficients": {x: float(m.entries[x - 1, j - 1]) for x in range(1, m.rows + 1)},
            }
        return {
            "column": j,
            "fixed_input": j,
            "intermediate_parties": [int(p) for p in self.leaves.intermediate_set],
            "delta_leaves": leaves,
        }


def _geomean(values, l: int) -> float:
    vals = np.asarray(values, dtype=float)
    if np.any(vals <= 0.0):
        return 0.0
    # exp(log-sum / l) keeps the l-th root stable for large l
    return float(np.exp(np.log(vals).sum() / l))


def build_inequality(
    topology: NetworkTopology, k: int, fcbi_map: dict[int, CoefficientMatrix]
) -> NetworkInequality:
    """Validate and build the network inequality.

    Raises:
        TooFewLeavesError: fewer than two leaf nodes.
        DegenerateBipartiteError: two-party network (plain FCBI territory).
        LeafPairSourceError: a source connects two leaves in a larger network.
        MissingFcbiError: fcbi_map does not cover exactly the peripheral sources.
        ColumnMismatchError: some FCBI column count differs from k.
    """
    if topology.n_parties == 2:
        raise DegenerateBipartiteError(
            "two-party networks are plain bipartite Bell tests; evaluate the FCBI directly"
        )
    leaves = find_leaves(topology)
    if leaves.l < 2:
        raise TooFewLeavesError(
            f"the construction needs at least two leaf nodes, found {leaves.l}"
        )
    leaf_set = {int(p) for p in leaves.leaf_set}
    for s in leaves.peripheral_set:
        a, b = topology.endpoints(s)
        if a in leaf_set and b in leaf_set:
            raise LeafPairSourceError(
                f"source {s} joins two leaves ({a}, {b}); no intermediate party holds its B side"
            )
    peripheral = leaves.peripheral_set
    given = set(fcbi_map)
    if given != peripheral:
        raise MissingFcbiError(
            f"fcbi_map must cover exactly the peripheral sources {sorted(peripheral)}, got {sorted(given)}"
        )
    if k < 1:
        raise ColumnMismatchError("intermediate input count k must be positive")
    for s, m in fcbi_map.items():
        if m.cols != k:
            raise ColumnMismatchError(
                f"FCBI for source {s} has {m.cols} columns, expected k={k}"
            )

    betas = [fcbi_map[s].classical_bound for s in sorted(peripheral)]
    opts = [fcbi_map[s].quantum_opt for s in sorted(peripheral)]
    return NetworkInequality(
        topology=topology,
        leaves=leaves,
        k=k,
        fcbi_map=dict(fcbi_map),
        classical_bound=_geomean(betas, leaves.l),
        quantum_bound=_geomean(opts, leaves.l),
    )


def classical_bound_network(ineq: NetworkInequality) -> float:
    """Recompute the classical bound from the stored FCBIs (audit path)."""
    betas = [m.classical_bound for _, m in sorted(ineq.fcbi_map.items())]
    return _geomean(betas, ineq.l)


def quantum_bound_network(ineq: NetworkInequality) -> float:
    """Recompute the quantum bound from the stored FCBIs (audit path)."""
    opts = [m.quantum_opt for _, m in sorted(ineq.fcbi_map.items())]
    return _geomean(opts, ineq.l)


def mixed_state_bound(
    ineq: NetworkInequality,
    states: dict[int, TwoQubitState],
    restarts: int = 32,
    seed: int = 0,
) -> float:
    """Upper bound on S for given source states under separable qubit measurements.

    Product of the per-peripheral-source state maxima and the largest
    correlation singular value of every intermediate source, all to the
    power 1/l.
    """
    factors = []
    for s in sorted(ineq.leaves.peripheral_set):
        factors.append(state_max(ineq.fcbi_map[s], states[s], restarts, seed))
    for u in ineq.intermediate_sources():
        factors.append(states[u].t0)
    return _geomean(factors, ineq.l)
