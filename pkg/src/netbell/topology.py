"""Party-source network graphs and leaf-node analysis.

A network is an undirected multigraph-free graph: parties are vertices,
bipartite sources are edges, and source ``j`` is the j-th entry of the edge
list (1-based). Leaf nodes are degree-one parties; the unique source attached
to a leaf is called peripheral.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    DisconnectedError,
    DuplicateEdgeError,
    IndexOutOfRangeError,
    IsolatedPartyError,
    SelfLoopError,
)


@dataclass(frozen=True)
class NetworkTopology:
    """Validated network graph.

    Attributes:
        n_parties: number of parties N (1-based party indices).
        edges: (M, 2) int array; row j-1 holds the party pair of source j.
        degrees: per-party degree, shape (N,), index 0 = party 1.
    """

    n_parties: int
    edges: np.ndarray
    degrees: np.ndarray
    _adjacency: list | None = field(default=None, compare=False, repr=False)

    @property
    def n_sources(self) -> int:
        return self.edges.shape[0]

    @property
    def adjacency(self) -> list[list[tuple[int, int]]]:
        """Per-party list of (neighbor, source index) pairs, built lazily."""
        if self._adjacency is None:
            adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n_parties + 1)]
            for j, (a, b) in enumerate(self.edges, start=1):
                adj[int(a)].append((int(b), j))
                adj[int(b)].append((int(a), j))
            object.__setattr__(self, "_adjacency", adj)
        return self._adjacency

    def incident_sources(self, party: int) -> list[int]:
        """Source indices attached to a party."""
        return [s for _, s in self.adjacency[party]]

    def endpoints(self, source: int) -> tuple[int, int]:
        a, b = self.edges[source - 1]
        return int(a), int(b)


@dataclass(frozen=True)
class LeafAnalysis:
    """Leaf structure of a topology.

    Attributes:
        leaf_set: sorted array of degree-one party indices.
        intermediate_set: sorted array of the remaining party indices.
        peripheral_sources: source index attached to each leaf, aligned with
            ``leaf_set``.
    """

    leaf_set: np.ndarray
    intermediate_set: np.ndarray
    peripheral_sources: np.ndarray

    @property
    def l(self) -> int:  # noqa: E743 - matches the standard leaf-count symbol
        return int(self.leaf_set.size)

    @property
    def peripheral_map(self) -> dict[int, int]:
        """leaf party -> its unique incident source index."""
        return {int(p): int(s) for p, s in zip(self.leaf_set, self.peripheral_sources)}

    @property
    def peripheral_set(self) -> set[int]:
        return {int(s) for s in self.peripheral_sources}


def build_topology(
    n_parties: int, edges, *, allow_disconnected: bool = False
) -> NetworkTopology:
    """Validate and construct a network topology.

    Args:
        n_parties: number of parties, >= 1.
        edges: iterable of (a, b) party-index pairs; entry j is source j+1.
        allow_disconnected: downgrade the connectivity failure to a warning.

    Raises:
        SelfLoopError, DuplicateEdgeError, IndexOutOfRangeError,
        IsolatedPartyError, DisconnectedError.
    """
    arr = np.asarray(edges, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        raise IndexOutOfRangeError("edges must be a non-empty list of party pairs")
    if n_parties < 1:
        raise IndexOutOfRangeError("n_parties must be positive")
    if arr.min() < 1 or arr.max() > n_parties:
        raise IndexOutOfRangeError(
            f"party indices must lie in [1, {n_parties}]"
        )
    if np.any(arr[:, 0] == arr[:, 1]):
        raise SelfLoopError("a source must connect two distinct parties")

    canon = np.sort(arr, axis=1)
    uniq = np.unique(canon, axis=0)
    if uniq.shape[0] != canon.shape[0]:
        raise DuplicateEdgeError("each source must connect a distinct pair of parties")

    degrees = np.bincount(arr.ravel(), minlength=n_parties + 1)[1:]
    if np.any(degrees == 0):
        missing = int(np.flatnonzero(degrees == 0)[0]) + 1
        raise IsolatedPartyError(f"party {missing} is attached to no source")

    m = arr.shape[0]
    graph = coo_matrix(
        (np.ones(m), (arr[:, 0] - 1, arr[:, 1] - 1)), shape=(n_parties, n_parties)
    )
    n_comp, _ = connected_components(graph, directed=False)
    if n_comp > 1:
        if allow_disconnected:
            warnings.warn(
                f"network has {n_comp} connected components", stacklevel=2
            )
        else:
            raise DisconnectedError(
                f"network has {n_comp} connected components; "
                "pass allow_disconnected to keep it"
            )

    return NetworkTopology(n_parties=n_parties, edges=arr, degrees=degrees)


def find_leaves(topology: NetworkTopology) -> LeafAnalysis:
    """Identify leaf parties and their peripheral sources in O(N + M)."""
    degrees = topology.degrees
    leaves = np.flatnonzero(degrees == 1) + 1
    intermediates = np.flatnonzero(degrees != 1) + 1

    # For a degree-one party the (single) write below is its incident source.
    edges = topology.edges
    touch = np.zeros(topology.n_parties + 1, dtype=np.int64)
    idx = np.arange(1, edges.shape[0] + 1)
    touch[edges[:, 0]] = idx
    touch[edges[:, 1]] = idx
    peripheral = touch[leaves]

    return LeafAnalysis(
        leaf_set=leaves,
        intermediate_set=intermediates,
        peripheral_sources=peripheral,
    )
