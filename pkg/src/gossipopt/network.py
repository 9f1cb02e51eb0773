"""Graph topologies and gossip (Laplacian) matrices with cached spectra.

A gossip matrix here is the combinatorial Laplacian L = D - Adj of a
connected undirected graph: symmetric, positive semidefinite, graph-induced
sparsity, null space spanned by the all-ones vector. The eigengap
eta = lambda_2 / lambda_max governs how fast neighbor-only mixing contracts
disagreement and is cached alongside the matrix.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DisconnectedGraph, InvalidSize, InvalidParameter, ParseError
from .linalg import EigenDecomposition, jacobi_eigen
from .rng import Rng

_ER_RETRY_BUDGET = 1000
_NULL_EIGENVALUE_TOL = 1e-10


@dataclass(frozen=True)
class Graph:
    """Undirected graph on nodes 0..m-1 with no self-loops."""

    m: int
    edges: frozenset

    def __post_init__(self):
        if self.m < 2:
            raise InvalidSize(f"need at least 2 nodes, got {self.m}")
        for i, j in self.edges:
            if i == j:
                raise InvalidSize(f"self-loop at node {i}")
            if not (0 <= i < self.m and 0 <= j < self.m):
                raise InvalidSize(f"edge ({i}, {j}) outside 0..{self.m - 1}")

    def neighbors(self, i):
        out = set()
        for a, b in self.edges:
            if a == i:
                out.add(b)
            elif b == i:
                out.add(a)
        return out

    def is_connected(self):
        seen = {0}
        stack = [0]
        while stack:
            node = stack.pop()
            for nb in self.neighbors(node):
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == self.m


def _edge(i, j):
    return (i, j) if i < j else (j, i)


def build_topology(kind, m, seed=0, p=None):
    """Build a connected graph of the requested family.

    kinds: "line", "ring", "complete", "two_agent" (m must be 2), and
    "erdos_renyi" with edge probability ``p``; the random family resamples
    with incremented seed until connected, up to a bounded retry budget.
    """
    if m < 2:
        raise InvalidSize(f"need at least 2 nodes, got {m}")
    if kind == "line":
        edges = {_edge(i, i + 1) for i in range(m - 1)}
    elif kind == "ring":
        edges = {_edge(i, (i + 1) % m) for i in range(m)}
    elif kind == "complete":
        edges = {_edge(i, j) for i in range(m) for j in range(i + 1, m)}
    elif kind == "two_agent":
        if m != 2:
            raise InvalidSize("two_agent topology requires m=2")
        edges = {(0, 1)}
    elif kind == "erdos_renyi":
        if p is None or not 0.0 < p <= 1.0:
            raise InvalidParameter(f"erdos_renyi needs p in (0, 1], got {p}")
        for attempt in range(_ER_RETRY_BUDGET):
            rng = Rng(seed + attempt)
            edges = set()
            for i in range(m):
                for j in range(i + 1, m):
                    if rng.uniform() < p:
                        edges.add((i, j))
            g = Graph(m=m, edges=frozenset(edges))
            if g.is_connected():
                return g
        raise DisconnectedGraph(
            f"no connected sample in {_ER_RETRY_BUDGET} reseeds "
            f"(m={m}, p={p}, seed={seed})"
        )
    else:
        raise InvalidParameter(f"unknown topology kind {kind!r}")
    return Graph(m=m, edges=frozenset(edges))


@dataclass(frozen=True)
class GossipMatrix:
    """Graph-induced symmetric PSD matrix with cached spectral data."""

    matrix: np.ndarray
    lambda2: float
    lambda_max: float
    eigengap: float
    eigen: EigenDecomposition = field(repr=False)

    @property
    def m(self):
        return self.matrix.shape[0]


def laplacian(graph):
    """Combinatorial Laplacian of a connected graph, spectrum attached.

    Raises DisconnectedGraph when lambda_2 falls at or below the numerical
    null-space threshold.
    """
    m = graph.m
    lap = np.zeros((m, m))
    for i, j in graph.edges:
        lap[i, j] = lap[j, i] = -1.0
        lap[i, i] += 1.0
        lap[j, j] += 1.0
    eig = jacobi_eigen(lap)
    lambda2 = float(eig.values[1])
    lambda_max = float(eig.values[-1])
    if lambda2 <= _NULL_EIGENVALUE_TOL:
        raise DisconnectedGraph(f"lambda_2 = {lambda2:.3e} indicates a disconnected graph")
    return GossipMatrix(
        matrix=lap,
        lambda2=lambda2,
        lambda_max=lambda_max,
        eigengap=lambda2 / lambda_max,
        eigen=eig,
    )


def scale_for_chebyshev(gossip):
    """Rescale by 2/(lambda_2 + lambda_max) so the nonzero spectrum is
    centered on 1; the eigengap is unchanged."""
    factor = 2.0 / (gossip.lambda2 + gossip.lambda_max)
    eig = EigenDecomposition(values=gossip.eigen.values * factor, vectors=gossip.eigen.vectors)
    return GossipMatrix(
        matrix=gossip.matrix * factor,
        lambda2=gossip.lambda2 * factor,
        lambda_max=gossip.lambda_max * factor,
        eigengap=gossip.eigengap,
        eigen=eig,
    )


def write_edge_list(graph, path):
    """Text edge list, one 0-based "i j" pair per line."""
    lines = sorted(graph.edges)
    with open(path, "w") as fh:
        for i, j in lines:
            fh.write(f"{i} {j}\n")


def parse_edge_list(text):
    """Graph from edge-list text; node count is 1 + the largest index."""
    edges = set()
    max_node = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected 'i j', got {raw!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer node id in {raw!r}") from None
        if i == j:
            raise ParseError(f"line {lineno}: self-loop at node {i}")
        edges.add(_edge(i, j))
        max_node = max(max_node, i, j)
    if max_node < 1:
        raise ParseError("edge list is empty")
    return Graph(m=max_node + 1, edges=frozenset(edges))


def read_edge_list(path):
    with open(path) as fh:
        return parse_edge_list(fh.read())
