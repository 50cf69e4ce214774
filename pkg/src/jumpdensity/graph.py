"""Weighted finite graphs with positive conductances.

Vertices carry arbitrary hashable labels at the API boundary and are mapped
to dense indices ``0..n-1`` internally; every array in the package is
index-addressed. The adjacency is stored in CSR form with neighbor lists
sorted by index, so CSR positions enumerate the directed edge set in
lexicographic order ``(0,1), (0,2), ..., (1,0), ...`` — that enumeration is
the canonical directed-edge indexing used for crossing counts and currents.
"""

import json

import numpy as np

from .errors import (
    DisconnectedGraph,
    DuplicateEdge,
    JumpdensityError,
    NonPositiveWeight,
    SelfLoop,
    UnknownVertex,
)


class WeightedGraph:
    """Immutable connected graph with symmetric positive edge weights.

    Attributes
    ----------
    labels : tuple
        Vertex labels in index order.
    edges : list of (int, int, float)
        One entry per nonoriented edge, endpoints as dense indices i < j,
        sorted lexicographically.
    indptr, nbr, wts : ndarray
        CSR adjacency; ``wts[p]`` is the conductance of the directed edge
        at CSR position ``p``.
    rates : ndarray
        Total exit rate per vertex (sum of incident conductances),
        accumulated in neighbor order so kernels can rely on the exact
        floating-point value.
    """

    def __init__(self, labels, edges):
        self.labels = tuple(labels)
        self.n = len(self.labels)
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self.index) != self.n:
            raise DuplicateEdge("duplicate vertex label")
        self.edges = sorted(edges)
        self.m = len(self.edges)

        nbrs = [[] for _ in range(self.n)]
        for i, j, w in self.edges:
            nbrs[i].append((j, w))
            nbrs[j].append((i, w))
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        nbr = np.zeros(2 * self.m, dtype=np.int32)
        wts = np.zeros(2 * self.m, dtype=np.float64)
        rates = np.zeros(self.n, dtype=np.float64)
        p = 0
        for i in range(self.n):
            acc = 0.0
            for j, w in sorted(nbrs[i]):
                nbr[p] = j
                wts[p] = w
                acc += w  # sequential sum: kernels reuse this exact value
                p += 1
            rates[i] = acc
            indptr[i + 1] = p
        self.indptr, self.nbr, self.wts, self.rates = indptr, nbr, wts, rates

        # CSR position of each directed edge, and the reversal permutation.
        self.pos = {}
        for i in range(self.n):
            for p in range(indptr[i], indptr[i + 1]):
                self.pos[(i, int(nbr[p]))] = p
        self.reverse_perm = np.array(
            [self.pos[(int(nbr[p]), i)] for i in range(self.n)
             for p in range(indptr[i], indptr[i + 1])],
            dtype=np.int64,
        )
        self.pos_matrix = np.full((self.n, self.n), -1, dtype=np.int64)
        for (i, j), p in self.pos.items():
            self.pos_matrix[i, j] = p

    # -- lookups ---------------------------------------------------------

    def vertex_index(self, label):
        try:
            return self.index[label]
        except KeyError:
            raise UnknownVertex("unknown vertex %r" % (label,)) from None

    def label(self, i):
        return self.labels[i]

    def neighbors(self, i):
        """Neighbor indices of vertex ``i`` in CSR (sorted) order."""
        return self.nbr[self.indptr[i]:self.indptr[i + 1]]

    def weight(self, i, j):
        """Conductance of edge {i, j} (dense indices)."""
        p = self.pos.get((i, j))
        if p is None:
            raise UnknownVertex("no edge (%d, %d)" % (i, j))
        return float(self.wts[p])

    def directed_edges(self):
        """All directed edges (i, j) in canonical (CSR position) order."""
        return [
            (i, int(self.nbr[p]))
            for i in range(self.n)
            for p in range(self.indptr[i], self.indptr[i + 1])
        ]

    def has_edge(self, i, j):
        return (i, j) in self.pos

    @property
    def n_directed(self):
        return 2 * self.m

    def is_tree(self):
        return self.m == self.n - 1

    def __repr__(self):
        return "WeightedGraph(%d vertices, %d edges)" % (self.n, self.m)


def build_graph(vertex_list, edge_list):
    """Validate and build a :class:`WeightedGraph`.

    Parameters
    ----------
    vertex_list : sequence of hashable labels
    edge_list : sequence of (u, v, w)
        Endpoints given by label, w > 0. At most one edge per unordered
        pair, no self-loops, and the result must be connected.
    """
    labels = list(vertex_list)
    index = {lab: i for i, lab in enumerate(labels)}
    seen = set()
    edges = []
    for u, v, w in edge_list:
        if u not in index or v not in index:
            raise UnknownVertex("edge endpoint %r not in vertex list" % ((u, v),))
        i, j = index[u], index[v]
        if i == j:
            raise SelfLoop("self-loop at %r" % (u,))
        if i > j:
            i, j = j, i
        if (i, j) in seen:
            raise DuplicateEdge("duplicate edge {%r, %r}" % (u, v))
        seen.add((i, j))
        w = float(w)
        if not np.isfinite(w) or w <= 0.0:
            raise NonPositiveWeight("weight %r on edge {%r, %r}" % (w, u, v))
        edges.append((i, j, w))

    n = len(labels)
    if n < 2 or not edges:
        raise DisconnectedGraph("need at least 2 vertices joined by an edge")
    # connectivity by BFS over the tentative adjacency
    adj = [[] for _ in range(n)]
    for i, j, _ in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen_v = [False] * n
    stack = [0]
    seen_v[0] = True
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if not seen_v[y]:
                seen_v[y] = True
                stack.append(y)
    if not all(seen_v):
        raise DisconnectedGraph("graph has more than one component")
    return WeightedGraph(labels, edges)


def vertex_rate(g, label):
    """Total exit rate of a vertex: the sum of its incident conductances."""
    return float(g.rates[g.vertex_index(label)])


def graph_from_dict(doc):
    """Build a graph from the JSON document schema.

    Schema: ``{"vertices": ["a", ...], "edges": [{"u": .., "v": .., "w": ..}]}``.
    """
    try:
        vertices = doc["vertices"]
        edges = [(e["u"], e["v"], e["w"]) for e in doc["edges"]]
    except (KeyError, TypeError) as exc:
        raise JumpdensityError("malformed graph document: %s" % exc) from None
    return build_graph(vertices, edges)


def load_graph(path):
    with open(path) as fh:
        return graph_from_dict(json.load(fh))


def graph_to_dict(g):
    return {
        "vertices": list(g.labels),
        "edges": [
            {"u": g.labels[i], "v": g.labels[j], "w": w} for i, j, w in g.edges
        ],
    }
