"""Path functionals: local times, crossing counts, currents, last-exit tree.

All extractors are pure functions of the event list. Crossing counts and
currents are vectors over the canonical directed-edge order of the graph
(CSR positions); currents are antisymmetric integer edge functions whose
per-vertex divergence is the net outflow.

The last-exit tree collects, for every visited vertex except the endpoint,
the edge of its final departure; it is rooted at the endpoint and spans
exactly the visited vertex set. A path with no jumps yields the
single-vertex tree at its start.
"""

from dataclasses import dataclass

import numpy as np

from .errors import JumpdensityError, TreeNotSpanning


@dataclass
class LocalTimes:
    """Occupation time per vertex, indexed densely."""
    graph: object
    values: np.ndarray

    def by_label(self):
        return {lab: float(v) for lab, v in zip(self.graph.labels, self.values)}

    def total(self):
        return float(self.values.sum())


@dataclass
class CrossingCounts:
    """Number of jumps per directed edge, canonical order."""
    graph: object
    counts: np.ndarray

    def get(self, u, v):
        g = self.graph
        return int(self.counts[g.pos[(g.vertex_index(u), g.vertex_index(v))]])

    def total(self):
        return int(self.counts.sum())


@dataclass
class Current:
    """Antisymmetric integer edge function (an element of the flow lattice)."""
    graph: object
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int64)
        if not np.array_equal(self.values,
                              -self.values[self.graph.reverse_perm]):
            raise JumpdensityError("current is not antisymmetric")

    def get(self, u, v):
        g = self.graph
        return int(self.values[g.pos[(g.vertex_index(u), g.vertex_index(v))]])

    @property
    def divergence(self):
        """Net outflow per vertex: div_i = sum_j a_ij."""
        g = self.graph
        return np.array(
            [self.values[g.indptr[i]:g.indptr[i + 1]].sum() for i in range(g.n)],
            dtype=np.int64)

    def __eq__(self, other):
        return (isinstance(other, Current)
                and self.graph is other.graph
                and np.array_equal(self.values, other.values))


class OrientedTree:
    """Rooted oriented tree stored as a parent vector.

    ``parent[i]`` is the head of the unique edge out of i, -1 at the root,
    and -2 for vertices outside the tree (a last-exit tree spans only the
    visited set). Edges must exist in the graph and the parent structure
    must be acyclic.
    """

    def __init__(self, graph, root, parent):
        self.graph = graph
        self.root = int(root)
        self.parent = np.asarray(parent, dtype=np.int32)
        if self.parent.shape != (graph.n,):
            raise JumpdensityError("parent vector has wrong length")
        if self.parent[self.root] != -1:
            raise JumpdensityError("root must have no outgoing tree edge")
        # each tree vertex must reach the root without revisiting anything
        for i in range(graph.n):
            p = self.parent[i]
            if p == -2:
                continue
            if p >= 0 and not graph.has_edge(i, int(p)):
                raise JumpdensityError("tree edge (%d, %d) not in graph" % (i, p))
            seen = 0
            x = i
            while self.parent[x] != -1:
                x = int(self.parent[x])
                if x < 0:
                    raise JumpdensityError("tree vertex disconnected from root")
                seen += 1
                if seen > graph.n:
                    raise JumpdensityError("cycle in tree parent vector")

    @classmethod
    def from_edges(cls, graph, root, edges, labels=True):
        """Build from a root and (tail, head) pairs; labels or indices."""
        parent = np.full(graph.n, -2, dtype=np.int32)
        r = graph.vertex_index(root) if labels else int(root)
        parent[r] = -1
        for u, v in edges:
            i = graph.vertex_index(u) if labels else int(u)
            j = graph.vertex_index(v) if labels else int(v)
            if parent[i] != -2:
                raise JumpdensityError("vertex %d has two outgoing tree edges" % i)
            parent[i] = j
        return cls(graph, r, parent)

    def edges(self):
        """Directed tree edges (tail, head) as dense index pairs."""
        return {(i, int(p)) for i, p in enumerate(self.parent) if p >= 0}

    def vertex_set(self):
        return {i for i, p in enumerate(self.parent) if p != -2}

    def spans_all(self):
        return bool(np.all(self.parent != -2))

    def in_degrees(self):
        deg = np.zeros(self.graph.n, dtype=np.int64)
        for _, j in self.edges():
            deg[j] += 1
        return deg

    def __eq__(self, other):
        return (isinstance(other, OrientedTree)
                and self.root == other.root
                and np.array_equal(self.parent, other.parent))

    def __hash__(self):
        return hash((self.root, self.parent.tobytes()))

    def __repr__(self):
        g = self.graph
        e = sorted(self.edges())
        return "OrientedTree(root=%r, edges=%s)" % (
            g.labels[self.root],
            [(g.labels[i], g.labels[j]) for i, j in e],
        )


# -- extractors -----------------------------------------------------------


def local_times(path):
    """Occupation time of each vertex up to the horizon."""
    g = path.graph
    values = np.zeros(g.n, dtype=np.float64)
    bounds = np.concatenate(([0.0], path.times, [path.horizon]))
    occupants = np.concatenate(([path.start], path.targets)).astype(np.int64)
    np.add.at(values, occupants, np.diff(bounds))
    return LocalTimes(g, values)


def crossings(path):
    """Jump count per directed edge."""
    g = path.graph
    counts = np.zeros(g.n_directed, dtype=np.int64)
    if path.n_events:
        src = np.concatenate(([path.start], path.targets[:-1])).astype(np.int64)
        pos = g.pos_matrix[src, path.targets]
        np.add.at(counts, pos, 1)
    return CrossingCounts(g, counts)


def current_of(k):
    """Antisymmetrized crossings: a_ij = k_ij - k_ji."""
    return Current(k.graph, k.counts - k.counts[k.graph.reverse_perm])


def last_exit_tree(path):
    """Tree of final departure edges, rooted at the endpoint.

    One backward pass over the events: scanning from the end, the first
    departure seen from each vertex is its last one; the endpoint is
    marked first so none of its departures count.
    """
    g = path.graph
    parent = np.full(g.n, -2, dtype=np.int32)
    parent[path.final_state] = -1
    src = np.concatenate(([path.start], path.targets[:-1])).astype(np.int64)
    for m in range(path.n_events - 1, -1, -1):
        i = src[m]
        if parent[i] == -2:
            parent[i] = path.targets[m]
    return OrientedTree(g, path.final_state, parent)


def tilde_current(a, tree):
    """Current minus the unit flow of a spanning oriented tree.

    Subtracts 1 on each tree edge and adds 1 on its reversal; the result's
    divergence controls the half-integer local-time powers in the joint
    density. Requires the tree to span the whole graph.
    """
    g = a.graph
    if not tree.spans_all():
        raise TreeNotSpanning("tilde transform needs a spanning tree")
    values = a.values.copy()
    for i, j in tree.edges():
        values[g.pos[(i, j)]] -= 1
        values[g.pos[(j, i)]] += 1
    return Current(g, values)


def path_statistics(path):
    """All three functionals of one path, as a dict."""
    k = crossings(path)
    return {
        "ell": local_times(path),
        "k": k,
        "a": current_of(k),
        "tree": last_exit_tree(path),
    }
