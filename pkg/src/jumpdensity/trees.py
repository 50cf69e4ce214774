"""Spanning-tree enumeration, matrix-tree determinants, cycle-space lifts.

Exact enumeration is a small-graph feature (the verification harness sums
over all spanning trees and cycling numbers); everything here guards its
combinatorial blow-up with explicit caps and raises GraphTooLarge beyond
them.
"""

import itertools
from math import comb

import numpy as np

from .errors import GraphTooLarge, TreeNotSpanning
from .pathstats import Current, OrientedTree

MAX_ENUM_VERTICES = 10
MAX_ENUM_COMBINATIONS = 2_000_000


def _orient_toward_root(g, edge_subset, root):
    """Parent vector for a set of undirected edges forming a spanning tree,
    oriented toward the root; None if the subset is not a spanning tree."""
    n = g.n
    adj = [[] for _ in range(n)]
    for i, j in edge_subset:
        adj[i].append(j)
        adj[j].append(i)
    parent = np.full(n, -2, dtype=np.int32)
    parent[root] = -1
    stack = [root]
    seen = 1
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if parent[y] == -2:
                parent[y] = x
                seen += 1
                stack.append(y)
    return parent if seen == n else None


def enumerate_spanning_trees(g, root, max_vertices=MAX_ENUM_VERTICES):
    """All spanning trees of g, oriented toward `root`, deterministic order.

    Iterates the (|V|-1)-subsets of the edge list in lexicographic order
    and keeps the acyclic spanning ones.
    """
    if g.n > max_vertices:
        raise GraphTooLarge("%d vertices exceeds enumeration cap %d"
                            % (g.n, max_vertices))
    if comb(g.m, g.n - 1) > MAX_ENUM_COMBINATIONS:
        raise GraphTooLarge("too many edge subsets to enumerate")
    r = g.vertex_index(root)
    trees = []
    pairs = [(i, j) for i, j, _ in g.edges]
    for subset in itertools.combinations(pairs, g.n - 1):
        parent = _orient_toward_root(g, subset, r)
        if parent is not None:
            trees.append(OrientedTree(g, r, parent))
    return trees


def weighted_tree_sum(g, root):
    """Sum over spanning trees of the product of their edge conductances.

    Computed as the principal minor of the weighted Laplacian with the
    root's row and column removed (matrix-tree); for symmetric weights the
    value is root-independent.
    """
    r = g.vertex_index(root)
    lap = laplacian(g)
    keep = [i for i in range(g.n) if i != r]
    return float(np.linalg.det(lap[np.ix_(keep, keep)]))


def laplacian(g):
    """Weighted graph Laplacian: diag(rates) - conductance matrix."""
    lap = np.zeros((g.n, g.n))
    for i, j, w in g.edges:
        lap[i, j] -= w
        lap[j, i] -= w
        lap[i, i] += w
        lap[j, j] += w
    return lap


def killed_tree_sum(g, kappa):
    """Partition function of rooted forests under killing rates.

    ``det(L + diag(kappa))`` sums, over all forests whose every component
    is rooted at a killed vertex, the product of branch conductances times
    the root killing rates. Used to normalize the Wilson tree law.
    """
    kappa = np.asarray(kappa, dtype=np.float64)
    return float(np.linalg.det(laplacian(g) + np.diag(kappa)))


def offtree_edges(g, tree):
    """Nonoriented non-tree edges (i, j), i < j, in canonical order."""
    tree_pairs = {frozenset(e) for e in tree.edges()}
    return [(i, j) for i, j, _ in g.edges if frozenset((i, j)) not in tree_pairs]


def extend_cycling_numbers(g, tree, offtree_values, boundary):
    """Unique current with given off-tree values and unit path divergence.

    Parameters
    ----------
    tree : OrientedTree
        Spanning tree of g; its orientation fixes the leaf-inward solve
        order (values are solved on edges child -> parent).
    offtree_values : sequence of int
        One value per off-tree edge in the order of :func:`offtree_edges`;
        value c on off-tree edge (i, j) means a_ij = c.
    boundary : (label, label)
        Source and sink (i0, i1); the result's divergence is
        +1 at i0, -1 at i1 (zero everywhere when i0 == i1).

    The map from off-tree values to the output is affine: linear in the
    values plus the unit flow along the tree path i0 -> i1.
    """
    if not tree.spans_all():
        raise TreeNotSpanning("cycling-number extension needs a spanning tree")
    off = offtree_edges(g, tree)
    offtree_values = [int(c) for c in offtree_values]
    if len(offtree_values) != len(off):
        raise TreeNotSpanning(
            "expected %d off-tree values, got %d" % (len(off), len(offtree_values)))
    i0 = g.vertex_index(boundary[0])
    i1 = g.vertex_index(boundary[1])

    target = np.zeros(g.n, dtype=np.int64)
    target[i0] += 1
    target[i1] -= 1

    values = np.zeros(g.n_directed, dtype=np.int64)
    net = target.copy()  # divergence still to be carried by tree edges
    for (i, j), c in zip(off, offtree_values):
        values[g.pos[(i, j)]] = c
        values[g.pos[(j, i)]] = -c
        net[i] -= c
        net[j] += c

    # order vertices leaves-first along the tree orientation
    order = []
    children = [[] for _ in range(g.n)]
    for i, j in tree.edges():
        children[j].append(i)
    stack = [tree.root]
    while stack:
        x = stack.pop()
        order.append(x)
        stack.extend(children[x])
    for x in reversed(order):
        p = int(tree.parent[x])
        if p < 0:
            continue
        f = int(net[x])  # flow x -> parent closing x's residual divergence
        values[g.pos[(x, p)]] = f
        values[g.pos[(p, x)]] = -f
        net[x] -= f
        net[p] += f
    if net[tree.root] != 0 or np.any(net[np.arange(g.n) != tree.root]):
        raise AssertionError("divergence solve did not balance")
    return Current(g, values)


def fundamental_cycles(g, tree):
    """One zero-divergence current per off-tree edge (unit on that edge)."""
    off = offtree_edges(g, tree)
    root_label = g.labels[tree.root]
    basis = []
    for m in range(len(off)):
        values = [0] * len(off)
        values[m] = 1
        basis.append(extend_cycling_numbers(
            g, tree, values, (root_label, root_label)))
    return basis
