"""Closed-form joint densities of path functionals, in log scale.

Three evaluators share one convention: values are natural logs, and
``-inf`` is the zero-density sentinel (it propagates through sums and is
exponentiated to 0 at API boundaries).

* :func:`theorem1_log_density` — joint density of (current, local times,
  last-exit tree) for a fixed-horizon path from i0 ending at i1. Product
  of a Bessel factor per edge, the tree's conductances, and half-integer
  local-time powers driven by the tilde transform of the current.
* :func:`prop1_log_density` — joint density at exact crossing counts k;
  pure exponential/factorial terms, no Bessel. Summing it over all k with
  a fixed antisymmetrization recovers the first evaluator; that summation
  (:func:`sum_prop1_over_k`) is kept as an independent numerical oracle.
* :func:`ray_knight_tree_density` — local-time density on a tree graph
  stopped at an inverse local time, where tree and current are forced.

Measure convention: under a fixed horizon sigma the local times sum to
sigma, so densities are taken with respect to Lebesgue measure on any
|V|-1 of the coordinates (the choice is a unit-Jacobian shear; verify
integrates over the free coordinates with the dropped one determined).
For the inverse-local-time rule the stopped site's coordinate is pinned
to the budget and the other |V|-1 coordinates are free.
"""

import math
from dataclasses import dataclass
from functools import reduce
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .bessel import log_bessel_i
from .errors import GraphTooLarge, InvalidOutcome, NotATree
from .pathstats import CrossingCounts, Current, OrientedTree, tilde_current

DEFAULT_TRUNCATION = 60
GRID_AUTO_LIMIT = 1 << 24
GRID_HARD_LIMIT = 1 << 27

NEG_INF = float("-inf")


def as_local_time_vector(g, ell):
    """Normalize dict-by-label or dense sequence to a float array."""
    if isinstance(ell, dict):
        try:
            vec = np.array([float(ell[lab]) for lab in g.labels])
        except KeyError as exc:
            raise InvalidOutcome("missing local time for vertex %r" % exc.args)
        return vec
    vec = np.asarray(ell, dtype=np.float64)
    if vec.shape != (g.n,):
        raise InvalidOutcome("local-time vector must have length %d" % g.n)
    return vec


@dataclass
class JointOutcome:
    """A (local times, tree, current-or-counts) triple satisfying the
    density hypotheses; validated on construction.

    ``ell`` must be strictly positive, ``tree`` must span the graph with
    root i1, and the current (or the antisymmetrized counts) must have
    divergence +1 at i0, -1 at i1.
    """
    graph: object
    i0: object
    i1: object
    ell: np.ndarray
    tree: OrientedTree
    current: Optional[Current] = None
    counts: Optional[CrossingCounts] = None

    def __post_init__(self):
        g = self.graph
        self.ell = as_local_time_vector(g, self.ell)
        if not np.all(self.ell > 0):
            raise InvalidOutcome("all local times must be strictly positive")
        if (self.current is None) == (self.counts is None):
            raise InvalidOutcome("provide exactly one of current, counts")
        i0 = g.vertex_index(self.i0)
        i1 = g.vertex_index(self.i1)
        if not self.tree.spans_all():
            raise InvalidOutcome("last-exit tree must span every vertex")
        if self.tree.root != i1:
            raise InvalidOutcome("tree root must be the endpoint i1")
        if self.counts is not None:
            if np.any(self.counts.counts < 0):
                raise InvalidOutcome("crossing counts must be nonnegative")
            div = (self.counts.counts
                   - self.counts.counts[g.reverse_perm])
            a = Current(g, div)
            div = a.divergence
        else:
            div = self.current.divergence
        want = np.zeros(g.n, dtype=np.int64)
        want[i0] += 1
        want[i1] -= 1
        if not np.array_equal(div, want):
            raise InvalidOutcome(
                "divergence must be +1 at i0 and -1 at i1 (unit path flow)")

    @property
    def i0_index(self):
        return self.graph.vertex_index(self.i0)

    @property
    def i1_index(self):
        return self.graph.vertex_index(self.i1)


def _holding_term(g, ell):
    return -float(np.dot(g.rates, ell))


def theorem1_evaluator(g, current, tree):
    """Precompute the local-time-independent parts of the joint density
    and return a callable mapping a positive local-time vector to the log
    density. Used by the verification integrals, which evaluate the same
    (current, tree) target at thousands of quadrature nodes.
    """
    tilde = tilde_current(current, tree)
    orders = [int(tilde.values[g.pos[(i, j)]]) for i, j, _ in g.edges]
    tree_log_w = sum(math.log(g.wts[g.pos[e]]) for e in tree.edges())
    half_div = 0.5 * tilde.divergence.astype(np.float64)
    edge_list = g.edges

    def log_density(ell):
        logv = -float(np.dot(g.rates, ell)) + tree_log_w
        for (i, j, w), nu in zip(edge_list, orders):
            logv += log_bessel_i(nu, 2.0 * w * math.sqrt(ell[i] * ell[j]))
        return logv + float(np.dot(half_div, np.log(ell)))

    return log_density


def theorem1_log_density(g, outcome):
    """Log joint density of (current, local times in (l, l+dl), tree).

    exp of the result is  e^{-sum_i W_i l_i}
    * prod_{edges {i,j}} I_{t_ij}(2 W_ij sqrt(l_i l_j))
    * prod_{tree edges (i,j)} W_ij * prod_i l_i^{t_i / 2},
    where t is the tilde transform of the outcome's current.
    """
    if outcome.current is None:
        raise InvalidOutcome("this evaluator needs a current outcome")
    return theorem1_evaluator(g, outcome.current, outcome.tree)(outcome.ell)


def prop1_log_density(g, outcome):
    """Log joint density at exact crossing counts.

    exp of the result is  e^{-sum_i W_i l_i}
    * prod_{directed ij} (W_ij l_i)^{k_ij} / k_ij!
    * prod_{tree edges (i,j)} k_ij / l_i.
    Zero (sentinel) whenever a tree edge has no crossing: the last exit
    from a vertex needs at least one traversal of its tree edge.
    """
    if outcome.counts is None:
        raise InvalidOutcome("this evaluator needs a counts outcome")
    ell = outcome.ell
    counts = outcome.counts.counts
    logv = _holding_term(g, ell)
    for (i, j), p in g.pos.items():
        kij = int(counts[p])
        if kij:
            logv += kij * math.log(g.wts[p] * ell[i]) - math.lgamma(kij + 1)
    for i, j in outcome.tree.edges():
        kij = int(counts[g.pos[(i, j)]])
        if kij == 0:
            return NEG_INF
        logv += math.log(kij) - math.log(ell[i])
    return logv


def _logsumexp(arr):
    m = float(np.max(arr))
    if m == NEG_INF:
        return NEG_INF
    return m + math.log(float(np.sum(np.exp(arr - m))))


def _positive_orientation(g, current):
    """One directed edge per nonoriented edge with a_ij >= 0 (ties: i < j)."""
    oriented = []
    for i, j, w in g.edges:
        a = int(current.values[g.pos[(i, j)]])
        if a >= 0:
            oriented.append((i, j, w, a))
        else:
            oriented.append((j, i, w, -a))
    return oriented


def sum_prop1_over_k(g, outcome, truncation=DEFAULT_TRUNCATION, method="auto"):
    """Sum the exact-counts density over all counts with a given current.

    For each edge, oriented so the current is nonnegative, the reverse
    count ranges over 0..truncation and the forward count is reverse +
    current. The total over the resulting product grid is accumulated by
    log-sum-exp. Converges (from below) to :func:`theorem1_log_density`
    as the truncation grows; this is the series-consistency oracle.

    method: "grid" materializes the full product grid, "edgewise" sums
    each edge's one-dimensional series (the grid sum factorizes exactly;
    both orders agree to rounding). "auto" uses the grid when it fits.
    """
    if outcome.current is None:
        raise InvalidOutcome("this evaluator needs a current outcome")
    if truncation < 0:
        raise InvalidOutcome("truncation must be >= 0")
    ell = outcome.ell
    tree_edges = outcome.tree.edges()
    M = int(truncation)
    m = np.arange(M + 1)
    lnf = gammaln(m + 1)

    per_edge = []
    for i, j, w, a in _positive_orientation(g, outcome.current):
        k_fwd = m + a
        t = (k_fwd * math.log(w * ell[i]) - gammaln(k_fwd + 1)
             + m * math.log(w * ell[j]) - lnf)
        with np.errstate(divide="ignore"):
            if (i, j) in tree_edges:
                t = t + np.log(k_fwd) - math.log(ell[i])
            if (j, i) in tree_edges:
                t = t + np.log(m) - math.log(ell[j])
        per_edge.append(t)

    base = _holding_term(g, ell)
    grid_size = (M + 1) ** len(per_edge)
    if method == "auto":
        method = "grid" if grid_size <= GRID_AUTO_LIMIT else "edgewise"
    if method == "grid":
        if grid_size > GRID_HARD_LIMIT:
            raise GraphTooLarge(
                "product grid of %d points is beyond the grid method"
                % grid_size)
        grid = reduce(lambda acc, t: np.add.outer(acc, t), per_edge)
        return base + _logsumexp(grid)
    if method == "edgewise":
        total = base
        for t in per_edge:
            total += _logsumexp(t)
        return total
    raise ValueError("unknown method %r" % (method,))


def stopped_tree_orientation(g, i0_index):
    """Parent vector of a tree graph oriented toward i0."""
    parent = np.full(g.n, -2, dtype=np.int32)
    parent[i0_index] = -1
    stack = [i0_index]
    while stack:
        x = stack.pop()
        for y in g.neighbors(x):
            y = int(y)
            if parent[y] == -2:
                parent[y] = x
                stack.append(y)
    return parent


def ray_knight_tree_density(g, i0, u, ell_rest):
    """Log density of the off-site local times on a tree graph stopped at
    an inverse local time.

    The path starts and stops at i0 with its local time pinned to u; on a
    tree the last-exit tree is forced (the tree oriented toward i0) and
    the current is zero, so on the all-vertices-visited event the joint
    density collapses to, per edge, W_ij I_1(2 W_ij sqrt(l_i l_j)), times
    the holding exponential and the local-time powers
    prod_i l_i^{(c_i - [i != i0]) / 2} with c_i the child count toward i0.
    (The power factor makes the 2-vertex case integrate to the probability
    of visiting the far vertex, and telescopes along chains exactly as the
    squared-Bessel transition density does.)

    ``ell_rest``: local times of the vertices other than i0, as a
    dict by label or a sequence in dense order with i0 skipped.
    """
    if not g.is_tree():
        raise NotATree("inverse-local-time density needs a tree graph")
    if not u > 0:
        raise InvalidOutcome("budget u must be > 0")
    r = g.vertex_index(i0)
    ell = np.empty(g.n, dtype=np.float64)
    ell[r] = u
    if isinstance(ell_rest, dict):
        for lab, v in ell_rest.items():
            i = g.vertex_index(lab)
            if i == r:
                raise InvalidOutcome("local time at i0 is pinned to u")
            ell[i] = float(v)
        if len(ell_rest) != g.n - 1:
            raise InvalidOutcome("need local times for every vertex but i0")
    else:
        rest = np.asarray(ell_rest, dtype=np.float64)
        if rest.shape != (g.n - 1,):
            raise InvalidOutcome("need %d off-site local times" % (g.n - 1))
        ell[np.arange(g.n) != r] = rest
    if not np.all(ell > 0):
        raise InvalidOutcome("all local times must be strictly positive")

    parent = stopped_tree_orientation(g, r)
    children = np.zeros(g.n, dtype=np.int64)
    for x in range(g.n):
        if parent[x] >= 0:
            children[parent[x]] += 1

    logv = _holding_term(g, ell)
    for i, j, w in g.edges:
        logv += math.log(w) + log_bessel_i(1, 2.0 * w * math.sqrt(ell[i] * ell[j]))
    half_powers = children - 1
    half_powers[r] += 1
    logv += 0.5 * float(np.dot(half_powers, np.log(ell)))
    return logv
