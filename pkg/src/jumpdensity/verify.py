"""Monte Carlo and enumeration checks of the closed-form densities.

Each check simulates n paths, counts how many realize a target outcome
with local times inside a cell, and compares the empirical frequency
against the numerically integrated density; the discrepancy is reported
as a z-score (Wald standard error from the empirical proportion). Theory
integrals use tensor-product Gauss-Legendre quadrature — 32 nodes per
free dimension by default, ample since the integrands are analytic on
positive cells.

Cells are boxes over the |V|-1 free local-time coordinates; under a fixed
horizon the remaining coordinate (the endpoint's, by default) is
determined by the horizon, and for inverse-local-time stops the stopped
site's coordinate is pinned to the budget.
"""

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .density import (
    NEG_INF,
    JointOutcome,
    as_local_time_vector,
    prop1_log_density,
    ray_knight_tree_density,
    theorem1_evaluator,
)
from .errors import (
    GraphTooLarge,
    InvalidTarget,
    JumpdensityError,
    NotATree,
)
from .pathstats import Current, CrossingCounts, OrientedTree
from .simulate import FixedTime, InverseLocalTime, batch_statistics
from .trees import enumerate_spanning_trees, extend_cycling_numbers, offtree_edges

DEFAULT_Z_THRESHOLD = 4.0
DEFAULT_QUAD_NODES = 32
DEFAULT_CYCLE_TRUNCATION = 8


@dataclass(frozen=True)
class LocalTimeCell:
    """Product cell over free local-time coordinates.

    ``bounds`` maps vertex labels to half-open intervals [lo, hi), lo > 0;
    ``dependent`` names the coordinate determined by the constraint (the
    endpoint i1 when omitted).
    """
    bounds: dict
    dependent: object = None

    def __post_init__(self):
        for lab, (lo, hi) in self.bounds.items():
            if not (0 < lo < hi):
                raise JumpdensityError(
                    "cell bounds for %r must satisfy 0 < lo < hi" % (lab,))


@dataclass
class VerificationReport:
    """Outcome of one Monte Carlo check."""
    n_paths: int
    n_hits: int
    empirical_prob: float
    std_error: float
    theory_prob: float
    z_score: float
    passed: bool
    z_threshold: float
    details: dict = field(default_factory=dict)

    def to_dict(self):
        d = {
            "n_paths": self.n_paths,
            "n_hits": self.n_hits,
            "empirical_prob": self.empirical_prob,
            "std_error": self.std_error,
            "theory_prob": self.theory_prob,
            "z_score": self.z_score,
            "passed": self.passed,
            "z_threshold": self.z_threshold,
        }
        d.update(self.details)
        return d


def z_score(n, hits, theory):
    """Wald z for an observed proportion against a theoretical one."""
    p = hits / n
    se = math.sqrt(p * (1.0 - p) / n)
    if se == 0.0:
        # no dispersion observed; fall back to the theoretical variance
        se = math.sqrt(max(theory, 0.0) * (1.0 - min(theory, 1.0)) / n)
    if se == 0.0:
        return 0.0 if p == theory else math.inf
    return (p - theory) / se


def _make_report(n, hits, theory, z_threshold, details):
    p = hits / n
    se = math.sqrt(p * (1.0 - p) / n)
    z = z_score(n, hits, theory)
    return VerificationReport(
        n_paths=int(n), n_hits=int(hits), empirical_prob=p, std_error=se,
        theory_prob=float(theory), z_score=float(z),
        passed=bool(abs(z) <= z_threshold), z_threshold=float(z_threshold),
        details=details)


# -- target coercion -------------------------------------------------------


def as_tree(g, spec):
    """Coerce a target tree spec to an OrientedTree.

    Accepts an OrientedTree or {"root": label, "edges": [[u, v], ...]}.
    """
    if isinstance(spec, OrientedTree):
        return spec
    try:
        return OrientedTree.from_edges(g, spec["root"], spec["edges"])
    except (JumpdensityError, KeyError, TypeError) as exc:
        raise InvalidTarget("invalid tree target: %s" % exc) from None


def as_current(g, spec):
    """Coerce {(u, v): int} (one orientation per edge) to a Current."""
    if isinstance(spec, Current):
        return spec
    values = np.zeros(g.n_directed, dtype=np.int64)
    try:
        for (u, v), c in spec.items():
            i, j = g.vertex_index(u), g.vertex_index(v)
            values[g.pos[(i, j)]] = int(c)
            values[g.pos[(j, i)]] = -int(c)
        return Current(g, values)
    except (JumpdensityError, KeyError, TypeError) as exc:
        raise InvalidTarget("invalid current target: %s" % exc) from None


def as_counts(g, spec):
    """Coerce {(u, v): int >= 0} to CrossingCounts (absent pairs are 0)."""
    if isinstance(spec, CrossingCounts):
        return spec
    counts = np.zeros(g.n_directed, dtype=np.int64)
    try:
        for (u, v), c in spec.items():
            if int(c) < 0:
                raise InvalidTarget("crossing counts must be >= 0")
            counts[g.pos[(g.vertex_index(u), g.vertex_index(v))]] = int(c)
        return CrossingCounts(g, counts)
    except (JumpdensityError, KeyError, TypeError) as exc:
        raise InvalidTarget("invalid counts target: %s" % exc) from None


def _check_target(g, i0, tree, divergence_values):
    """Shared hypothesis checks; returns (i0_index, i1_index)."""
    i0_idx = g.vertex_index(i0)
    if not tree.spans_all():
        raise InvalidTarget("target tree must span every vertex")
    i1_idx = tree.root
    want = np.zeros(g.n, dtype=np.int64)
    want[i0_idx] += 1
    want[i1_idx] -= 1
    if not np.array_equal(divergence_values, want):
        raise InvalidTarget(
            "target divergence must be +1 at i0 and -1 at the tree root")
    return i0_idx, i1_idx


# -- quadrature ------------------------------------------------------------


@lru_cache(maxsize=None)
def _gl(n):
    x, w = leggauss(n)
    return x, w


def integrate_box(f, bounds, n_nodes=DEFAULT_QUAD_NODES):
    """Tensor-product Gauss-Legendre integral of f over a box.

    ``bounds`` is a list of (lo, hi); f takes the coordinate tuple.
    """
    x, w = _gl(n_nodes)
    axes = []
    for lo, hi in bounds:
        half = 0.5 * (hi - lo)
        axes.append((lo + half * (x + 1.0), half * w))
    total = 0.0
    for idx in itertools.product(range(n_nodes), repeat=len(bounds)):
        pt = tuple(axes[d][0][i] for d, i in enumerate(idx))
        wt = 1.0
        for d, i in enumerate(idx):
            wt *= axes[d][1][i]
        total += wt * f(pt)
    return total


def integrate_simplex(f_ell, g, sigma, dependent_idx, n_nodes=DEFAULT_QUAD_NODES):
    """Integrate f over the full open simplex sum(ell) = sigma, ell > 0.

    ``f_ell`` takes the complete local-time vector; the dependent
    coordinate absorbs whatever the free ones leave of sigma.
    """
    free = [i for i in range(g.n) if i != dependent_idx]
    x, w = _gl(n_nodes)
    ell = np.empty(g.n, dtype=np.float64)

    def rec(d, budget):
        if d == len(free):
            ell[dependent_idx] = budget
            return f_ell(ell)
        half = 0.5 * budget
        total = 0.0
        for xi, wi in zip(x, w):
            v = half * (xi + 1.0)
            ell[free[d]] = v
            total += half * wi * rec(d + 1, budget - v)
        return total

    return rec(0, sigma)


def _exp(logv):
    return 0.0 if logv == NEG_INF else math.exp(logv)


def _cell_free_bounds(g, cell, dependent_idx):
    """Bounds list in dense order of the free vertices; validates cover."""
    free = [i for i in range(g.n) if i != dependent_idx]
    want = {g.labels[i] for i in free}
    have = set(cell.bounds)
    if want != have:
        raise InvalidTarget(
            "cell must bound exactly the free coordinates %s" % sorted(want, key=str))
    return free, [tuple(cell.bounds[g.labels[i]]) for i in free]


def _cell_hits_mask(ell_rows, free, bounds):
    mask = np.ones(len(ell_rows), dtype=bool)
    for i, (lo, hi) in zip(free, bounds):
        col = ell_rows[:, i]
        mask &= (col >= lo) & (col < hi)
    return mask


def _resolve_dependent(g, cell, default_idx):
    if cell.dependent is None:
        return default_idx
    return g.vertex_index(cell.dependent)


# -- the checks ------------------------------------------------------------


def verify_theorem1(g, i0, sigma, current, tree, cell, n, seed, *,
                    z_threshold=DEFAULT_Z_THRESHOLD,
                    n_quad=DEFAULT_QUAD_NODES, threads=1):
    """Monte Carlo check of the joint (current, local times, tree) density.

    Empirical: fraction of n paths started at i0 and frozen at time sigma
    whose antisymmetrized crossings and last-exit tree equal the target
    and whose free local times fall in the cell. Theory: the density
    integrated over the cell.
    """
    tree = as_tree(g, tree)
    current = as_current(g, current)
    i0_idx, i1_idx = _check_target(g, i0, tree, current.divergence)
    dep = _resolve_dependent(g, cell, i1_idx)
    free, bounds = _cell_free_bounds(g, cell, dep)

    log_f = theorem1_evaluator(g, current, tree)
    ell = np.empty(g.n, dtype=np.float64)

    def density_at(pt):
        rest = sigma - sum(pt)
        if rest <= 0.0:
            return 0.0
        ell[free] = pt
        ell[dep] = rest
        return _exp(log_f(ell))

    theory = integrate_box(density_at, bounds, n_quad)

    stats = batch_statistics(g, g.labels[i0_idx], FixedTime(sigma), seed, n,
                             threads=threads)
    a_emp = stats["k"] - stats["k"][:, g.reverse_perm]
    mask = (stats["final"] == i1_idx)
    mask &= np.all(stats["parent"] == tree.parent[None, :], axis=1)
    mask &= np.all(a_emp == current.values[None, :], axis=1)
    mask &= _cell_hits_mask(stats["ell"], free, bounds)
    hits = int(mask.sum())
    return _make_report(n, hits, theory, z_threshold, {
        "check": "theorem1", "i0": i0, "i1": g.labels[i1_idx],
        "sigma": sigma, "seed": seed})


def verify_prop1(g, i0, sigma, counts, tree, cell, n, seed, *,
                 z_threshold=DEFAULT_Z_THRESHOLD,
                 n_quad=DEFAULT_QUAD_NODES, threads=1):
    """Monte Carlo check of the exact-crossing-counts density."""
    tree = as_tree(g, tree)
    counts = as_counts(g, counts)
    a = Current(g, counts.counts - counts.counts[g.reverse_perm])
    i0_idx, i1_idx = _check_target(g, i0, tree, a.divergence)
    dep = _resolve_dependent(g, cell, i1_idx)
    free, bounds = _cell_free_bounds(g, cell, dep)

    ell = np.empty(g.n, dtype=np.float64)

    def density_at(pt):
        rest = sigma - sum(pt)
        if rest <= 0.0:
            return 0.0
        ell[free] = pt
        ell[dep] = rest
        outcome = JointOutcome(g, i0, g.labels[i1_idx], ell.copy(), tree,
                               counts=counts)
        return _exp(prop1_log_density(g, outcome))

    theory = integrate_box(density_at, bounds, n_quad)

    stats = batch_statistics(g, g.labels[i0_idx], FixedTime(sigma), seed, n,
                             threads=threads)
    mask = (stats["final"] == i1_idx)
    mask &= np.all(stats["parent"] == tree.parent[None, :], axis=1)
    mask &= np.all(stats["k"] == counts.counts[None, :], axis=1)
    mask &= _cell_hits_mask(stats["ell"], free, bounds)
    hits = int(mask.sum())
    return _make_report(n, hits, theory, z_threshold, {
        "check": "prop1", "i0": i0, "i1": g.labels[i1_idx],
        "sigma": sigma, "seed": seed})


def verify_ray_knight(g, i0, u, cell, n, seed, *,
                      z_threshold=DEFAULT_Z_THRESHOLD,
                      n_quad=DEFAULT_QUAD_NODES, threads=1):
    """Monte Carlo check of the stopped local-time density on a tree graph.

    Paths run until the local time at i0 reaches u; the empirical event is
    "every vertex visited and all off-site local times in the cell".
    """
    if not g.is_tree():
        raise NotATree("this check needs a tree graph")
    i0_idx = g.vertex_index(i0)
    free, bounds = _cell_free_bounds(g, cell, i0_idx)

    def density_at(pt):
        rest = {g.labels[i]: v for i, v in zip(free, pt)}
        return _exp(ray_knight_tree_density(g, i0, u, rest))

    theory = integrate_box(density_at, bounds, n_quad)

    stats = batch_statistics(g, i0, InverseLocalTime(i0, u), seed, n,
                             threads=threads)
    mask = np.all(stats["ell"] > 0.0, axis=1)
    mask &= _cell_hits_mask(stats["ell"], free, bounds)
    hits = int(mask.sum())
    return _make_report(n, hits, theory, z_threshold, {
        "check": "ray_knight", "i0": i0, "u": u, "seed": seed})


def _tree_current_terms(g, i0, i1, cycle_truncation):
    """Every (tree, current) pair with |off-tree coordinates| <= M."""
    if g.n > 4:
        raise GraphTooLarge("exhaustive tree/current sums support <= 4 vertices")
    terms = []
    for tree in enumerate_spanning_trees(g, i1):
        dim = len(offtree_edges(g, tree))
        rng = range(-cycle_truncation, cycle_truncation + 1)
        for assignment in itertools.product(rng, repeat=dim):
            current = extend_cycling_numbers(g, tree, assignment, (i0, i1))
            terms.append((tree, current))
    return terms


def verify_total_mass(g, i0, i1, sigma, n, seed, *,
                      cycle_truncation=DEFAULT_CYCLE_TRUNCATION,
                      z_threshold=DEFAULT_Z_THRESHOLD,
                      n_quad=DEFAULT_QUAD_NODES, threads=1):
    """Check that the density sums to P(endpoint = i1, all vertices seen).

    Theory: the joint density summed over every spanning tree rooted at i1
    and every current within the cycling-number truncation, integrated
    over the whole open simplex. Empirical: fraction of paths ending at i1
    with every vertex visited.
    """
    i0_idx = g.vertex_index(i0)
    i1_idx = g.vertex_index(i1)
    theory = 0.0
    for tree, current in _tree_current_terms(g, i0, i1, cycle_truncation):
        log_f = theorem1_evaluator(g, current, tree)
        theory += integrate_simplex(lambda ell: _exp(log_f(ell)),
                                    g, sigma, i1_idx, n_quad)

    stats = batch_statistics(g, g.labels[i0_idx], FixedTime(sigma), seed, n,
                             threads=threads)
    mask = (stats["final"] == i1_idx)
    mask &= np.all(stats["ell"] > 0.0, axis=1)
    hits = int(mask.sum())
    return _make_report(n, hits, theory, z_threshold, {
        "check": "total_mass", "i0": i0, "i1": i1, "sigma": sigma,
        "seed": seed, "cycle_truncation": cycle_truncation})


def marginal_evaluator(g, i0, i1, cycle_truncation=DEFAULT_CYCLE_TRUNCATION):
    """Callable: full positive local-time vector -> log marginal density.

    The marginal (over trees and currents) of the joint density: the
    density of the local times on the event "path from i0 sits at i1 with
    every vertex visited", with respect to |V|-1 free coordinates; the
    horizon is implied by the local times' sum.
    """
    terms = [(theorem1_evaluator(g, current, tree))
             for tree, current in _tree_current_terms(g, i0, i1,
                                                      cycle_truncation)]

    def log_marginal(ell):
        ell = as_local_time_vector(g, ell)
        values = np.array([f(ell) for f in terms])
        m = values.max()
        if m == NEG_INF:
            return NEG_INF
        return float(m + np.log(np.sum(np.exp(values - m))))

    return log_marginal


def marginal_local_time_density(g, i0, i1, ell,
                                cycle_truncation=DEFAULT_CYCLE_TRUNCATION):
    """Log density of the local times alone (summed over trees/currents)."""
    return marginal_evaluator(g, i0, i1, cycle_truncation)(ell)
