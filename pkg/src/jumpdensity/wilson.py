"""Loop-erased walk sampling of rooted forests under killing.

Killing is a per-vertex rate to an implicit cemetery state: at vertex i
the walk holds at rate W_i + kappa_i and exits to the cemetery with
probability kappa_i / (W_i + kappa_i). Successive loop-erased chains are
started from the first uncovered vertex of a fixed order and stopped on
absorption or on hitting previously laid branches; the branch union is a
spanning forest of the graph whose components are rooted at killed
vertices, and the chronologically erased loops form the loop ensemble.

The forest law is proportional to the product of branch conductances and
root killing rates, normalized by det(L + diag(kappa)); `tree_law_check`
tests that empirically by chi-square against exact enumeration.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .errors import GraphTooLarge, JumpdensityError
from .pathstats import Current
from .rng import XoshiroStream
from .trees import killed_tree_sum

MAX_FOREST_VERTICES = 5


@dataclass
class KilledGraph:
    """A weighted graph plus nonnegative killing rates, not all zero."""
    graph: object
    kappa: np.ndarray

    def __post_init__(self):
        g = self.graph
        if isinstance(self.kappa, dict):
            self.kappa = np.array(
                [float(self.kappa.get(lab, 0.0)) for lab in g.labels])
        else:
            self.kappa = np.asarray(self.kappa, dtype=np.float64)
        if self.kappa.shape != (g.n,):
            raise JumpdensityError("need one killing rate per vertex")
        if np.any(self.kappa < 0) or not np.any(self.kappa > 0):
            raise JumpdensityError(
                "killing rates must be >= 0 with at least one > 0")
        self.total_rates = g.rates + self.kappa


@dataclass
class WilsonOutput:
    """One forest sample: parents (-1 = absorbed root), erased loops as
    closed vertex walks (first == last), and occupation times summed over
    all stages (including time later erased)."""
    graph: object
    parent: np.ndarray
    loops: list
    local_times: np.ndarray
    stage_local_times: list = field(default_factory=list)

    def branch_edges(self):
        return {(i, int(p)) for i, p in enumerate(self.parent) if p >= 0}

    def roots(self):
        return {i for i, p in enumerate(self.parent) if p == -1}

    def is_spanning_forest(self):
        """Structural invariant: everything covered, parents acyclic."""
        n = self.graph.n
        if np.any(self.parent == -2):
            return False
        for i in range(n):
            x, hops = i, 0
            while self.parent[x] != -1:
                x = int(self.parent[x])
                hops += 1
                if hops > n:
                    return False
        return True


def wilson_sample(kg, vertex_order, seed, stream_id=0):
    """Run the full loop-erased sweep once.

    ``vertex_order`` is a permutation of the vertex labels; chains start
    at its entries in turn, skipping already covered vertices.
    """
    g = kg.graph
    order = [g.vertex_index(v) for v in vertex_order]
    if sorted(order) != list(range(g.n)):
        raise JumpdensityError("vertex_order must be a permutation of V")
    rng = XoshiroStream(seed, stream_id)
    indptr, nbr, wts = g.indptr, g.nbr, g.wts
    kappa, total = kg.kappa, kg.total_rates

    parent = np.full(g.n, -2, dtype=np.int32)
    covered = np.zeros(g.n, dtype=bool)
    ell = np.zeros(g.n, dtype=np.float64)
    loops = []
    stage_ells = []

    for v0 in order:
        if covered[v0]:
            continue
        stage_ell = np.zeros(g.n, dtype=np.float64)
        stack = [v0]
        pos = {v0: 0}
        while True:
            cur = stack[-1]
            h = rng.next_exponential(total[cur])
            stage_ell[cur] += h

            thr = rng.next_double() * total[cur]
            acc = 0.0
            target = -1
            for p in range(indptr[cur], indptr[cur + 1]):
                acc += wts[p]
                if thr < acc:
                    target = int(nbr[p])
                    break
            if target < 0 and kappa[cur] == 0.0:
                target = int(nbr[indptr[cur + 1] - 1])  # rounding fallback

            if target < 0:
                # absorbed: lay the loop-erased branch toward the cemetery
                for m in range(len(stack) - 1):
                    parent[stack[m]] = stack[m + 1]
                parent[stack[-1]] = -1
                break
            if covered[target]:
                for m in range(len(stack) - 1):
                    parent[stack[m]] = stack[m + 1]
                parent[stack[-1]] = target
                break
            if target in pos:
                cut = pos[target]
                loops.append(tuple(stack[cut:] + [target]))
                for x in stack[cut + 1:]:
                    del pos[x]
                del stack[cut + 1:]
            else:
                pos[target] = len(stack)
                stack.append(target)
        for x in stack:
            covered[x] = True
        ell += stage_ell
        stage_ells.append(stage_ell)

    return WilsonOutput(g, parent, loops, ell, stage_ells)


def loop_cycling_numbers(out):
    """Net signed crossings of the erased-loop ensemble, as a current.

    Loops are closed walks, so the divergence vanishes at every vertex;
    the corresponding local-time power factor in the joint density is 1.
    """
    g = out.graph
    counts = np.zeros(g.n_directed, dtype=np.int64)
    for loop in out.loops:
        for x, y in zip(loop[:-1], loop[1:]):
            counts[g.pos[(x, y)]] += 1
    return Current(g, counts - counts[g.reverse_perm])


@dataclass
class ChiSquareReport:
    """Goodness-of-fit (or homogeneity) test outcome."""
    n_samples: int
    statistic: float
    dof: int
    p_value: float
    passed: bool
    p_threshold: float
    observed: dict
    expected: dict
    details: dict = field(default_factory=dict)

    def to_dict(self):
        d = {
            "n_samples": self.n_samples,
            "statistic": self.statistic,
            "dof": self.dof,
            "p_value": self.p_value,
            "passed": self.passed,
            "p_threshold": self.p_threshold,
        }
        d.update(self.details)
        return d


def enumerate_rooted_forests(kg):
    """All spanning forests rooted at killed vertices, with probabilities.

    Returns {parent_tuple: probability}; probabilities are branch weight
    products times root killing rates over det(L + diag(kappa)).
    """
    g = kg.graph
    if g.n > MAX_FOREST_VERTICES:
        raise GraphTooLarge("forest enumeration supports <= %d vertices"
                            % MAX_FOREST_VERTICES)
    z = killed_tree_sum(g, kg.kappa)
    choices = []
    for i in range(g.n):
        opts = [(int(j), float(g.wts[p]))
                for j, p in zip(g.neighbors(i),
                                range(g.indptr[i], g.indptr[i + 1]))]
        if kg.kappa[i] > 0:
            opts.append((-1, float(kg.kappa[i])))
        choices.append(opts)
    forests = {}
    for combo in itertools.product(*choices):
        parent = tuple(c[0] for c in combo)
        # acyclic iff every vertex reaches a root
        ok = True
        for i in range(g.n):
            x, hops = i, 0
            while parent[x] != -1:
                x = parent[x]
                hops += 1
                if hops > g.n:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        weight = 1.0
        for c in combo:
            weight *= c[1]
        forests[parent] = weight / z
    return forests


def _sample_forest_counts(kg, vertex_order, n, seed, r0=0):
    counts = {}
    for r in range(n):
        out = wilson_sample(kg, vertex_order, seed, r0 + r)
        key = tuple(int(p) for p in out.parent)
        counts[key] = counts.get(key, 0) + 1
    return counts


def tree_law_check(kg, vertex_order, n, seed, p_threshold=1e-3):
    """Chi-square test of empirical forest frequencies against the
    conductance-product law normalized by the killed determinant."""
    probs = enumerate_rooted_forests(kg)
    counts = _sample_forest_counts(kg, vertex_order, n, seed)
    unknown = set(counts) - set(probs)
    if unknown:
        raise JumpdensityError("sampled forest outside enumeration: %r"
                               % (next(iter(unknown)),))
    keys = sorted(probs)
    observed = np.array([counts.get(k, 0) for k in keys], dtype=np.float64)
    expected = np.array([n * probs[k] for k in keys])
    stat, p = sps.chisquare(observed, expected)
    return ChiSquareReport(
        n_samples=n, statistic=float(stat), dof=len(keys) - 1,
        p_value=float(p), passed=bool(p > p_threshold),
        p_threshold=p_threshold,
        observed={str(k): int(c) for k, c in zip(keys, observed)},
        expected={str(k): float(e) for k, e in zip(keys, expected)},
        details={"check": "wilson_tree_law", "seed": seed})


def order_independence_check(kg, order_a, order_b, n, seed, p_threshold=1e-3):
    """Homogeneity chi-square between forests sampled under two orders."""
    counts_a = _sample_forest_counts(kg, order_a, n, seed, r0=0)
    counts_b = _sample_forest_counts(kg, order_b, n, seed, r0=n)
    keys = sorted(set(counts_a) | set(counts_b))
    table = np.array([[counts_a.get(k, 0) for k in keys],
                      [counts_b.get(k, 0) for k in keys]], dtype=np.float64)
    keep = table.sum(axis=0) > 0
    table = table[:, keep]
    stat, p, dof, _ = sps.chi2_contingency(table, correction=False)
    return ChiSquareReport(
        n_samples=2 * n, statistic=float(stat), dof=int(dof),
        p_value=float(p), passed=bool(p > p_threshold),
        p_threshold=p_threshold,
        observed={str(k): [int(counts_a.get(k, 0)), int(counts_b.get(k, 0))]
                  for k in keys},
        expected={},
        details={"check": "wilson_order_independence", "seed": seed})
