import math

import numpy as np
import pytest

from jumpdensity import (
    JointOutcome,
    OrientedTree,
    build_graph,
    prop1_log_density,
    ray_knight_tree_density,
    sum_prop1_over_k,
    theorem1_log_density,
)
from jumpdensity.bessel import log_bessel_i
from jumpdensity.density import theorem1_evaluator
from jumpdensity.errors import GraphTooLarge, InvalidOutcome, NotATree
from jumpdensity.pathstats import tilde_current
from jumpdensity.trees import enumerate_spanning_trees, extend_cycling_numbers, offtree_edges
from jumpdensity.verify import as_counts, as_current


def unit_flow_outcome(g, i0, i1, ell, tree, offtree=None):
    off = offtree if offtree is not None else [0] * len(offtree_edges(g, tree))
    cur = extend_cycling_numbers(g, tree, off, (i0, i1))
    return JointOutcome(g, i0, i1, ell, tree, current=cur)


def random_outcome(g, rng):
    i0 = g.labels[int(rng.integers(g.n))]
    i1 = g.labels[int(rng.integers(g.n))]
    trees = enumerate_spanning_trees(g, i1)
    tree = trees[int(rng.integers(len(trees)))]
    dim = len(offtree_edges(g, tree))
    off = rng.integers(-2, 3, size=dim).tolist()
    ell = rng.uniform(0.1, 3.0, size=g.n)
    return unit_flow_outcome(g, i0, i1, ell, tree, off)


# -- two-vertex closed forms ------------------------------------------------


def test_thm1_two_vertex_closed_form(g2w):
    """Summing the exact-counts density over k_ba = m, k_ab = m + 1
    telescopes into W e^{-W sigma} I_0(2 W sqrt(l_a l_b)): term m is
    W^{2m+1} l_a^m l_b^m / (m!)^2 after the tree factor cancels one l_a,
    which is the I_0 series at 2 W sqrt(l_a l_b) times W e^{-W sigma}."""
    W = 1.3
    tree = OrientedTree.from_edges(g2w, "b", [("a", "b")])
    for l0 in (0.2, 1.0, 2.4):
        for l1 in (0.5, 1.7):
            o = JointOutcome(g2w, "a", "b", [l0, l1], tree,
                             current=as_current(g2w, {("a", "b"): 1}))
            got = theorem1_log_density(g2w, o)
            want = (math.log(W) - W * (l0 + l1)
                    + log_bessel_i(0, 2 * W * math.sqrt(l0 * l1)))
            assert got == pytest.approx(want, abs=1e-13)

            # brute-force telescoped series, computed term by term
            brute, term = 0.0, W
            for m in range(1, 80):
                brute += term
                term *= W * W * l0 * l1 / (m * m)
            brute *= math.exp(-W * (l0 + l1))
            assert math.exp(got) == pytest.approx(brute, rel=1e-12)


def test_prop1_two_vertex_one_jump(g2w):
    """One jump a -> b with l_a = t: direct integration gives
    W e^{-W t} e^{-W (sigma - t)} = W e^{-W sigma}, flat in t."""
    W, sigma = 1.3, 2.0
    tree = OrientedTree.from_edges(g2w, "b", [("a", "b")])
    for l0 in (0.2, 1.0, 1.9):
        o = JointOutcome(g2w, "a", "b", [l0, sigma - l0], tree,
                         counts=as_counts(g2w, {("a", "b"): 1}))
        got = math.exp(prop1_log_density(g2w, o))
        assert got == pytest.approx(W * math.exp(-W * sigma), rel=1e-14)


def test_prop1_two_vertex_round_trip(g2w):
    """a -> b -> a with the first jump time free: integrating the two-jump
    path density W^2 e^{-W sigma} over the jump time in (0, l_a) gives
    W^2 l_a e^{-W sigma}."""
    W, sigma = 1.3, 2.0
    tree = OrientedTree.from_edges(g2w, "a", [("b", "a")])
    for l0 in (0.2, 1.0, 1.9):
        o = JointOutcome(g2w, "a", "a", [l0, sigma - l0], tree,
                         counts=as_counts(g2w, {("a", "b"): 1, ("b", "a"): 1}))
        got = math.exp(prop1_log_density(g2w, o))
        assert got == pytest.approx(W * W * l0 * math.exp(-W * sigma),
                                    rel=1e-14)


def test_prop1_tree_edge_needs_crossing(g2):
    tree = OrientedTree.from_edges(g2, "a", [("b", "a")])
    o = JointOutcome(g2, "a", "a", [1.0, 1.0], tree,
                     counts=as_counts(g2, {("a", "b"): 0, ("b", "a"): 0}))
    assert prop1_log_density(g2, o) == -math.inf


# -- hypothesis validation ----------------------------------------------


def test_invalid_outcomes(g2, triangle):
    tree = OrientedTree.from_edges(g2, "b", [("a", "b")])
    with pytest.raises(InvalidOutcome):
        # divergence would be +-2, not a unit path flow
        JointOutcome(g2, "a", "b", [1.0, 1.0], tree,
                     current=as_current(g2, {("a", "b"): 2}))
    with pytest.raises(InvalidOutcome):
        JointOutcome(g2, "a", "b", [1.0, 0.0], tree,
                     current=as_current(g2, {("a", "b"): 1}))
    with pytest.raises(InvalidOutcome):  # root must be i1
        JointOutcome(g2, "a", "a", [1.0, 1.0], tree,
                     current=as_current(g2, {("a", "b"): 1}))
    with pytest.raises(InvalidOutcome):  # both kinds at once
        JointOutcome(g2, "a", "b", [1.0, 1.0], tree,
                     current=as_current(g2, {("a", "b"): 1}),
                     counts=as_counts(g2, {("a", "b"): 1}))
    with pytest.raises(InvalidOutcome):  # tree must span
        partial = OrientedTree.from_edges(triangle, "b", [("a", "b")])
        JointOutcome(triangle, "a", "b", [1.0] * 3, partial,
                     current=as_current(triangle, {("a", "b"): 1}))


# -- series consistency ------------------------------------------------


def graphs_up_to_four():
    rng = np.random.default_rng(101)

    def w():
        return float(rng.uniform(0.5, 3.0))

    return [
        build_graph("ab", [("a", "b", w())]),
        build_graph("abc", [("a", "b", w()), ("b", "c", w())]),
        build_graph("abc", [("a", "b", w()), ("b", "c", w()), ("a", "c", w())]),
        build_graph("abcd", [("a", "b", w()), ("b", "c", w()),
                             ("c", "d", w()), ("a", "d", w())]),
        build_graph("abcd", [("a", "b", w()), ("b", "c", w()),
                             ("a", "c", w()), ("c", "d", w())]),
    ]


@pytest.mark.parametrize("gi", range(5))
def test_series_consistency_small_graphs(gi):
    g = graphs_up_to_four()[gi]
    rng = np.random.default_rng(7 + gi)
    for _ in range(3):
        o = random_outcome(g, rng)
        t1 = theorem1_log_density(g, o)
        s = sum_prop1_over_k(g, o, truncation=60, method="grid")
        assert abs(math.exp(t1) - math.exp(s)) <= 1e-10 * math.exp(t1)


def test_series_consistency_k4_edgewise():
    rng = np.random.default_rng(55)
    g = build_graph("abcd", [(u, v, float(rng.uniform(0.5, 3.0)))
                             for u in "abcd" for v in "abcd" if u < v])
    for _ in range(3):
        o = random_outcome(g, rng)
        t1 = theorem1_log_density(g, o)
        s = sum_prop1_over_k(g, o, truncation=60, method="edgewise")
        assert abs(math.exp(t1) - math.exp(s)) <= 1e-10 * math.exp(t1)
    # grid and edgewise are rearrangements of the same finite sum
    o = random_outcome(g, rng)
    grid = sum_prop1_over_k(g, o, truncation=8, method="grid")
    edge = sum_prop1_over_k(g, o, truncation=8, method="edgewise")
    assert grid == pytest.approx(edge, abs=1e-11)
    with pytest.raises(GraphTooLarge):
        sum_prop1_over_k(g, o, truncation=60, method="grid")


def test_sum_monotone_in_truncation(triangle):
    # nondecreasing in the truncation, up to accumulation rounding (the
    # grids for different truncations sum in different orders)
    rng = np.random.default_rng(3)
    o = random_outcome(triangle, rng)
    vals = [sum_prop1_over_k(triangle, o, truncation=M) for M in range(0, 26, 5)]
    assert all(b >= a - 1e-12 * abs(a) for a, b in zip(vals, vals[1:]))
    assert vals[2] > vals[1] > vals[0]


def test_sum_minimal_term(g2):
    """Truncation 0 with the current on the tree edge keeps exactly the
    minimal-counts term of the exact-counts density."""
    tree = OrientedTree.from_edges(g2, "b", [("a", "b")])
    o = unit_flow_outcome(g2, "a", "b", [0.7, 1.1], tree)
    single = JointOutcome(g2, "a", "b", [0.7, 1.1], tree,
                          counts=as_counts(g2, {("a", "b"): 1}))
    assert sum_prop1_over_k(g2, o, truncation=0) == pytest.approx(
        prop1_log_density(g2, single), abs=1e-12)


def test_sum_zero_current_tree_edge_sentinel(g2):
    """Zero current with the tree edge forced and truncation 0: the only
    grid point has no crossing on the tree edge, so the sum is zero."""
    tree = OrientedTree.from_edges(g2, "a", [("b", "a")])
    o = unit_flow_outcome(g2, "a", "a", [0.7, 1.1], tree)
    assert sum_prop1_over_k(g2, o, truncation=0) == -math.inf


# -- structural identities ---------------------------------------------


def test_half_power_bookkeeping(triangle):
    """Edge-paired and vertex-grouped half powers agree: the sum over the
    positive orientation of t_ij ln l_i + t_ji ln l_j equals the sum over
    vertices of t_i ln l_i."""
    rng = np.random.default_rng(17)
    for _ in range(25):
        o = random_outcome(triangle, rng)
        t = tilde_current(o.current, o.tree)
        ell = o.ell
        by_edge = 0.0
        for i, j, _ in triangle.edges:
            a = int(o.current.values[triangle.pos[(i, j)]])
            if a < 0:
                i, j = j, i
            tij = int(t.values[triangle.pos[(i, j)]])
            by_edge += 0.5 * (tij * math.log(ell[i]) - tij * math.log(ell[j]))
        by_vertex = 0.5 * float(np.dot(t.divergence, np.log(ell)))
        assert by_edge == pytest.approx(by_vertex, abs=1e-12)


def test_scaling_shift(triangle):
    """Scaling l by c and W by 1/c keeps every exponential and Bessel
    argument fixed; the log density shifts by exactly -(tree edges) ln c
    (the half-power total is scale-free because the tilde divergence sums
    to zero)."""
    rng = np.random.default_rng(23)
    o = random_outcome(triangle, rng)
    base = theorem1_log_density(triangle, o)
    for c in (0.5, 2.0, 3.7):
        scaled_g = build_graph(
            [lab for lab in triangle.labels],
            [(triangle.labels[i], triangle.labels[j], w / c)
             for i, j, w in triangle.edges])
        tree = OrientedTree(scaled_g, o.tree.root, o.tree.parent)
        from jumpdensity.pathstats import Current
        o2 = JointOutcome(scaled_g, o.i0, o.i1, o.ell * c, tree,
                          current=Current(scaled_g, o.current.values))
        got = theorem1_log_density(scaled_g, o2)
        want = base - (triangle.n - 1) * math.log(c)
        assert got == pytest.approx(want, abs=1e-11)
        assert int(tilde_current(o2.current, tree).divergence.sum()) == 0


# -- stopped-time (inverse local time) density ---------------------------


def excursion_series_density(W, u, x, terms=120):
    """First-principles oracle for the 2-vertex stopped density.

    Departures from the pinned site form a Poisson(W u) count N in its
    local time; each excursion contributes an independent Exp(W) holding
    at the far vertex, so the far local time is a Poisson-weighted Gamma
    mixture: sum_n e^{-Wu} (Wu)^n / n! * W^n x^{n-1} e^{-Wx} / (n-1)!.
    """
    total = 0.0
    for n in range(1, terms):
        total += (math.exp(-W * u) * (W * u) ** n / math.factorial(n)
                  * W ** n * x ** (n - 1) * math.exp(-W * x)
                  / math.factorial(n - 1))
    return total


def test_ray_knight_two_vertex_oracle(g2w):
    W, u = 1.3, 0.9
    for x in (0.2, 0.7, 1.5, 3.0):
        got = math.exp(ray_knight_tree_density(g2w, "a", u, {"b": x}))
        assert got == pytest.approx(excursion_series_density(W, u, x),
                                    rel=1e-12)


def test_ray_knight_total_mass(g2w):
    """Integrating out the far local time leaves the probability that the
    far vertex is visited at all: 1 - e^{-W u}."""
    from jumpdensity.verify import integrate_box
    W, u = 1.3, 0.9
    val = integrate_box(
        lambda pt: math.exp(ray_knight_tree_density(g2w, "a", u, {"b": pt[0]})),
        [(1e-9, 50.0)], 64)
    assert val == pytest.approx(1.0 - math.exp(-W * u), abs=1e-9)


def test_ray_knight_chain_factorization(path3):
    """On a chain the stopped local-time field is Markov vertex to vertex:
    the joint density is the product of 2-vertex kernels along the chain."""
    Wab, Wbc, u = 1.0, 0.8, 1.2
    for (x, y) in [(0.4, 0.3), (1.1, 0.8), (2.0, 0.1)]:
        got = math.exp(ray_knight_tree_density(path3, "a", u, {"b": x, "c": y}))
        want = (excursion_series_density(Wab, u, x)
                * excursion_series_density(Wbc, x, y))
        assert got == pytest.approx(want, rel=1e-11)


def test_ray_knight_matches_thm1_specialization(path3):
    """Same number from the general evaluator: zero current, the chain
    oriented toward the pinned site, endpoint = start."""
    from jumpdensity.density import stopped_tree_orientation
    from jumpdensity.pathstats import Current
    u = 1.2
    r = path3.vertex_index("a")
    tree = OrientedTree(path3, r, stopped_tree_orientation(path3, r))
    zero = Current(path3, np.zeros(path3.n_directed, dtype=np.int64))
    f = theorem1_evaluator(path3, zero, tree)
    for (x, y) in [(0.4, 0.3), (1.1, 0.8)]:
        direct = ray_knight_tree_density(path3, "a", u, {"b": x, "c": y})
        ell = np.array([u, x, y])
        assert direct == pytest.approx(f(ell), abs=1e-12)


def test_ray_knight_rejects_cycles(triangle):
    with pytest.raises(NotATree):
        ray_knight_tree_density(triangle, "a", 1.0, {"b": 1.0, "c": 1.0})


def test_ray_knight_middle_start_factorizes(path3):
    """Starting in the middle, the two branches are independent."""
    Wab, Wbc, u = 1.0, 0.8, 1.2
    for (x, y) in [(0.4, 0.3), (1.1, 0.8)]:
        got = math.exp(ray_knight_tree_density(path3, "b", u, {"a": x, "c": y}))
        want = (excursion_series_density(Wab, u, x)
                * excursion_series_density(Wbc, u, y))
        assert got == pytest.approx(want, rel=1e-11)
