"""Trajectory sampling for the Markov jump process.

The process holds at vertex i for an exponential time with rate equal to
the vertex's total conductance, then jumps to neighbor j with probability
proportional to the edge conductance. Recording stops either at a fixed
horizon or at the exact instant the local time at one site reaches a
budget (the final holding interval is truncated there, no discretization).

Replica r of a batch draws from the stream (base_seed, r), so batches are
reproducible and independent of execution order or parallelism.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import JumpdensityError

DEFAULT_EVENT_CAP = 10_000_000


@dataclass(frozen=True)
class FixedTime:
    """Stop at a deterministic process time sigma > 0."""
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise JumpdensityError("sigma must be > 0")


@dataclass(frozen=True)
class InverseLocalTime:
    """Stop the instant the local time at `site` reaches u > 0."""
    site: object
    u: float

    def __post_init__(self):
        if not self.u > 0:
            raise JumpdensityError("local-time budget u must be > 0")


@dataclass(frozen=True)
class RngStream:
    """Names one deterministic random stream."""
    seed: int
    stream_id: int = 0


@dataclass
class JumpPath:
    """Right-continuous piecewise-constant trajectory.

    ``times[m]`` is the instant of the m-th jump and ``targets[m]`` the
    dense index of the state entered; the path sits at ``start`` before
    the first jump and at ``targets[-1]`` from the last jump until
    ``horizon``.
    """
    graph: object
    start: int
    times: np.ndarray
    targets: np.ndarray
    horizon: float
    validate: bool = field(default=False, repr=False)

    def __post_init__(self):
        if self.validate:
            t = self.times
            s = np.concatenate(([self.start], self.targets[:-1])).astype(np.int64)
            if len(t) != len(self.targets):
                raise JumpdensityError("times and targets differ in length")
            if len(t):
                if not (np.all(np.diff(t) > 0) and t[0] > 0 and t[-1] <= self.horizon):
                    raise JumpdensityError(
                        "event times must be strictly increasing within (0, horizon]")
                pos = self.graph.pos_matrix[s, self.targets]
                if np.any(pos < 0):
                    raise JumpdensityError(
                        "consecutive states must be distinct graph neighbors")

    @property
    def n_events(self):
        return len(self.times)

    def states(self):
        """Occupied state before each jump, then the final state."""
        return np.concatenate(([self.start], self.targets)).astype(np.int64)

    @property
    def final_state(self):
        return int(self.targets[-1]) if len(self.targets) else self.start


def _rule_args(g, rule):
    if isinstance(rule, FixedTime):
        return _kernels.STOP_FIXED_TIME, float(rule.sigma), -1
    if isinstance(rule, InverseLocalTime):
        return (_kernels.STOP_INVERSE_LOCAL_TIME, float(rule.u),
                g.vertex_index(rule.site))
    raise JumpdensityError("unknown stopping rule %r" % (rule,))


def _csr(g):
    return (g.indptr, g.nbr, g.wts, g.rates)


def simulate_path(g, start, rule, rng, event_cap=DEFAULT_EVENT_CAP):
    """Sample one trajectory of the jump process on ``g``.

    Parameters
    ----------
    g : WeightedGraph
    start : vertex label
    rule : FixedTime or InverseLocalTime
    rng : RngStream (or (seed, stream_id) tuple)
    """
    if not isinstance(rng, RngStream):
        rng = RngStream(*rng)
    kind, param, site = _rule_args(g, rule)
    s = g.vertex_index(start)
    times, targets, horizon = _kernels.sample_path(
        _csr(g), s, kind, param, site, rng.seed, rng.stream_id, event_cap)
    return JumpPath(g, s, times, targets, horizon)


def simulate_batch(g, start, rule, base_seed, n, event_cap=DEFAULT_EVENT_CAP):
    """Yield n paths; path r is drawn from stream (base_seed, r)."""
    if n < 1:
        raise JumpdensityError("n must be >= 1")
    for r in range(n):
        yield simulate_path(g, start, rule, RngStream(base_seed, r), event_cap)


def batch_statistics(g, start, rule, base_seed, n, r0=0,
                     event_cap=DEFAULT_EVENT_CAP, chunk=65536, threads=1):
    """Simulate n replicas and return their extracted statistics as arrays.

    Returns a dict with per-replica rows: ``ell`` (n, V) local times,
    ``k`` (n, 2E) crossing counts in canonical directed-edge order,
    ``parent`` (n, V) last-exit parent vectors (-1 root, -2 unvisited),
    ``final`` (n,), ``horizon`` (n,), ``n_events`` (n,). Replica r uses
    stream (base_seed, r0 + r); the outputs do not depend on `chunk` or
    `threads`.
    """
    kind, param, site = _rule_args(g, rule)
    s = g.vertex_index(start)
    nv, ne = g.n, g.n_directed
    out = {
        "ell": np.empty((n, nv), dtype=np.float64),
        "k": np.empty((n, ne), dtype=np.int64),
        "parent": np.empty((n, nv), dtype=np.int32),
        "final": np.empty(n, dtype=np.int32),
        "horizon": np.empty(n, dtype=np.float64),
        "n_events": np.empty(n, dtype=np.int64),
    }
    spans = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]

    def run(span):
        lo, hi = span
        _kernels.stats_batch(
            _csr(g), s, kind, param, site, base_seed, r0 + lo, hi - lo,
            event_cap, out["ell"][lo:hi], out["k"][lo:hi],
            out["parent"][lo:hi], out["final"][lo:hi],
            out["horizon"][lo:hi], out["n_events"][lo:hi])

    if threads > 1 and len(spans) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, spans))
    else:
        for span in spans:
            run(span)
    return out
