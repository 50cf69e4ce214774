"""Stream determinism and compiled/pure kernel equivalence."""

import numpy as np
import pytest

from jumpdensity.rng import XoshiroStream, stream_state
from jumpdensity._kernels import _pykernels

try:
    from jumpdensity._kernels import _ckernels
except ImportError:
    _ckernels = None

BACKENDS = [_pykernels] + ([_ckernels] if _ckernels else [])

needs_c = pytest.mark.skipif(_ckernels is None,
                             reason="compiled kernels not built")


def test_stream_reproducible():
    a = XoshiroStream(123, 7)
    b = XoshiroStream(123, 7)
    assert [a.next_raw() for _ in range(20)] == [b.next_raw() for _ in range(20)]


def test_streams_distinct():
    a = XoshiroStream(123, 0)
    b = XoshiroStream(123, 1)
    assert [a.next_raw() for _ in range(8)] != [b.next_raw() for _ in range(8)]


def test_state_expansion_nontrivial():
    assert stream_state(0, 0) != stream_state(0, 1)
    assert stream_state(0, 0) != stream_state(1, 0)
    assert all(isinstance(v, int) for v in stream_state(42, 3))


def test_uniform_range():
    s = XoshiroStream(5)
    us = [s.next_double() for _ in range(10_000)]
    assert all(0.0 <= u < 1.0 for u in us)
    assert 0.45 < float(np.mean(us)) < 0.55


def _csr(g):
    return (g.indptr, g.nbr, g.wts, g.rates)


def _run_batch(mod, g, kind, param, site, seed, n, cap=10**6):
    out = dict(
        ell=np.empty((n, g.n)), k=np.empty((n, g.n_directed), np.int64),
        parent=np.empty((n, g.n), np.int32), final=np.empty(n, np.int32),
        horizon=np.empty(n), nev=np.empty(n, np.int64))
    mod.stats_batch(_csr(g), 0, kind, param, site, seed, 0, n, cap,
                    out["ell"], out["k"], out["parent"], out["final"],
                    out["horizon"], out["nev"])
    return out


@needs_c
@pytest.mark.parametrize("kind,param,site", [(0, 2.5, -1), (1, 1.4, 0), (1, 0.9, 2)])
def test_twin_batches_bitwise_identical(triangle, kind, param, site):
    a = _run_batch(_pykernels, triangle, kind, param, site, seed=42, n=250)
    b = _run_batch(_ckernels, triangle, kind, param, site, seed=42, n=250)
    for key in a:
        assert np.array_equal(a[key], b[key]), key


@needs_c
def test_twin_single_paths_bitwise_identical(triangle):
    for sid in range(10):
        pa = _pykernels.sample_path(_csr(triangle), 0, 0, 3.0, -1, 9, sid, 10**6)
        pc = _ckernels.sample_path(_csr(triangle), 0, 0, 3.0, -1, 9, sid, 10**6)
        assert np.array_equal(pa[0], pc[0])
        assert np.array_equal(pa[1], pc[1])
        assert pa[2] == pc[2]


@pytest.mark.parametrize("mod", BACKENDS)
def test_batch_matches_single_paths(triangle, mod):
    """The fused batch kernel replays exactly the single-path streams."""
    n = 40
    batch = _run_batch(mod, triangle, 0, 2.0, -1, seed=3, n=n)
    for r in range(n):
        times, targets, horizon = mod.sample_path(
            _csr(triangle), 0, 0, 2.0, -1, 3, r, 10**6)
        assert horizon == batch["horizon"][r]
        assert len(times) == batch["nev"][r]
        final = int(targets[-1]) if len(targets) else 0
        assert final == batch["final"][r]


@pytest.mark.parametrize("mod", BACKENDS)
def test_event_cap(triangle, mod):
    from jumpdensity.errors import EventCapExceeded
    with pytest.raises(EventCapExceeded):
        mod.sample_path(_csr(triangle), 0, 0, 1e9, -1, 0, 0, 50)
    n = 4
    out = dict(
        ell=np.empty((n, 3)), k=np.empty((n, 6), np.int64),
        parent=np.empty((n, 3), np.int32), final=np.empty(n, np.int32),
        horizon=np.empty(n), nev=np.empty(n, np.int64))
    with pytest.raises(EventCapExceeded):
        mod.stats_batch(_csr(triangle), 0, 0, 1e9, -1, 0, 0, n, 50,
                        out["ell"], out["k"], out["parent"], out["final"],
                        out["horizon"], out["nev"])
