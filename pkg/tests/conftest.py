import numpy as np
import pytest

from pipal._backend import available_backends


@pytest.fixture(params=available_backends())
def backend_name(request):
    return request.param


def pytest_report_header(config):
    return f"pipal backends: {', '.join(available_backends())}"


def distinct_sorted(rng, size, lo=10**6, gap_hi=2**20):
    """Strictly increasing distinct uint64 keys clear of sentinel ranges."""
    gaps = rng.integers(1, gap_hi, size=size, dtype=np.uint64)
    return np.uint64(lo) + np.cumsum(gaps, dtype=np.uint64)


def merge_instance(rng, n, m, **kw):
    """Random sorted pair laid out contiguously; returns (arr, split)."""
    keys = distinct_sorted(rng, n + m, **kw)
    pick = rng.permutation(n + m) < n
    arr = np.concatenate([keys[pick], keys[~pick]])
    return arr, n
