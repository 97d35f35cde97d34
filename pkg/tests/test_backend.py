import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meelab import _backend, _fallback

compiled = pytest.mark.skipif(_backend.BACKEND != "compiled", reason="compiled extension not built")


def batches():
    return st.tuples(st.integers(2, 48), st.sampled_from([1, 2, 4]), st.integers(0, 2**31 - 1))


@compiled
@settings(max_examples=100, deadline=None)
@given(batches(), st.floats(0.05, 5.0))
def test_compiled_matches_fallback(spec, sigma):
    n, d, seed = spec
    e = np.random.default_rng(seed).standard_normal((n, d))
    np.testing.assert_allclose(_backend.pairwise_sq_dists(e), _fallback.pairwise_sq_dists(e), rtol=1e-13, atol=1e-14)
    # exp amplifies a one-ulp difference in its argument by the argument's size
    rtol = 1e-15 * max(1.0, float(np.max(_fallback.pairwise_sq_dists(e))) / sigma**2)
    np.testing.assert_allclose(_backend.gram_matrix(e, sigma), _fallback.gram_matrix(e, sigma), rtol=rtol)
    v1, g1 = _backend.matrix_mee(e, sigma)
    v2, g2 = _fallback.matrix_mee(e, sigma)
    assert v1 == pytest.approx(v2, rel=1e-12, abs=1e-15)
    np.testing.assert_allclose(g1, g2, rtol=max(1e-9, rtol), atol=1e-300)


@compiled
def test_compiled_is_deterministic():
    e = np.random.default_rng(0).standard_normal((32, 2))
    assert _backend.matrix_mee(e, 0.7)[0] == _backend.matrix_mee(e, 0.7)[0]


def _backend_in_subprocess(value):
    env = {**os.environ, "MEELAB_BACKEND": value}
    proc = subprocess.run(
        [sys.executable, "-c", "import meelab; print(meelab.BACKEND)"],
        capture_output=True, text=True, env=env, check=False,
    )
    return proc


def test_forced_fallback():
    proc = _backend_in_subprocess("python")
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip() == "python"


@compiled
def test_forced_compiled():
    assert _backend_in_subprocess("compiled").stdout.strip() == "compiled"


def test_invalid_backend_value():
    assert _backend_in_subprocess("gpu").returncode != 0
