import os
import subprocess
import sys

import numpy as np
import pytest

from revpref import _kernels_py, kernels

try:
    from revpref import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

needs_compiled = pytest.mark.skipif(_compiled is None, reason="compiled extension not built")


def test_backend_reported():
    assert kernels.BACKEND in kernels.available_backends()
    assert "python" in kernels.available_backends()


def test_pure_python_env_forces_fallback():
    env = dict(os.environ, REVPREF_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from revpref import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


@needs_compiled
def test_floyd_warshall_parity():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(1, 9))
        a = rng.normal(size=(n, n)) + 0.3
        np.fill_diagonal(a, 0.0)
        d1, p1, s1 = _kernels_py.floyd_warshall(a, 1e-9)
        d2, p2, s2 = _compiled.floyd_warshall(a, 1e-9)
        assert s1 == s2
        assert d1.tobytes() == d2.tobytes()
        np.testing.assert_array_equal(p1, p2)


@needs_compiled
def test_closure_parity():
    rng = np.random.default_rng(1)
    for _ in range(50):
        r = rng.random((7, 7)) < 0.25
        np.testing.assert_array_equal(_kernels_py.transitive_closure(r), _compiled.transitive_closure(r))


@needs_compiled
def test_hungarian_parity():
    rng = np.random.default_rng(2)
    for _ in range(100):
        c = rng.normal(size=(6, 6))
        c.setflags(write=False)
        a1, u1, v1 = _kernels_py.hungarian(c)
        a2, u2, v2 = _compiled.hungarian(c)
        np.testing.assert_array_equal(a1, a2)
        np.testing.assert_allclose(u1, u2, atol=1e-12)
        np.testing.assert_allclose(v1, v2, atol=1e-12)


@needs_compiled
def test_brute_force_parity():
    rng = np.random.default_rng(3)
    for _ in range(30):
        c = rng.normal(size=(6, 6))
        p1, v1 = _kernels_py.brute_force_assignment(c)
        p2, v2 = _compiled.brute_force_assignment(c)
        np.testing.assert_array_equal(p1, p2)
        assert v1 == v2


def test_hungarian_duals_are_feasible_and_tight():
    rng = np.random.default_rng(4)
    for impl in filter(None, [_kernels_py, _compiled]):
        c = rng.normal(size=(7, 7))
        a, u, v = impl.hungarian(c)
        assert np.all(u[:, None] + v[None, :] <= c + 1e-12)
        np.testing.assert_allclose(u + v[a], c[np.arange(7), a], atol=1e-12)
