"""Tests that both kernel backends exist, agree, and respect selection."""

import os
import subprocess
import sys

import numpy as np
import pytest

from askopt._backend import BACKEND, kernel_matern52, kernel_se, numpy_impl, scaled_sqdist

try:
    from askopt._backend import _native
except ImportError:
    _native = None


def random_inputs(seed, n=17, m=13, d=4):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, d))
    b = rng.normal(size=(m, d))
    lengthscales = rng.uniform(0.2, 2.0, size=d)
    return a, b, lengthscales


class TestActiveBackend:
    def test_backend_name_is_published(self):
        assert BACKEND in ("native", "numpy")

    def test_native_extension_is_importable_here(self):
        # the build ships the compiled extension; its absence would silently
        # degrade every run, so the suite treats it as a failure
        assert _native is not None
        assert BACKEND == "native"

    def test_sqdist_basics(self):
        a = np.array([[0.0, 0.0], [1.0, 1.0]])
        distances = scaled_sqdist(a, a, np.array([1.0, 1.0]))
        assert distances[0, 0] == 0.0
        assert distances[0, 1] == pytest.approx(2.0)
        halved = scaled_sqdist(a, a, np.array([2.0, 2.0]))
        assert halved[0, 1] == pytest.approx(0.5)


@pytest.mark.skipif(_native is None, reason="compiled extension unavailable")
class TestBackendAgreement:
    @pytest.mark.parametrize("seed", range(5))
    def test_sqdist_matches(self, seed):
        a, b, lengthscales = random_inputs(seed)
        native = _native.scaled_sqdist(a, b, lengthscales)
        fallback = numpy_impl.scaled_sqdist(a, b, lengthscales)
        np.testing.assert_allclose(native, fallback, rtol=1e-13, atol=1e-13)

    @pytest.mark.parametrize("seed", range(5))
    def test_se_matches(self, seed):
        a, b, lengthscales = random_inputs(seed + 50)
        native = _native.kernel_se(a, b, 1.7, lengthscales)
        fallback = numpy_impl.kernel_se(a, b, 1.7, lengthscales)
        np.testing.assert_allclose(native, fallback, rtol=1e-13, atol=1e-15)

    @pytest.mark.parametrize("seed", range(5))
    def test_matern52_matches(self, seed):
        a, b, lengthscales = random_inputs(seed + 100)
        native = _native.kernel_matern52(a, b, 0.9, lengthscales)
        fallback = numpy_impl.kernel_matern52(a, b, 0.9, lengthscales)
        np.testing.assert_allclose(native, fallback, rtol=1e-13, atol=1e-15)

    def test_non_contiguous_and_list_inputs(self):
        a, b, lengthscales = random_inputs(7)
        strided = a[::2]
        native = _native.kernel_se(strided, b, 1.0, lengthscales)
        fallback = numpy_impl.kernel_se(strided.tolist(), b.tolist(), 1.0, lengthscales)
        np.testing.assert_allclose(native, fallback, rtol=1e-13)

    def test_symmetry_and_diagonal(self):
        a, _, lengthscales = random_inputs(3)
        for kernel in (_native.kernel_se, _native.kernel_matern52):
            matrix = kernel(a, a, 2.0, lengthscales)
            np.testing.assert_allclose(matrix, matrix.T, rtol=1e-13)
            np.testing.assert_allclose(np.diag(matrix), 2.0, rtol=1e-13)


def run_probe(env_value):
    env = dict(os.environ)
    if env_value is None:
        env.pop("ASKOPT_BACKEND", None)
    else:
        env["ASKOPT_BACKEND"] = env_value
    return subprocess.run(
        [sys.executable, "-c", "from askopt._backend import BACKEND; print(BACKEND)"],
        capture_output=True, text=True, env=env,
    )


class TestEnvSelection:
    def test_default_prefers_native(self):
        probe = run_probe(None)
        assert probe.returncode == 0
        assert probe.stdout.strip() == "native"

    def test_numpy_can_be_forced(self):
        probe = run_probe("numpy")
        assert probe.returncode == 0
        assert probe.stdout.strip() == "numpy"

    def test_unknown_backend_is_an_error(self):
        probe = run_probe("cuda")
        assert probe.returncode != 0
        assert "ASKOPT_BACKEND" in probe.stderr

    def test_forced_numpy_still_optimizes(self):
        env = dict(os.environ, ASKOPT_BACKEND="numpy")
        code = (
            "from askopt.spaces import BoxSpace\n"
            "from askopt.loop import run\n"
            "from askopt.data import Dataset, TaggedDatasets, OBJECTIVE\n"
            "def observer(points):\n"
            "    values = ((points - 0.4) ** 2).sum(axis=1, keepdims=True)\n"
            "    return TaggedDatasets({OBJECTIVE: Dataset(points, values)})\n"
            "result = run(BoxSpace((0.0, 0.0), (1.0, 1.0)), observer, steps=1,\n"
            "             initial_design_size=4)\n"
            "assert result.error is None and len(result.records) == 2\n"
            "print('ok')\n"
        )
        probe = subprocess.run(
            [sys.executable, "-c", code], capture_output=True, text=True, env=env,
        )
        assert probe.returncode == 0, probe.stderr
        assert probe.stdout.strip() == "ok"
