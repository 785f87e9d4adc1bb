import os
import subprocess
import sys

import numpy as np
import pytest

from divheight import kernels
from divheight.linalg import det_bareiss, det_multimodular


def test_det_mod_p_variants_agree():
    rng = np.random.default_rng(3)
    p = kernels.primes_below_2_31(1)[0]
    for n in (1, 5, 30):
        a = rng.integers(0, p, size=(n, n), dtype=np.int64)
        assert kernels.det_mod_p_numba(a, p) == kernels.det_mod_p_numpy(a, p)


def test_singular_mod_p():
    p = kernels.primes_below_2_31(1)[0]
    a = np.array([[1, 2], [2, 4]], dtype=np.int64)
    assert kernels.det_mod_p_numba(a, p) == 0 == kernels.det_mod_p_numpy(a, p)


@pytest.mark.parametrize("det_mod_p", [kernels.det_mod_p_numba, kernels.det_mod_p_numpy])
def test_multimodular_matches_bareiss(det_mod_p):
    rng = np.random.default_rng(5)
    for n in (3, 12, 28):
        rows = rng.integers(-10**6, 10**6, size=(n, n)).tolist()
        assert det_multimodular(rows, det_mod_p) == det_bareiss(rows)


def test_jensen_rows_variants_agree():
    rng = np.random.default_rng(7)
    rows = rng.normal(size=(50, 6)) + 1j * rng.normal(size=(50, 6))
    rows[3, :2] = 0  # leading zeros lower the degree
    np.testing.assert_allclose(kernels.jensen_rows_numba(rows), kernels.jensen_rows_numpy(rows), rtol=1e-9)


def test_jensen_rows_value():
    # log|2| + log|3| for 2x - 6 -> root 3
    assert abs(kernels.jensen_rows(np.array([[2.0, -6.0]]))[0] - np.log(6)) < 1e-12


def test_env_flag_selects_numpy():
    env = dict(os.environ, DIVHEIGHT_DISABLE_NUMBA="1")
    code = "from divheight import kernels; print(kernels.USE_NUMBA, kernels.det_mod_p.__name__)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "det_mod_p_numpy"]
