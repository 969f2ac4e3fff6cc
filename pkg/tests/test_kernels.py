import os
import subprocess
import sys
from itertools import combinations

import numpy as np
import pytest

from pursuitlab import kernels
from pursuitlab.dictionary import random_dictionary
from pursuitlab.oracle import random_psd
from pursuitlab.pursuit import representation_energy, SecondMoment

from conftest import crandn

needs_numba = pytest.mark.skipif(kernels.numba_impl is None, reason="numba unavailable")


def test_pack_subsets_pads():
    packed = kernels.pack_subsets([(), (2,), (0, 3)])
    np.testing.assert_array_equal(packed, [[-1, -1], [2, -1], [0, 3]])


@pytest.mark.parametrize("impl", ["numpy", "numba"])
def test_subset_values_against_least_squares(impl, rng):
    mod = kernels.numpy_impl if impl == "numpy" else kernels.numba_impl
    if mod is None:
        pytest.skip("numba unavailable")
    d = random_dictionary(rng, 4, 6)
    r = random_psd(rng, 4)
    sets = [c for s in range(5) for c in combinations(range(6), s)]
    got = mod.subset_values(d.atoms, r, kernels.pack_subsets(sets))
    ref = [representation_energy(d, SecondMoment(r), list(s)) for s in sets]
    np.testing.assert_allclose(got, ref, atol=1e-10)


@pytest.mark.parametrize("impl", ["numpy", "numba"])
def test_subset_values_skips_dependent_atoms(impl):
    mod = kernels.numpy_impl if impl == "numpy" else kernels.numba_impl
    if mod is None:
        pytest.skip("numba unavailable")
    phi = np.array([[1, 0, 1 / np.sqrt(2)], [0, 1, 1 / np.sqrt(2)], [0, 0, 0]], dtype=complex)
    r = np.eye(3, dtype=complex)
    got = mod.subset_values(phi, r, kernels.pack_subsets([(0, 1, 2)]))
    assert got[0] == pytest.approx(2.0, abs=1e-12)


@needs_numba
def test_backends_agree_orthogonal_components(rng):
    phi = crandn(rng, 8, 12)
    q, _ = np.linalg.qr(crandn(rng, 8, 3))
    g = q.conj().T @ q
    z = np.linalg.inv(g)
    w1, e1 = kernels.numpy_impl.orthogonal_components(phi, q, z)
    w2, e2 = kernels.numba_impl.orthogonal_components(phi, q, z)
    np.testing.assert_allclose(w1, w2, atol=1e-12)
    np.testing.assert_allclose(e1, e2, rtol=1e-12)


@needs_numba
def test_backends_agree_empty_basis(rng):
    phi = crandn(rng, 5, 4)
    v = np.zeros((5, 0), dtype=complex)
    z = np.zeros((0, 0), dtype=complex)
    w1, e1 = kernels.numpy_impl.orthogonal_components(phi, v, z)
    w2, e2 = kernels.numba_impl.orthogonal_components(phi, v, z)
    np.testing.assert_allclose(w1, phi)
    np.testing.assert_allclose(w2, phi)
    np.testing.assert_allclose(e1, e2)


def test_env_flag_selects_numpy():
    env = dict(os.environ, PURSUITLAB_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from pursuitlab import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"


@needs_numba
def test_default_backend_is_numba():
    if os.environ.get("PURSUITLAB_DISABLE_NUMBA") or os.environ.get("NUMBA_DISABLE_JIT"):
        pytest.skip("numba disabled by environment")
    assert kernels.BACKEND == "numba"


def test_benchmark_reports_agreement():
    from pursuitlab.bench import format_table, run_benchmark

    rows = run_benchmark(repeat=1)
    assert len(rows) == 4
    for row in rows:
        assert row["numpy_s"] > 0
        if "max_abs_diff" in row:
            assert row["max_abs_diff"] <= 1e-10
    assert "speedup" in format_table(rows)
