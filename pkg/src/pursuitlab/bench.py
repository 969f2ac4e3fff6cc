"""Timing of the numba kernels against their numpy twins."""

import time
from itertools import combinations

import numpy as np

from . import kernels
from .dictionary import random_dictionary
from .oracle import random_psd

__all__ = ["run_benchmark", "format_table"]


def _time(fn, repeat):
    fn()  # warm-up, includes JIT compilation on the first call
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(rng):
    d = random_dictionary(rng, 10, 15)
    r = random_psd(rng, 10)
    sets = [c for s in range(6) for c in combinations(range(15), s)]
    packed = kernels.pack_subsets(sets)
    yield "subset_values M=10 N=15 |S|<=5", lambda impl: impl.subset_values(d.atoms, r, packed), len(sets)

    big = random_dictionary(rng, 30, 100)
    q, _ = np.linalg.qr(big.atoms[:, :5])
    z = np.eye(5, dtype=np.complex128)
    yield "orthogonal_components M=30 N=100 k=5", lambda impl: impl.orthogonal_components(big.atoms, q, z), 100

    doa = random_dictionary(rng, 10, 15)
    q2, _ = np.linalg.qr(doa.atoms[:, :3])
    z2 = np.eye(3, dtype=np.complex128)
    yield "orthogonal_components M=10 N=15 k=3", lambda impl: impl.orthogonal_components(doa.atoms, q2, z2), 15

    small = random_dictionary(rng, 6, 10)
    r6 = random_psd(rng, 6)
    triples = [c for s in range(4) for c in combinations(range(10), s)]
    packed6 = kernels.pack_subsets(triples)
    yield "subset_values M=6 N=10 |S|<=3", lambda impl: impl.subset_values(small.atoms, r6, packed6), len(triples)


def run_benchmark(repeat=5, seed=0):
    """Best-of-``repeat`` wall times for each kernel under both backends.

    Also checks that both backends agree to 1e-10 on every case.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for name, call, size in _cases(rng):
        entry = {"kernel": name, "items": size}
        ref = call(kernels.numpy_impl)
        entry["numpy_s"] = _time(lambda: call(kernels.numpy_impl), repeat)
        if kernels.numba_impl is not None:
            got = call(kernels.numba_impl)
            ref0 = ref[0] if isinstance(ref, tuple) else ref
            got0 = got[0] if isinstance(got, tuple) else got
            entry["max_abs_diff"] = float(np.max(np.abs(np.asarray(ref0) - np.asarray(got0))))
            entry["numba_s"] = _time(lambda: call(kernels.numba_impl), repeat)
            entry["speedup"] = entry["numpy_s"] / entry["numba_s"]
        rows.append(entry)
    return rows


def format_table(rows):
    lines = [f"{'kernel':42s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}"]
    for r in rows:
        nb = r.get("numba_s")
        lines.append(
            f"{r['kernel']:42s} {1e3 * r['numpy_s']:10.3f} "
            + (f"{1e3 * nb:10.3f} {r['speedup']:8.2f}" if nb is not None else f"{'n/a':>10s} {'':>8s}")
        )
    return "\n".join(lines)
