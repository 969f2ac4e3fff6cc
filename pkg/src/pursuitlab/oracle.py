"""Brute-force and Monte Carlo checks for the greedy engines.

Everything here is seeded: a report is fully determined by ``(seed, config)``.
"""

import json
from dataclasses import asdict, dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from . import kernels
from .constraints import Cardinality, Knapsack, as_constraint
from .pursuit import SecondMoment, as_objective, moment_matrix

__all__ = [
    "CheckReport",
    "GuardExceeded",
    "MARGIN_ATOL",
    "check_lemma1",
    "check_submodularity",
    "enumerate_feasible",
    "estimate_sigma2",
    "exhaustive_best",
    "random_psd",
    "sample_targets",
    "set_function",
]

MAX_FEASIBLE_SETS = 10**6
MAX_SIGMA2_SETS = 10**4
MARGIN_ATOL = 1e-8


class GuardExceeded(ValueError):
    """The enumeration would exceed its size guard."""


@dataclass
class CheckReport:
    trials: int
    violations: int
    worst_margin: float
    seed: int
    kind: str = ""
    details: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True, allow_nan=True)


# -- generators ---------------------------------------------------------------


def random_psd(rng, m, rank=None):
    """Complex Wishart-type Hermitian PSD matrix of the given rank (full by default)."""
    rank = m if rank is None else rank
    a = rng.standard_normal((m, rank)) + 1j * rng.standard_normal((m, rank))
    return a @ a.conj().T / rank


def sample_targets(rng, r_y, count):
    """``count`` draws of ``y ~ CN(0, R_y)`` as rows of a (count x M) array."""
    m = r_y.shape[0]
    chol = np.linalg.cholesky(r_y + 1e-12 * np.eye(m))
    z = (rng.standard_normal((m, count)) + 1j * rng.standard_normal((m, count))) / np.sqrt(2.0)
    return (chol @ z).T


def set_function(dictionary, r):
    """``S -> trace(P_S R)`` evaluated through the subset kernel."""
    phi = dictionary.atoms

    def f(sets):
        return kernels.subset_values(phi, r, kernels.pack_subsets(sets))

    return f


# -- exhaustive search --------------------------------------------------------


def _count_cardinality(n, k):
    return sum(comb(n, s) for s in range(k + 1))


def enumerate_feasible(constraint, n, guard=MAX_FEASIBLE_SETS):
    """All feasible index sets (sorted tuples, including the empty set)."""
    constraint = as_constraint(constraint)
    if isinstance(constraint, Cardinality):
        k = min(constraint.k, n)
        if _count_cardinality(n, k) > guard:
            raise GuardExceeded(f"{_count_cardinality(n, k)} feasible sets exceed the guard of {guard}")
        return [c for s in range(k + 1) for c in combinations(range(n), s)]
    out = []
    stack = [()]
    # depth-first over increasing indices; valid because both knapsack
    # feasibility and matroid independence are closed under taking subsets
    while stack:
        s = stack.pop()
        out.append(s)
        if len(out) > guard:
            raise GuardExceeded(f"more than {guard} feasible sets; use a smaller instance")
        start = s[-1] + 1 if s else 0
        if isinstance(constraint, Knapsack):
            left = constraint.budget - constraint.cost(s)
            nxt = [j for j in range(start, n) if constraint.costs[j] <= left + 1e-12]
        else:
            nxt = [j for j in range(start, n) if constraint.is_feasible(list(s) + [j])]
        stack.extend(s + (j,) for j in reversed(nxt))
    out.sort(key=lambda t: (len(t), t))
    return out


def exhaustive_best(objective, dictionary, constraint, guard=MAX_FEASIBLE_SETS):
    """Best feasible set and its value; ties go to the lexicographically smallest set."""
    if dictionary.m != as_objective(objective).m_dim:
        raise ValueError("objective dimension does not match the dictionary")
    sets = enumerate_feasible(constraint, dictionary.n, guard)
    values = set_function(dictionary, moment_matrix(objective))(sets)
    best = float(np.max(values))
    tol = 1e-12 * max(1.0, abs(best))
    tied = [sets[i] for i in np.flatnonzero(values >= best - tol)]
    winner = min(tied)
    return list(winner), float(values[sets.index(winner)])


# -- submodularity ------------------------------------------------------------


def check_submodularity(r_y, dictionary, trials=500, seed=0, exhaustive=False, max_size=None):
    """Test diminishing returns of ``f(S) = trace(P_S R_y)``.

    Each trial draws ``S`` and distinct ``a, b`` outside it and evaluates the
    margin ``[f(S+a) - f(S)] - [f(S+a+b) - f(S+b)]``; a margin below
    ``-MARGIN_ATOL`` is a violation. Monotonicity (``f(S+a) >= f(S)``) and
    ``f({}) = 0`` are checked alongside. ``exhaustive=True`` enumerates every
    triple instead of sampling. ``max_size`` caps ``|S|``.
    """
    r_y = SecondMoment(r_y).r
    n = dictionary.n
    if n < 2:
        raise ValueError("need at least two atoms")
    rng = np.random.default_rng(seed)
    top = n - 2 if max_size is None else min(n - 2, int(max_size))
    if top < 0:
        raise ValueError("max_size must be non-negative")
    if exhaustive:
        triples = [
            (s, a, b)
            for size in range(top + 1)
            for s in combinations(range(n), size)
            for a in range(n)
            for b in range(n)
            if a != b and a not in s and b not in s
        ]
    else:
        triples = []
        for _ in range(trials):
            perm = rng.permutation(n)
            size = int(rng.integers(0, top + 1))
            triples.append((tuple(sorted(perm[:size].tolist())), int(perm[size]), int(perm[size + 1])))
    rows = []
    for s, a, b in triples:
        rows += [s, s + (a,), s + (b,), s + (a, b)]
    vals = set_function(dictionary, r_y)(rows + [()]).reshape(-1)
    empty_value = float(vals[-1])
    v = vals[:-1].reshape(-1, 4)
    gain_a = v[:, 1] - v[:, 0]
    gain_a_after_b = v[:, 3] - v[:, 2]
    margins = gain_a - gain_a_after_b
    violations = int(np.sum(margins < -MARGIN_ATOL))
    monotone = int(np.sum(gain_a < -MARGIN_ATOL) + np.sum(gain_a_after_b < -MARGIN_ATOL))
    worst = int(np.argmin(margins))
    s, a, b = triples[worst]
    return CheckReport(
        trials=len(triples),
        violations=violations,
        worst_margin=float(margins[worst]),
        seed=int(seed),
        kind="submodularity",
        details={
            "max_abs_margin": float(np.max(np.abs(margins))),
            "monotonicity_violations": monotone,
            "empty_set_value": empty_value,
            "worst_case": {"S": list(s), "a": a, "b": b},
        },
    )


# -- two-vector energy inequality -----------------------------------------------


def _angles(dist, rng, count, u_angle):
    kind, _, arg = dist.partition(":")
    if kind == "uniform":
        return rng.uniform(0.0, 2.0 * np.pi, count)
    if kind == "aligned":
        return np.full(count, u_angle)
    if kind == "fixed":
        return np.full(count, u_angle + np.deg2rad(float(arg)))
    if kind == "vonmises":
        return rng.vonmises(u_angle, float(arg), count)
    raise ValueError(f"unknown angle distribution {dist!r} (uniform, aligned, fixed:<deg>, vonmises:<kappa>)")


def check_lemma1(dist="uniform", trials=10**6, seed=0, orthonormal=False, radius="unit"):
    """Monte Carlo check of ``E||y||^2 >= E{||y - <y,u>u||^2 + ||y - <y,v>v||^2}``.

    ``u`` and ``v`` are random unit vectors of a real plane (orthogonal when
    ``orthonormal``); ``y`` lies in that plane with its angle drawn from
    ``dist`` (measured from the x axis, or from ``u`` for ``aligned`` and
    ``fixed``) and radius 1 (``"unit"``) or Rayleigh-distributed.

    The inequality reduces to ``E<y,u>^2 + E<y,v>^2 >= E||y||^2``. The report
    counts a violation when that gap is negative beyond three standard errors.
    """
    rng = np.random.default_rng(seed)
    u_angle = rng.uniform(0.0, 2.0 * np.pi)
    v_angle = u_angle + np.pi / 2 if orthonormal else rng.uniform(0.0, 2.0 * np.pi)
    theta = _angles(dist, rng, trials, u_angle)
    if radius == "unit":
        rad = np.ones(trials)
    elif radius == "rayleigh":
        rad = rng.rayleigh(1.0, trials)
    else:
        raise ValueError(f"unknown radial law {radius!r}")
    energy = rad**2
    proj_u = energy * np.cos(theta - u_angle) ** 2
    proj_v = energy * np.cos(theta - v_angle) ** 2
    # the per-sample form of both sides of the original inequality
    lhs = energy
    rhs = (energy - proj_u) + (energy - proj_v)
    gap = lhs - rhs
    stderr = float(np.std(gap, ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    mean_gap = float(np.mean(gap))
    violated = mean_gap < -3.0 * stderr
    return CheckReport(
        trials=int(trials),
        violations=int(violated),
        worst_margin=mean_gap,
        seed=int(seed),
        kind="lemma1",
        details={
            "dist": dist,
            "lhs_mean": float(np.mean(lhs)),
            "rhs_mean": float(np.mean(rhs)),
            "gap_stderr": stderr,
            "ratio_u": float(np.mean(proj_u) / np.mean(energy)),
            "ratio_v": float(np.mean(proj_v) / np.mean(energy)),
            "equal_within_3se": bool(abs(mean_gap) <= 3.0 * stderr),
            "u_v_angle_deg": float(np.rad2deg((v_angle - u_angle) % (2 * np.pi))),
        },
    )


# -- finite-sample variance -----------------------------------------------------


def estimate_sigma2(dictionary, r_y, m, trials=200, seed=0, generator=None, max_size=None):
    """Estimate ``max_S E|f_m(S) - f(S)|^2`` by Monte Carlo.

    ``f(S) = trace(P_S R_y)``; ``f_m`` uses ``m`` fresh targets per trial from
    ``generator(rng, m) -> (m x M)`` (default ``CN(0, R_y)``). Subsets up to
    ``max_size`` atoms (all subsets by default) are enumerated.
    """
    r_y = SecondMoment(r_y).r
    n = dictionary.n
    max_size = n if max_size is None else max_size
    count = _count_cardinality(n, max_size)
    if count > MAX_SIGMA2_SETS:
        raise GuardExceeded(f"{count} subsets exceed the guard of {MAX_SIGMA2_SETS}")
    sets = [c for s in range(max_size + 1) for c in combinations(range(n), s)]
    packed = kernels.pack_subsets(sets)
    phi = dictionary.atoms
    exact = kernels.subset_values(phi, r_y, packed)
    rng = np.random.default_rng(seed)
    if generator is None:
        def generator(g, k):
            return sample_targets(g, r_y, k)
    sq = np.zeros(len(sets))
    for _ in range(trials):
        y = np.asarray(generator(rng, m), dtype=np.complex128)
        r_hat = y.T @ y.conj() / y.shape[0]
        sq += (kernels.subset_values(phi, r_hat, packed) - exact) ** 2
    return float(np.max(sq / trials))
