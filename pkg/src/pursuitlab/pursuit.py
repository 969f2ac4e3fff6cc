"""Greedy pursuit engines.

``mp`` and ``omp`` are the classical rules. ``smp`` is the greedy maximiser of
the representation energy ``f(S) = E{||P_S y||^2}`` and comes in three
flavours selected by the objective:

* ``SingleTarget(y)``   -- the single-point estimate (OOMP),
* ``Ensemble(Y)``       -- the sample average over ``m`` targets,
* ``SecondMoment(R)``   -- the exact expectation ``trace(P_S R)``.

All engines share the same stopping rules, tie-break (lowest index within
``TIE_ATOL`` of the best score) and constraint interface.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .constraints import Cardinality, Knapsack, Matroid, MatroidOracleError, as_constraint
from .linalg import SPAN_TOL, GramInverseState, append_column, as_cvector, orthogonal_components, project

__all__ = [
    "Ensemble",
    "PursuitResult",
    "SecondMoment",
    "SingleTarget",
    "Step",
    "as_objective",
    "greedy_knapsack_best_of_two",
    "greedy_matroid",
    "guarantee_probability",
    "least_squares_coefficients",
    "moment_matrix",
    "mp",
    "omp",
    "representation_energy",
    "smp",
    "smp_ensemble",
    "smp_expected",
    "smp_single",
]

TIE_ATOL = 1e-12
STOP_RTOL = 1e-12
HERMITIAN_ATOL = 1e-10
PSD_ATOL = 1e-8


# -- objectives ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SingleTarget:
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "y", as_cvector(self.y, "y"))

    @property
    def m_dim(self):
        return self.y.size


@dataclass(frozen=True, eq=False)
class Ensemble:
    """``m`` target signals, stored as rows of ``targets`` (m x M)."""

    targets: np.ndarray

    def __post_init__(self):
        try:
            t = np.array([as_cvector(y, "target") for y in self.targets], dtype=np.complex128)
        except ValueError as exc:
            raise ValueError(f"inconsistent ensemble targets: {exc}") from None
        if t.ndim != 2 or t.shape[0] < 1:
            raise ValueError("an ensemble needs at least one target of common length")
        object.__setattr__(self, "targets", t)

    @property
    def m_dim(self):
        return self.targets.shape[1]


@dataclass(frozen=True, eq=False)
class SecondMoment:
    """Exact second-moment matrix ``R_y = E{y y^H}``; must be Hermitian PSD."""

    r: np.ndarray

    def __post_init__(self):
        r = np.array(self.r, dtype=np.complex128)
        if r.ndim != 2 or r.shape[0] != r.shape[1] or r.shape[0] == 0:
            raise ValueError(f"second-moment matrix must be square, got shape {r.shape}")
        if not np.all(np.isfinite(r)):
            raise ValueError("second-moment matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(r))))
        asym = float(np.max(np.abs(r - r.conj().T)))
        if asym > HERMITIAN_ATOL * scale:
            raise ValueError(f"second-moment matrix is not Hermitian (max asymmetry {asym:.3e})")
        r = 0.5 * (r + r.conj().T)
        lam = float(np.linalg.eigvalsh(r)[0])
        if lam < -PSD_ATOL * scale:
            raise ValueError(f"second-moment matrix is indefinite (min eigenvalue {lam:.3e})")
        object.__setattr__(self, "r", r)

    @property
    def m_dim(self):
        return self.r.shape[0]


def as_objective(obj):
    if isinstance(obj, (SingleTarget, Ensemble, SecondMoment)):
        return obj
    arr = np.asarray(obj)
    if arr.ndim == 1:
        return SingleTarget(arr)
    raise TypeError("pass a target vector or wrap targets in Ensemble / SecondMoment")


def moment_matrix(obj):
    """The matrix ``R`` for which the objective equals ``trace(P_S R)``."""
    obj = as_objective(obj)
    if isinstance(obj, SingleTarget):
        return np.outer(obj.y, obj.y.conj())
    if isinstance(obj, Ensemble):
        t = obj.targets
        return (t.T @ t.conj()) / t.shape[0]
    return obj.r


def representation_energy(dictionary, obj, selected):
    """Objective value of an arbitrary selection, evaluated by least squares.

    Independent of the incremental machinery, so it doubles as a reference.
    """
    obj = as_objective(obj)
    selected = list(selected)
    if isinstance(obj, SecondMoment):
        if not selected:
            return 0.0
        q = _orth_basis(dictionary.atoms[:, selected])
        return float(np.trace(q.conj().T @ obj.r @ q).real)
    t = obj.y[None, :] if isinstance(obj, SingleTarget) else obj.targets
    total = float(np.sum(np.abs(t) ** 2)) / t.shape[0]
    if not selected:
        return 0.0
    a = dictionary.atoms[:, selected]
    coef, *_ = np.linalg.lstsq(a, t.T, rcond=None)
    resid = t.T - a @ coef
    return total - float(np.sum(np.abs(resid) ** 2)) / t.shape[0]


def _orth_basis(a):
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    rank = int(np.sum(s > SPAN_TOL * max(1.0, s[0] if s.size else 0.0)))
    return u[:, :rank]


def least_squares_coefficients(dictionary, y, selected):
    """Least-squares coefficients of ``y`` on the selected atoms."""
    y = as_cvector(y, "y")
    coef, *_ = np.linalg.lstsq(dictionary.atoms[:, list(selected)], y, rcond=None)
    return coef


# -- results ------------------------------------------------------------------


@dataclass
class Step:
    index: int
    gain: float
    score: float
    objective: float
    residual_energy: float
    predicted_gain: float | None = None


@dataclass
class PursuitResult:
    """Outcome of one greedy run.

    ``objective`` is the engine's own energy accounting: ``||y||^2 - ||R||^2``
    for MP (its residual is not an orthogonal projection), the projection
    objective for OMP and SMP. ``steps[j].gain`` is the realised increase of
    that objective at step ``j``, so the gains telescope to ``objective``.
    """

    algorithm: str
    selected: list
    objective: float
    residual_energy: float
    steps: list = field(default_factory=list)
    stop_reason: str = "constraint"
    wall_time_ns: int = 0
    inner_products: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def residual_norm(self):
        return math.sqrt(max(self.residual_energy, 0.0))

    def gains(self):
        return [s.gain for s in self.steps]

    def objective_trace(self):
        return [s.objective for s in self.steps]


def _argmax_lowest(scores):
    """Index of the best finite score; lowest index among near-ties."""
    best = np.max(scores)
    if not np.isfinite(best):
        return None
    return int(np.flatnonzero(scores >= best - TIE_ATOL)[0])


def _check_dictionary(dictionary, m_dim):
    dictionary.require_unit_norm()
    if dictionary.m != m_dim:
        raise ValueError(f"target length {m_dim} does not match dictionary rows {dictionary.m}")


# -- classical engines --------------------------------------------------------


def mp(dictionary, y, k, literal_alpha=False):
    """Matching pursuit.

    At each step pick the unselected feasible atom maximising ``|<R, phi_i>|``
    and subtract ``alpha phi_i`` from the residual, with ``alpha = <R, phi_i>``.
    ``literal_alpha=True`` uses ``|<R, phi_i>|`` instead, which does not in
    general decrease the residual.
    """
    t0 = time.perf_counter_ns()
    y = as_cvector(y, "y")
    constraint = _cardinality_for(k, dictionary)
    _check_dictionary(dictionary, y.size)
    phi = dictionary.atoms
    total = float(np.vdot(y, y).real)
    resid = y.copy()
    energy = total
    selected, steps = [], []
    inner = 0
    stop = "constraint"
    while True:
        cand = constraint.extensions(selected, dictionary.n)
        if not cand:
            break
        if total > 0 and energy < STOP_RTOL * total:
            stop = "zero_residual"
            break
        corr = phi[:, cand].conj().T @ resid
        inner += len(cand)
        pick = _argmax_lowest(np.abs(corr))
        i = cand[pick]
        alpha = abs(corr[pick]) if literal_alpha else corr[pick]
        resid = resid - alpha * phi[:, i]
        new_energy = float(np.vdot(resid, resid).real)
        selected.append(i)
        steps.append(Step(i, energy - new_energy, float(abs(corr[pick])), total - new_energy, new_energy))
        energy = new_energy
    return PursuitResult(
        "mp", selected, total - energy, energy, steps, stop, time.perf_counter_ns() - t0, inner
    )


def omp(dictionary, y, k, recompute_inverse=False):
    """Orthogonal matching pursuit.

    Same selection rule as :func:`mp` but the residual is ``y - P_S y``.
    Atoms that already lie in the span of the selection are skipped.
    """
    return _greedy(dictionary, SingleTarget(y), k, rule="omp", recompute_inverse=recompute_inverse)


def _cardinality_for(k, dictionary):
    constraint = as_constraint(k)
    if isinstance(constraint, Cardinality) and constraint.k > dictionary.n:
        raise ValueError(f"K = {constraint.k} exceeds the number of atoms N = {dictionary.n}")
    return constraint


# -- the shared greedy loop ---------------------------------------------------


def _greedy(dictionary, objective, constraint, rule="gain", literal=False, recompute_inverse=False, name=None):
    """Greedy selection driven by the orthogonalised atoms.

    ``rule`` is one of ``"gain"`` (marginal energy gain), ``"gain_per_cost"``
    (gain divided by knapsack cost) or ``"omp"`` (``|phi_i^H R|``).
    ``literal`` replaces the squared score ``|v~^H R|^2`` by its magnitude,
    which only changes the cost-ratio ordering.
    """
    t0 = time.perf_counter_ns()
    objective = as_objective(objective)
    constraint = _cardinality_for(constraint, dictionary)
    _check_dictionary(dictionary, objective.m_dim)
    if rule == "omp" and not isinstance(objective, SingleTarget):
        raise ValueError("the OMP rule is defined for a single target")
    if rule == "gain_per_cost" and not isinstance(constraint, Knapsack):
        raise ValueError("the cost-ratio rule needs a knapsack constraint")

    phi = dictionary.atoms
    n = dictionary.n
    basis = GramInverseState.empty(dictionary.m)
    expected = isinstance(objective, SecondMoment)
    if expected:
        r = objective.r
        total = float(np.trace(r).real)
    else:
        targets = objective.y[:, None] if isinstance(objective, SingleTarget) else objective.targets.T
        weight = 1.0 / targets.shape[1]
        resid = targets.copy()
        total = weight * float(np.sum(np.abs(targets) ** 2))
    value = 0.0
    selected, steps = [], []
    inner = 0
    stop = "constraint"
    while True:
        cand = constraint.extensions(selected, n)
        if not cand:
            break
        if total > 0 and total - value < STOP_RTOL * total:
            stop = "zero_residual"
            break
        w, energies = orthogonal_components(basis, phi[:, cand])
        degenerate = np.sqrt(energies) <= SPAN_TOL * np.linalg.norm(phi[:, cand], axis=0)
        if np.all(degenerate):
            stop = "span_degenerate"
            break
        inner += len(cand)
        safe = np.where(degenerate, 1.0, energies)
        if expected:
            gains = np.einsum("ij,ik,kj->j", w.conj(), r, w).real / safe
        else:
            corr = w.conj().T @ resid
            gains = weight * np.sum(np.abs(corr) ** 2, axis=1) / safe
        if rule == "omp":
            scores = np.abs(phi[:, cand].conj().T @ resid[:, 0])
        else:
            scores = np.sqrt(gains) if literal else gains.copy()
            if rule == "gain_per_cost":
                scores = scores / constraint.costs[cand]
        scores[degenerate] = -np.inf
        pick = _argmax_lowest(scores)
        i = cand[pick]
        q = w[:, pick] / math.sqrt(energies[pick])
        basis = append_column(basis, q, recompute_inverse=recompute_inverse)
        selected.append(i)
        if expected:
            vr = basis.V.conj().T @ r @ basis.V
            new_value = float(np.trace(basis.Z @ vr).real)
        else:
            resid = targets - project(basis, targets)
            new_value = total - weight * float(np.sum(np.abs(resid) ** 2))
        steps.append(
            Step(i, new_value - value, float(scores[pick]), new_value, total - new_value, float(gains[pick]))
        )
        value = new_value
    return PursuitResult(
        name or ("omp" if rule == "omp" else "smp"),
        selected,
        value,
        total - value,
        steps,
        stop,
        time.perf_counter_ns() - t0,
        inner,
    )


def smp(dictionary, objective, constraint, rule="gain", literal=False, recompute_inverse=False):
    """Submodular matching pursuit for any objective flavour and constraint."""
    return _greedy(dictionary, objective, constraint, rule, literal, recompute_inverse, name="smp")


def smp_single(dictionary, y, constraint, recompute_inverse=False):
    """Single-point-estimate SMP (OOMP): maximise ``|v~_i^H R|`` each step."""
    return smp(dictionary, SingleTarget(y), constraint, recompute_inverse=recompute_inverse)


def smp_ensemble(dictionary, targets, constraint, recompute_inverse=False):
    """SMP on the sample average over a list of target signals."""
    return smp(dictionary, Ensemble(targets), constraint, recompute_inverse=recompute_inverse)


def smp_expected(dictionary, r_y, constraint, recompute_inverse=False):
    """SMP on the exact expected objective ``trace(P_S R_y)``."""
    return smp(dictionary, SecondMoment(r_y), constraint, recompute_inverse=recompute_inverse)


# -- constrained drivers ------------------------------------------------------


def greedy_knapsack_best_of_two(dictionary, objective, costs, budget, literal=False, recompute_inverse=False):
    """Run the plain and the cost-ratio greedy under a budget; keep the better.

    Both runs add atoms until nothing left fits the remaining budget. The
    returned result carries both runs under ``extra["runs"]``.
    """
    constraint = Knapsack(costs, budget)
    if constraint.costs.size != dictionary.n:
        raise ValueError(f"{constraint.costs.size} costs for {dictionary.n} atoms")
    plain = _greedy(dictionary, objective, constraint, "gain", literal, recompute_inverse, name="smp")
    ratio = _greedy(dictionary, objective, constraint, "gain_per_cost", literal, recompute_inverse, name="smp")
    best, label = (plain, "gain") if plain.objective >= ratio.objective else (ratio, "gain_per_cost")
    out = PursuitResult(
        "smp_knapsack",
        list(best.selected),
        best.objective,
        best.residual_energy,
        list(best.steps),
        best.stop_reason,
        plain.wall_time_ns + ratio.wall_time_ns,
        plain.inner_products + ratio.inner_products,
    )
    out.extra.update(runs={"gain": plain, "gain_per_cost": ratio}, chosen_rule=label, cost=constraint.cost(best.selected))
    return out


class _CheckedMatroid(Matroid):
    """Delegates to an oracle and verifies downward closure on accepted sets."""

    def __init__(self, inner):
        self.inner = inner

    def is_independent(self, selected):
        return self.inner.is_independent(selected)

    def extensions(self, selected, n):
        if not self.inner.is_independent([]):
            raise MatroidOracleError("oracle rejects the empty set")
        found = self.inner.extensions(selected, n)
        for j in found:
            grown = list(selected) + [j]
            for drop in range(len(grown) - 1):
                sub = grown[:drop] + grown[drop + 1 :]
                if not self.inner.is_independent(sub):
                    raise MatroidOracleError(
                        f"oracle accepts {sorted(grown)} but rejects its subset {sorted(sub)}"
                    )
        return found


def greedy_matroid(dictionary, objective, matroid, recompute_inverse=False, check_oracle=True):
    """SMP restricted to extensions that keep the selection independent."""
    if not isinstance(matroid, Matroid):
        raise TypeError("greedy_matroid needs a Matroid")
    constraint = _CheckedMatroid(matroid) if check_oracle else matroid
    return _greedy(dictionary, objective, constraint, "gain", False, recompute_inverse, name="smp_matroid")


# -- finite-sample guarantee --------------------------------------------------


def guarantee_probability(k, m, eps_m, sigma2):
    """Additive slack and log-probability of the finite-sample guarantee.

    Returns ``((2K+1) eps_m, ln p_K)`` with
    ``ln p_K = (2K+1) K ln(1 - sigma2 / (m eps_m^2))``.
    """
    if k < 1 or m < 1:
        raise ValueError("K and m must be positive")
    if not eps_m > 0:
        raise ValueError("eps_m must be positive")
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    ratio = sigma2 / (m * eps_m**2)
    if ratio >= 1.0:
        raise ValueError(
            f"need m * eps_m^2 > sigma2 for the bound to exist (got m eps_m^2 = {m * eps_m**2:g}, "
            f"sigma2 = {sigma2:g})"
        )
    return (2 * k + 1) * eps_m, (2 * k + 1) * k * math.log1p(-ratio)
