"""Feasibility constraints for greedy atom selection.

Constraints answer two questions: is a selection feasible, and which atoms can
be added to a feasible selection without breaking feasibility. Matroids are
consumed only through :meth:`Matroid.is_independent`, so any user oracle plugs
in; :class:`PartitionMatroid` is the concrete one shipped here.
"""

from itertools import combinations

import numpy as np

__all__ = [
    "BUDGET_ATOL",
    "Cardinality",
    "Constraint",
    "InfeasibleSelection",
    "Knapsack",
    "Matroid",
    "MatroidOracleError",
    "OracleMatroid",
    "PartitionMatroid",
    "UniformMatroid",
    "as_constraint",
    "check_matroid_axioms",
    "consecutive_groups",
    "constraint_from_config",
    "constraint_to_config",
    "feasible_extensions",
]

BUDGET_ATOL = 1e-12


class InfeasibleSelection(ValueError):
    """The selection handed to a constraint is itself infeasible."""


class MatroidOracleError(RuntimeError):
    """An independence oracle answered inconsistently with the matroid axioms."""


class Constraint:
    def is_feasible(self, selected):
        raise NotImplementedError

    def extensions(self, selected, n):
        """Atoms ``j`` outside ``selected`` such that ``selected + [j]`` stays feasible."""
        chosen = set(selected)
        base = list(selected)
        return [j for j in range(n) if j not in chosen and self.is_feasible(base + [j])]


class Cardinality(Constraint):
    def __init__(self, k):
        if int(k) != k or k < 1:
            raise ValueError(f"cardinality must be a positive integer, got {k!r}")
        self.k = int(k)

    def is_feasible(self, selected):
        return len(selected) <= self.k

    def extensions(self, selected, n):
        if len(selected) >= self.k:
            return []
        chosen = set(selected)
        return [j for j in range(n) if j not in chosen]

    def __repr__(self):
        return f"Cardinality({self.k})"


class Knapsack(Constraint):
    """Per-atom positive costs with a total budget."""

    def __init__(self, costs, budget):
        costs = np.asarray(costs, dtype=float)
        if costs.ndim != 1 or costs.size == 0:
            raise ValueError("costs must be a non-empty vector")
        if not np.all(np.isfinite(costs)) or np.any(costs <= 0):
            bad = int(np.flatnonzero(~(costs > 0))[0]) if np.any(~(costs > 0)) else -1
            raise ValueError(f"knapsack costs must be positive and finite (atom {bad})")
        if not budget > 0:
            raise ValueError(f"budget must be positive, got {budget!r}")
        self.costs = costs
        self.budget = float(budget)

    def cost(self, selected):
        return float(sum(self.costs[j] for j in selected))

    def is_feasible(self, selected):
        return self.cost(selected) <= self.budget + BUDGET_ATOL

    def extensions(self, selected, n):
        if n != self.costs.size:
            raise ValueError(f"{self.costs.size} costs for a ground set of {n}")
        left = self.budget - self.cost(selected)
        chosen = set(selected)
        return [j for j in range(n) if j not in chosen and self.costs[j] <= left + BUDGET_ATOL]

    def __repr__(self):
        return f"Knapsack(costs={self.costs.tolist()}, budget={self.budget})"


class Matroid(Constraint):
    def is_independent(self, selected):
        raise NotImplementedError

    def is_feasible(self, selected):
        return self.is_independent(selected)


class OracleMatroid(Matroid):
    """Wrap a user callable ``oracle(frozenset) -> bool``."""

    def __init__(self, oracle):
        self.oracle = oracle

    def is_independent(self, selected):
        return bool(self.oracle(frozenset(selected)))


class UniformMatroid(Matroid):
    """All subsets of size at most ``k``; the matroid form of a cardinality limit."""

    def __init__(self, k):
        self.k = int(k)

    def is_independent(self, selected):
        return len(set(selected)) <= self.k


class PartitionMatroid(Matroid):
    """At most ``caps[g]`` atoms from each block ``groups[g]``.

    A scalar ``caps`` applies the same limit to every block.

    ``max_size`` optionally truncates the matroid to independent sets of at
    most that many atoms (a truncated matroid is still a matroid).
    """

    def __init__(self, groups, caps, max_size=None):
        groups = [tuple(int(i) for i in g) for g in groups]
        caps = [int(caps)] * len(groups) if np.isscalar(caps) else [int(c) for c in caps]
        if len(groups) != len(caps):
            raise ValueError(f"{len(groups)} groups but {len(caps)} caps")
        if any(c < 0 for c in caps):
            raise ValueError("caps must be nonnegative")
        flat = [i for g in groups for i in g]
        if sorted(flat) != list(range(len(flat))):
            raise ValueError("groups must be disjoint and cover 0..n-1")
        self.groups = groups
        self.caps = caps
        self.max_size = None if max_size is None else int(max_size)
        self.group_of = np.empty(len(flat), dtype=int)
        for g, members in enumerate(groups):
            self.group_of[list(members)] = g

    @property
    def n(self):
        return self.group_of.size

    def is_independent(self, selected):
        selected = list(selected)
        if len(set(selected)) != len(selected):
            return False
        if self.max_size is not None and len(selected) > self.max_size:
            return False
        if any(j < 0 or j >= self.n for j in selected):
            return False
        counts = np.bincount(self.group_of[selected], minlength=len(self.groups))
        return bool(np.all(counts <= self.caps))

    def extensions(self, selected, n):
        if n != self.n:
            raise ValueError(f"partition covers {self.n} atoms, ground set has {n}")
        if self.max_size is not None and len(selected) >= self.max_size:
            return []
        counts = np.bincount(self.group_of[list(selected)], minlength=len(self.groups))
        chosen = set(selected)
        return [
            j for j in range(n) if j not in chosen and counts[self.group_of[j]] < self.caps[self.group_of[j]]
        ]

    def __repr__(self):
        return f"PartitionMatroid({len(self.groups)} groups, max_size={self.max_size})"


def consecutive_groups(n, size):
    """Split ``0..n-1`` into consecutive blocks of ``size`` (last block may be short)."""
    return [list(range(s, min(s + size, n))) for s in range(0, n, size)]


def as_constraint(c):
    if isinstance(c, Constraint):
        return c
    if isinstance(c, (int, np.integer)):
        return Cardinality(int(c))
    raise TypeError(f"cannot interpret {c!r} as a constraint")


def feasible_extensions(constraint, selected, n):
    """Set of atoms whose addition keeps ``selected`` feasible.

    An empty result means a greedy driver should stop.
    """
    constraint = as_constraint(constraint)
    selected = list(selected)
    if len(set(selected)) != len(selected) or not constraint.is_feasible(selected):
        raise InfeasibleSelection(f"selection {selected} is infeasible under {constraint!r}")
    return set(constraint.extensions(selected, n))


def check_matroid_axioms(matroid, n):
    """Exhaustively test downward closure and exchange on a ground set of ``n``.

    Returns a list of human-readable violations (empty when the oracle is a
    matroid). Cost is O(4^n); keep ``n`` at 8 or below.
    """
    independent = set()
    for size in range(n + 1):
        for s in combinations(range(n), size):
            if matroid.is_independent(list(s)):
                independent.add(frozenset(s))
    problems = []
    if frozenset() not in independent:
        problems.append("empty set is not independent")
    for s in independent:
        for e in s:
            if s - {e} not in independent:
                problems.append(f"downward closure fails: {sorted(s)} minus {e}")
    by_size = sorted(independent, key=len)
    for a in by_size:
        for b in by_size:
            if len(b) > len(a) and not any(a | {x} in independent for x in b - a):
                problems.append(f"exchange fails: {sorted(a)} vs {sorted(b)}")
    return problems


def constraint_from_config(doc):
    """Parse ``{"cardinality": K}``, ``{"knapsack": {...}}`` or ``{"partition_matroid": {...}}``."""
    if not isinstance(doc, dict) or len(doc) != 1:
        raise ValueError(f"constraint config must have exactly one key, got {doc!r}")
    (kind, body), = doc.items()
    if kind == "cardinality":
        return Cardinality(body)
    if kind == "knapsack":
        return Knapsack(body["costs"], body["budget"])
    if kind == "partition_matroid":
        groups = body.get("groups")
        if groups is None:
            groups = consecutive_groups(int(body["n"]), int(body["group_size"]))
        caps = body.get("caps")
        if caps is None or isinstance(caps, int):
            caps = [1 if caps is None else caps] * len(groups)
        return PartitionMatroid(groups, caps, body.get("max_size"))
    raise ValueError(f"unknown constraint kind {kind!r}")


def constraint_to_config(c):
    if isinstance(c, Cardinality):
        return {"cardinality": c.k}
    if isinstance(c, Knapsack):
        return {"knapsack": {"costs": c.costs.tolist(), "budget": c.budget}}
    if isinstance(c, PartitionMatroid):
        body = {"groups": [list(g) for g in c.groups], "caps": list(c.caps)}
        if c.max_size is not None:
            body["max_size"] = c.max_size
        return {"partition_matroid": body}
    raise TypeError(f"no config form for {c!r}")
