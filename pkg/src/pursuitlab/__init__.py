"""Matching-pursuit variants with submodular selection rules.

MP, OMP and submodular matching pursuit (single target, sample average and
exact second moment) under cardinality, knapsack and matroid constraints,
plus exhaustive and Monte Carlo oracles and a DOA experiment harness.
"""

from .constraints import (
    Cardinality,
    Knapsack,
    Matroid,
    OracleMatroid,
    PartitionMatroid,
    UniformMatroid,
    feasible_extensions,
)
from .dictionary import (
    Dictionary,
    UlaSpec,
    epsilon_bound,
    incoherence,
    normalize_atoms,
    toy_dictionary,
    ula_steering_dictionary,
)
from .linalg import GramInverseState, SpanDegeneracy, append_column, orthogonal_component, project
from .pursuit import (
    Ensemble,
    PursuitResult,
    SecondMoment,
    SingleTarget,
    greedy_knapsack_best_of_two,
    greedy_matroid,
    guarantee_probability,
    mp,
    omp,
    smp,
    smp_ensemble,
    smp_expected,
    smp_single,
)

__version__ = "0.1.0"
