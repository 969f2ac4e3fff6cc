"""Toy reproduction, DOA Monte Carlo experiments and figure aggregation."""

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .constraints import Cardinality, Constraint, PartitionMatroid, constraint_from_config
from .dictionary import TOY_TARGET, UlaSpec, toy_dictionary, ula_steering_dictionary
from .oracle import MAX_FEASIBLE_SETS, enumerate_feasible, exhaustive_best
from .pursuit import mp, omp, representation_energy, smp

__all__ = [
    "ALGORITHMS",
    "CSV_HEADER",
    "CSV_VERSION_LINE",
    "DoaScenario",
    "TrialMetrics",
    "emit_figure_data",
    "estimation_error",
    "read_trials",
    "run_doa",
    "run_toy",
    "trials_to_csv",
]

CSV_VERSION_LINE = "# pursuitlab-csv v1"
CSV_HEADER = ["algorithm", "K", "trial", "objective", "est_error", "runtime_ns"]
ALGORITHMS = ("mp", "omp", "smp", "exhaustive", "original")
TOY_TOL = 1e-9


# -- toy example ----------------------------------------------------------------


def _toy_entry(result):
    return {
        "indices": list(result.selected),
        "atoms": [i + 1 for i in result.selected],
        "residual_norm": result.residual_norm,
        "objective": result.objective,
        "scores": [s.score for s in result.steps],
    }


def run_toy(recompute_inverse=False, literal_alpha=False):
    """Run MP, OMP and single-target SMP with K = 2 on the 3 x 3 toy instance.

    ``atoms`` in the report are 1-based; ``indices`` are 0-based.
    """
    t0 = time.perf_counter()
    d, y = toy_dictionary(), TOY_TARGET
    res = {
        "mp": mp(d, y, 2, literal_alpha=literal_alpha),
        "omp": omp(d, y, 2, recompute_inverse=recompute_inverse),
        "smp": smp(d, y, 2, recompute_inverse=recompute_inverse),
    }
    report = {name: _toy_entry(r) for name, r in res.items()}
    checks = {
        "mp_first_atom_is_1": res["mp"].selected[:1] == [0],
        "omp_selects_1_3": sorted(res["omp"].selected) == [0, 2],
        "omp_residual_norm_10": abs(res["omp"].residual_norm - 10.0) <= TOY_TOL,
        "smp_selects_1_2": sorted(res["smp"].selected) == [0, 1],
        "smp_residual_norm_1": abs(res["smp"].residual_norm - 1.0) <= TOY_TOL,
    }
    report["checks"] = checks
    report["ok"] = all(checks.values())
    report["elapsed_s"] = time.perf_counter() - t0
    return report


# -- DOA scenario ---------------------------------------------------------------


@dataclass
class DoaScenario:
    """ULA direction-of-arrival experiment.

    ``K`` is the number of sources, and also the cardinality (or matroid
    truncation) limit handed to the engines; a list sweeps several values.
    ``source_angles`` optionally pins the true sources to grid indices.
    ``snr_db = inf`` disables the noise.
    """

    M: int = 10
    N: int = 15
    K: list = field(default_factory=lambda: [1, 2, 3, 4, 5])
    snr_db: float = 20.0
    angle_span: tuple = (-80.0, 80.0)
    source_angles: list | None = None
    seed: int = 0
    trials: int = 100

    def __post_init__(self):
        self.K = [int(k) for k in (self.K if isinstance(self.K, (list, tuple)) else [self.K])]
        self.angle_span = tuple(float(a) for a in self.angle_span)
        if min(self.K) < 1 or max(self.K) > self.N:
            raise ValueError(f"K values {self.K} must lie in 1..N={self.N}")
        if self.source_angles is not None:
            src = [int(i) for i in self.source_angles]
            if len(set(src)) != len(src) or any(not 0 <= i < self.N for i in src):
                raise ValueError("source_angles must be distinct grid indices")
            if self.K != [len(src)]:
                raise ValueError("with fixed source_angles, K must equal their count")
            self.source_angles = src

    @classmethod
    def from_config(cls, doc):
        keys = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in doc.items() if k in keys})

    def dictionary(self):
        return ula_steering_dictionary(UlaSpec.uniform(self.M, self.N, self.angle_span))

    @property
    def span_width(self):
        return self.angle_span[1] - self.angle_span[0]


@dataclass
class TrialMetrics:
    algorithm: str
    K: int
    trial: int
    objective: float
    est_error: float
    runtime_ns: int


def estimation_error(estimated, true, span_width):
    """Squared distance between sorted angle lists.

    Entries beyond the shorter list each cost ``span_width**2``.
    """
    a = np.sort(np.asarray(estimated, dtype=float))
    b = np.sort(np.asarray(true, dtype=float))
    k = min(a.size, b.size)
    return float(np.sum((a[:k] - b[:k]) ** 2) + abs(a.size - b.size) * span_width**2)


def _constraint_for(base, k):
    if base is None:
        return Cardinality(k)
    if callable(base) and not isinstance(base, Constraint):
        return base(k)
    if isinstance(base, PartitionMatroid):
        return PartitionMatroid(base.groups, base.caps, max_size=k)
    return base


def _draw_sources(rng, scenario, k, constraint):
    if scenario.source_angles is not None:
        return list(scenario.source_angles)
    for _ in range(10_000):
        src = sorted(rng.choice(scenario.N, size=k, replace=False).tolist())
        if constraint.is_feasible(src):
            return src
    raise ValueError(f"could not draw {k} sources feasible under {constraint!r}")


def _draw_target(rng, dictionary, sources, snr_db):
    k = len(sources)
    x = np.exp(2j * np.pi * rng.uniform(0.0, 1.0, k))
    clean = dictionary.atoms[:, sources] @ x
    if math.isinf(snr_db) and snr_db > 0:
        return clean
    noise_energy = float(np.vdot(clean, clean).real) / 10 ** (snr_db / 10)
    sigma = math.sqrt(noise_energy / dictionary.m / 2)
    e = sigma * (rng.standard_normal(dictionary.m) + 1j * rng.standard_normal(dictionary.m))
    return clean + e


def _trial(task):
    scenario, algorithms, base, k, trial, opts = task
    d = scenario.dictionary()
    constraint = _constraint_for(base, k)
    rng = np.random.default_rng(np.random.SeedSequence([scenario.seed, k, trial]))
    sources = _draw_sources(rng, scenario, k, constraint)
    y = _draw_target(rng, d, sources, scenario.snr_db)
    true_angles = d.label_of(sources)
    rows = []
    for name in algorithms:
        t0 = time.perf_counter_ns()
        if name == "mp":
            selected = mp(d, y, constraint, literal_alpha=opts["literal"]).selected
        elif name == "omp":
            selected = omp(d, y, constraint, recompute_inverse=opts["recompute_inverse"]).selected
        elif name == "smp":
            selected = smp(d, y, constraint, recompute_inverse=opts["recompute_inverse"]).selected
        elif name == "exhaustive":
            selected, _ = exhaustive_best(y, d, constraint)
        elif name == "original":
            selected = sources
        else:
            raise ValueError(f"unknown algorithm {name!r}; choose from {ALGORITHMS}")
        elapsed = time.perf_counter_ns() - t0 if opts["timing"] and name != "original" else 0
        rows.append(
            TrialMetrics(
                name,
                k,
                trial,
                representation_energy(d, y, selected),
                estimation_error(d.label_of(selected), true_angles, scenario.span_width),
                elapsed,
            )
        )
    return rows


def run_doa(
    scenario,
    algorithms=("mp", "omp", "smp"),
    constraint=None,
    trials=None,
    literal=False,
    recompute_inverse=False,
    timing=True,
    workers=1,
):
    """Monte Carlo DOA experiment; returns TrialMetrics rows in (K, trial, algorithm) order.

    ``constraint`` is None (cardinality K), a Constraint (a partition matroid
    is truncated at K), a config dict, or a callable ``K -> Constraint``.
    Each (K, trial) pair draws from its own seed stream, so results do not
    depend on ``workers``. ``timing=False`` writes zero runtimes, making the
    output byte-reproducible.
    """
    algorithms = tuple(algorithms)
    for name in algorithms:
        if name not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {name!r}; choose from {ALGORITHMS}")
    if isinstance(constraint, dict):
        constraint = constraint_from_config(constraint)
    trials = scenario.trials if trials is None else int(trials)
    if "exhaustive" in algorithms:
        for k in scenario.K:
            # raises GuardExceeded on oversized instances before any trial runs
            enumerate_feasible(_constraint_for(constraint, k), scenario.N, MAX_FEASIBLE_SETS)
    opts = {"literal": literal, "recompute_inverse": recompute_inverse, "timing": timing}
    tasks = [(scenario, algorithms, constraint, k, t, opts) for k in scenario.K for t in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_trial, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        chunks = [_trial(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


# -- CSV ------------------------------------------------------------------------


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def trials_to_csv(rows):
    buf = io.StringIO()
    buf.write(CSV_VERSION_LINE + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        d = asdict(r) if isinstance(r, TrialMetrics) else r
        writer.writerow([d["algorithm"], _fmt(d["K"]), _fmt(d["trial"])] + [_fmt(d[c]) for c in CSV_HEADER[3:5]] + [_fmt(int(d["runtime_ns"]))])
    return buf.getvalue()


def read_trials(text):
    """Parse trial CSV text into TrialMetrics; errors name the offending line."""
    rows = []
    header = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = next(csv.reader([line]))
        if header is None:
            if fields != CSV_HEADER:
                raise ValueError(f"line {lineno}: expected header {','.join(CSV_HEADER)}")
            header = fields
            continue
        if len(fields) != len(CSV_HEADER):
            raise ValueError(f"line {lineno}: expected {len(CSV_HEADER)} fields, got {len(fields)}")
        try:
            rows.append(
                TrialMetrics(
                    fields[0], int(fields[1]), int(fields[2]), float(fields[3]), float(fields[4]), int(float(fields[5]))
                )
            )
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if header is None:
        raise ValueError("no CSV header found")
    return rows


def _mean_stderr(values):
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return float(v.mean()), 0.0
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def emit_figure_data(text):
    """Aggregate trial CSV text into per-(algorithm, K) means and standard errors."""
    rows = read_trials(text)
    groups = {}
    for r in rows:
        groups.setdefault((r.algorithm, r.K), []).append(r)
    buf = io.StringIO()
    buf.write(CSV_VERSION_LINE + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    metrics = ("objective", "est_error", "runtime_ns")
    writer.writerow(["algorithm", "K", "n"] + [f"{m}_{s}" for m in metrics for s in ("mean", "stderr")])
    for (alg, k), members in sorted(groups.items()):
        out = [alg, str(k), str(len(members))]
        for m in metrics:
            out += [_fmt(x) for x in _mean_stderr([getattr(r, m) for r in members])]
        writer.writerow(out)
    return buf.getvalue()


def summarize(rows):
    """``{(algorithm, K): {metric: (mean, stderr)}}`` for in-process use."""
    groups = {}
    for r in rows:
        groups.setdefault((r.algorithm, r.K), []).append(r)
    return {
        key: {m: _mean_stderr([getattr(r, m) for r in members]) for m in ("objective", "est_error", "runtime_ns")}
        for key, members in groups.items()
    }


def paired_gap(rows, better, worse, k):
    """Mean and standard error of the per-trial objective difference ``better - worse``."""
    by = {(r.algorithm, r.trial): r.objective for r in rows if r.K == k}
    trials = sorted({t for (a, t) in by if a == better})
    diffs = [by[(better, t)] - by[(worse, t)] for t in trials]
    return _mean_stderr(diffs)
