import math

import numpy as np
import pytest

from pursuitlab.constraints import PartitionMatroid, consecutive_groups
from pursuitlab.dictionary import incoherence
from pursuitlab.experiments import (
    CSV_HEADER,
    CSV_VERSION_LINE,
    DoaScenario,
    TrialMetrics,
    emit_figure_data,
    estimation_error,
    read_trials,
    run_doa,
    run_toy,
    trials_to_csv,
)
from pursuitlab.oracle import GuardExceeded


def test_toy_report():
    rep = run_toy()
    assert rep["ok"]
    assert rep["omp"]["atoms"] == [1, 3]
    assert rep["omp"]["residual_norm"] == pytest.approx(10.0, abs=1e-9)
    assert rep["smp"]["atoms"] == [1, 2]
    assert rep["smp"]["residual_norm"] == pytest.approx(1.0, abs=1e-9)
    assert rep["mp"]["atoms"][0] == 1


def test_toy_recompute_inverse():
    assert run_toy(recompute_inverse=True)["ok"]


def test_estimation_error_sorted_matching():
    assert estimation_error([10.0, -5.0], [-5.0, 10.0], 160.0) == 0.0
    assert estimation_error([1.0, 3.0], [0.0, 5.0], 160.0) == pytest.approx(1 + 4)


def test_estimation_error_unmatched_penalty():
    assert estimation_error([0.0], [0.0, 10.0], 160.0) == pytest.approx(160.0**2)


def test_noiseless_exact_recovery():
    # mu = 0.22 < 1/(2K - 1) for K <= 2, so greedy recovery is exact
    scen = DoaScenario(M=10, N=5, K=[1, 2], snr_db=math.inf, seed=4, trials=20, angle_span=(-40.0, 40.0))
    assert incoherence(scen.dictionary()) < 1 / 3
    rows = run_doa(scen, ("omp", "smp", "exhaustive"), timing=False)
    for r in rows:
        assert r.est_error == 0.0


def test_noiseless_exhaustive_on_coherent_grid():
    # the 15-point grid is highly coherent; only exhaustive search is exact
    scen = DoaScenario(M=10, N=15, K=[2, 3], snr_db=math.inf, seed=4, trials=20)
    rows = run_doa(scen, ("exhaustive",), timing=False)
    assert all(r.est_error == 0.0 for r in rows)


def test_rows_order_and_columns():
    scen = DoaScenario(M=6, N=8, K=[1, 2], seed=1, trials=3)
    rows = run_doa(scen, ("mp", "omp", "smp"), timing=False)
    assert [(r.K, r.trial, r.algorithm) for r in rows[:3]] == [(1, 0, "mp"), (1, 0, "omp"), (1, 0, "smp")]
    assert len(rows) == 2 * 3 * 3
    text = trials_to_csv(rows)
    lines = text.splitlines()
    assert lines[0] == CSV_VERSION_LINE
    assert lines[1] == ",".join(CSV_HEADER)


def test_byte_identical_csv():
    scen = DoaScenario(M=6, N=10, K=[1, 3], seed=7, trials=5)
    a = trials_to_csv(run_doa(scen, ("mp", "omp", "smp", "exhaustive"), timing=False))
    b = trials_to_csv(run_doa(scen, ("mp", "omp", "smp", "exhaustive"), timing=False))
    assert a == b


def test_workers_do_not_change_output():
    scen = DoaScenario(M=6, N=10, K=[1, 2], seed=7, trials=4)
    a = trials_to_csv(run_doa(scen, ("omp", "smp"), timing=False))
    b = trials_to_csv(run_doa(scen, ("omp", "smp"), timing=False, workers=2))
    assert a == b


def test_exhaustive_dominates_each_trial():
    scen = DoaScenario(M=8, N=12, K=[2, 3], seed=2, trials=10)
    rows = run_doa(scen, ("mp", "omp", "smp", "exhaustive"), timing=False)
    by = {}
    for r in rows:
        by.setdefault((r.K, r.trial), {})[r.algorithm] = r.objective
    for vals in by.values():
        for alg in ("mp", "omp", "smp"):
            assert vals["exhaustive"] >= vals[alg] - 1e-9 * vals["exhaustive"]


def test_objective_bounded_by_energy():
    scen = DoaScenario(M=6, N=10, K=[3], seed=5, trials=5)
    for r in run_doa(scen, ("mp", "omp", "smp", "original"), timing=False):
        assert r.objective >= 0 and r.est_error >= 0


def test_exhaustive_guard_checked_upfront():
    scen = DoaScenario(M=30, N=100, K=[5], seed=0, trials=1)
    with pytest.raises(GuardExceeded):
        run_doa(scen, ("smp", "exhaustive"))


def test_unknown_algorithm():
    with pytest.raises(ValueError):
        run_doa(DoaScenario(M=4, N=6, K=[1], trials=1), ("lasso",))


def test_matroid_scenario_runs():
    scen = DoaScenario(M=30, N=100, K=[3, 5], seed=0, trials=5)
    pm = PartitionMatroid(consecutive_groups(100, 2), 1)
    rows = run_doa(scen, ("mp", "omp", "smp"), pm, timing=False)
    assert len(rows) == 2 * 5 * 3


def test_matroid_selections_obey_groups():
    from pursuitlab.dictionary import UlaSpec, ula_steering_dictionary
    from pursuitlab.pursuit import greedy_matroid, mp, omp

    pm = PartitionMatroid(consecutive_groups(100, 2), 1, max_size=5)
    d = ula_steering_dictionary(UlaSpec.uniform(30, 100))
    rng = np.random.default_rng(0)
    for _ in range(5):
        y = rng.standard_normal(30) + 1j * rng.standard_normal(30)
        for res in (greedy_matroid(d, y, pm), omp(d, y, pm), mp(d, y, pm)):
            assert pm.is_independent(res.selected)
            assert len(res.selected) == 5


def test_scenario_validation():
    with pytest.raises(ValueError):
        DoaScenario(M=4, N=6, K=[7])
    with pytest.raises(ValueError):
        DoaScenario(M=4, N=6, K=[2], source_angles=[1, 1])


def test_fixed_source_angles():
    scen = DoaScenario(M=8, N=12, K=[2], source_angles=[3, 8], snr_db=math.inf, trials=3)
    rows = run_doa(scen, ("original", "smp"), timing=False)
    assert all(r.est_error == 0.0 for r in rows)


# -- aggregate CSV --------------------------------------------------------------


def _csv(objs):
    return trials_to_csv([TrialMetrics("smp", 1, t, float(v), 0.0, 0) for t, v in enumerate(objs)])


def test_aggregate_single_trial():
    out = emit_figure_data(_csv([4.0])).splitlines()
    fields = out[2].split(",")
    assert fields[:3] == ["smp", "1", "1"]
    assert float(fields[3]) == 4.0 and float(fields[4]) == 0.0


def test_aggregate_identical_trials():
    fields = emit_figure_data(_csv([2.5, 2.5])).splitlines()[2].split(",")
    assert float(fields[4]) == 0.0


def test_aggregate_three_trials():
    fields = emit_figure_data(_csv([1.0, 2.0, 3.0])).splitlines()[2].split(",")
    assert float(fields[3]) == pytest.approx(2.0)
    assert float(fields[4]) == pytest.approx(1 / math.sqrt(3), abs=1e-12)
    assert float(fields[4]) == pytest.approx(0.577, abs=1e-3)


def test_aggregate_stable_order():
    rows = [TrialMetrics(a, k, 0, 1.0, 0.0, 0) for a in ("smp", "mp") for k in (2, 1)]
    lines = emit_figure_data(trials_to_csv(rows)).splitlines()[2:]
    assert [l.split(",")[:2] for l in lines] == [["mp", "1"], ["mp", "2"], ["smp", "1"], ["smp", "2"]]


def test_malformed_csv_line_number():
    text = _csv([1.0, 2.0]) + "smp,1,notanint,1.0,0.0,0\n"
    with pytest.raises(ValueError, match="line 5"):
        emit_figure_data(text)


def test_csv_roundtrip():
    rows = [TrialMetrics("omp", 2, 1, 0.1 + 0.2, 3.5, 123)]
    assert read_trials(trials_to_csv(rows)) == rows
