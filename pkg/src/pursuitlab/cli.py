"""Command-line entry point: ``pursuitlab {toy,doa,check,oracle,bench}``."""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import kernels
from .bench import format_table, run_benchmark
from .constraints import Cardinality, constraint_from_config, constraint_to_config
from .dictionary import load_json, random_dictionary
from .experiments import DoaScenario, emit_figure_data, run_doa, run_toy, trials_to_csv
from .oracle import CheckReport, check_lemma1, check_submodularity, estimate_sigma2, exhaustive_best, random_psd
from .pursuit import SecondMoment, guarantee_probability, mp, omp, representation_energy, smp


def _global_options(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else 0)
    parser.add_argument("--config", type=Path, default=default, help="JSON run-config file")
    parser.add_argument("--out", type=Path, default=default, help="output path (default: stdout)")
    parser.add_argument(
        "--recompute-inverse",
        action="store_true",
        default=argparse.SUPPRESS if suppress else False,
        help="invert the Gram matrix directly at every step instead of updating it",
    )
    parser.add_argument(
        "--literal-paper-rules",
        action="store_true",
        default=argparse.SUPPRESS if suppress else False,
        help="MP uses |<R, phi>| as its coefficient; cost-ratio knapsack rule divides the magnitude",
    )


def build_parser():
    parser = argparse.ArgumentParser(prog="pursuitlab", description=__doc__)
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)

    sub.add_parser("toy", parents=[common], help="reproduce the 3-atom toy example")

    doa = sub.add_parser("doa", parents=[common], help="run a DOA Monte Carlo experiment and write trial CSV")
    doa.add_argument("--M", type=int)
    doa.add_argument("--N", type=int)
    doa.add_argument("--K", type=int, nargs="+")
    doa.add_argument("--snr-db", type=float)
    doa.add_argument("--trials", type=int)
    doa.add_argument("--algorithms", nargs="+", default=None)
    doa.add_argument("--matroid-pairs", action="store_true", help="partition matroid of consecutive pairs, cap 1")
    doa.add_argument("--no-timing", action="store_true", help="write runtime_ns = 0 for byte-stable output")
    doa.add_argument("--aggregate", type=Path, help="also write per-(algorithm, K) means and standard errors here")
    doa.add_argument("--workers", type=int, default=1)

    check = sub.add_parser("check", parents=[common], help="property checks; exit status 1 on any violation")
    check.add_argument("kind", choices=["submodularity", "modular", "lemma1", "sigma2"])
    check.add_argument("--instances", type=int, default=500)
    check.add_argument("--trials", type=int, default=None)
    check.add_argument("--max-m", type=int, default=6)
    check.add_argument("--max-n", type=int, default=10)
    check.add_argument("--dist", default="uniform")
    check.add_argument("--orthonormal", action="store_true")
    check.add_argument("--m-samples", type=int, default=50, help="targets per sample average (sigma2)")

    ora = sub.add_parser("oracle", parents=[common], help="compare greedy engines with exhaustive search")
    ora.add_argument("--dictionary", type=Path, help="dictionary JSON file (default: random)")
    ora.add_argument("--M", type=int, default=4)
    ora.add_argument("--N", type=int, default=6)
    ora.add_argument("--K", type=int, default=2)
    ora.add_argument("--objective", choices=["single", "expected"], default="expected")

    bench = sub.add_parser("bench", parents=[common], help="time the numba kernels against numpy")
    bench.add_argument("--repeat", type=int, default=5)
    bench.add_argument("--json", action="store_true")
    return parser


def _emit(text, out):
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).write_text(text)


def _load_config(path):
    return {} if path is None else json.loads(Path(path).read_text())


def cmd_toy(args):
    report = run_toy(args.recompute_inverse, args.literal_paper_rules)
    _emit(json.dumps(report, indent=2), args.out)
    return 0 if report["ok"] else 1


def cmd_doa(args):
    cfg = _load_config(args.config)
    scen = dict(cfg.get("scenario", cfg))
    for key in ("M", "N", "K", "trials"):
        if getattr(args, key) is not None:
            scen[key] = getattr(args, key)
    if args.snr_db is not None:
        scen["snr_db"] = args.snr_db
    scen.setdefault("seed", args.seed)
    scenario = DoaScenario.from_config(scen)
    constraint = cfg.get("constraint")
    if args.matroid_pairs:
        constraint = {"partition_matroid": {"n": scenario.N, "group_size": 2, "caps": 1}}
    algorithms = args.algorithms or cfg.get("algorithms") or ["mp", "omp", "smp"]
    rows = run_doa(
        scenario,
        algorithms,
        constraint,
        literal=args.literal_paper_rules,
        recompute_inverse=args.recompute_inverse,
        timing=not args.no_timing,
        workers=args.workers,
    )
    text = trials_to_csv(rows)
    _emit(text, args.out)
    if args.aggregate is not None:
        args.aggregate.write_text(emit_figure_data(text))
    return 0


def _submodularity_sweep(args, modular):
    rng = np.random.default_rng(args.seed)
    per = args.trials or 1
    violations = monotone = 0
    worst = float("inf")
    max_abs = 0.0
    for _ in range(args.instances):
        m = int(rng.integers(3 if modular else 2, args.max_m + 1))
        n = int(rng.integers(3, args.max_n + 1))
        d = random_dictionary(rng, m, n)
        if modular:
            # f saturates at M once |S + a + b| > M, so stay below that
            rep = check_submodularity(np.eye(m), d, per, seed=int(rng.integers(2**32)), max_size=m - 2)
        else:
            rep = check_submodularity(random_psd(rng, m), d, per, seed=int(rng.integers(2**32)))
        violations += rep.violations
        monotone += rep.details["monotonicity_violations"]
        worst = min(worst, rep.worst_margin)
        max_abs = max(max_abs, rep.details["max_abs_margin"])
    return CheckReport(
        trials=args.instances * per,
        violations=violations,
        worst_margin=worst,
        seed=args.seed,
        kind="modular" if modular else "submodularity",
        details={"instances": args.instances, "max_abs_margin": max_abs, "monotonicity_violations": monotone},
    )


def cmd_check(args):
    if args.kind in ("submodularity", "modular"):
        report = _submodularity_sweep(args, args.kind == "modular")
        if args.kind == "modular" and report.details["max_abs_margin"] > 1e-10:
            report.violations += 1
    elif args.kind == "lemma1":
        report = check_lemma1(args.dist, args.trials or 10**6, args.seed, orthonormal=args.orthonormal)
    else:
        rng = np.random.default_rng(args.seed)
        d = random_dictionary(rng, 3, 4)
        r = random_psd(rng, 3)
        trials = args.trials or 200
        s2 = estimate_sigma2(d, r, args.m_samples, trials, seed=args.seed)
        eps = 2.0 * np.sqrt(s2 / args.m_samples) if s2 > 0 else 1.0
        bound, log_p = guarantee_probability(2, args.m_samples, eps, s2)
        report = CheckReport(
            trials, 0, 0.0, args.seed, "sigma2",
            {"sigma2": s2, "m": args.m_samples, "eps_m": eps, "additive_bound_K2": bound, "log_p_K2": log_p},
        )
    _emit(report.to_json(), args.out)
    return 1 if report.violations > 0 else 0


def cmd_oracle(args):
    cfg = _load_config(args.config)
    rng = np.random.default_rng(args.seed)
    d = load_json(args.dictionary) if args.dictionary else random_dictionary(rng, args.M, args.N)
    constraint = constraint_from_config(cfg["constraint"]) if "constraint" in cfg else Cardinality(args.K)
    if args.objective == "expected":
        objective = SecondMoment(random_psd(rng, d.m))
    else:
        objective = rng.standard_normal(d.m) + 1j * rng.standard_normal(d.m)
    best, value = exhaustive_best(objective, d, constraint)
    out = {
        "constraint": constraint_to_config(constraint),
        "exhaustive": {"selected": best, "value": value},
    }
    runs = {"smp": smp(d, objective, constraint, recompute_inverse=args.recompute_inverse)}
    if args.objective == "single":
        runs["omp"] = omp(d, objective, constraint, recompute_inverse=args.recompute_inverse)
        runs["mp"] = mp(d, objective, constraint, literal_alpha=args.literal_paper_rules)
    for name, res in runs.items():
        v = representation_energy(d, objective, res.selected)
        out[name] = {"selected": res.selected, "value": v, "ratio": v / value if value > 0 else 1.0}
    _emit(json.dumps(out, indent=2), args.out)
    return 0


def cmd_bench(args):
    rows = run_benchmark(args.repeat, args.seed)
    text = json.dumps({"default_backend": kernels.BACKEND, "rows": rows}, indent=2) if args.json else format_table(rows)
    _emit(text, args.out)
    return 0


COMMANDS = {"toy": cmd_toy, "doa": cmd_doa, "check": cmd_check, "oracle": cmd_oracle, "bench": cmd_bench}


def main(argv=None):
    args = build_parser().parse_args(argv)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
