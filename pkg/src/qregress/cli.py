"""Command-line harness: generate, train, evaluate, report and reproduce.

Exit codes: 0 success or all targets met, 1 a target missed, 2 usage or
I/O error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io, metrology
from .analytic import SingularSystemError
from .ansatz import ANSATZ_KINDS, AnsatzSpec
from .datagen import (FAMILY_NAMES, DegenerateGroundStateError, SamplingExhaustedError, build_training_set,
                      make_family, midpoint_labels, random_labels, sample_mixed_by_negativity,
                      sample_pure_by_negativity, samples_to_set)
from .observable import ObservableSpec, SpectralMeasurement
from .optimize import DivergenceError
from .presets import PRESETS, RunContext
from .regression import (CostWeights, DegenerateFitError, TrainConfig, default_threads, evaluate, fit_bias,
                         train, train_bayes)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
SAMPLED_FAMILIES = ("pure-negativity", "mixed-negativity")
NUMERIC_ERRORS = (DivergenceError, SingularSystemError, DegenerateGroundStateError, SamplingExhaustedError,
                  DegenerateFitError, metrology.FisherSingularityError, np.linalg.LinAlgError, FloatingPointError)


class UsageError(Exception):
    pass


def _shots(value: str):
    if value == "exact":
        return None
    try:
        shots = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("shots must be 'exact' or a positive integer") from None
    if shots < 1:
        raise argparse.ArgumentTypeError("shots must be positive")
    return shots


def _family_params(args) -> dict:
    if args.family != "ising":
        return {}
    return {"n": args.n, "coupling": args.coupling, "h_min": args.h_min, "h_max": args.h_max}


def _family_from_args(args):
    return make_family(args.family, copies=args.copies, **_family_params(args))


# --- commands ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.family in SAMPLED_FAMILIES:
        if args.family == "pure-negativity":
            states, negs = sample_pure_by_negativity(args.count, args.bins, rng, squared=args.squared)
        else:
            states, negs = sample_mixed_by_negativity(args.count, args.bins, rng)
        labels = negs**2 if args.squared else negs
        training = samples_to_set(states, labels, args.family, args.copies, args.seed,
                                  metadata={"bins": args.bins, "squared": args.squared})
    else:
        family = _family_from_args(args)
        if args.grid == "midpoint":
            labels = midpoint_labels(family.a, family.b, args.count)
        else:
            labels = random_labels(family.a, family.b, args.count, rng)
        training = build_training_set(family, labels, seed=args.seed)
    io.save_dataset(training, args.out)
    lo, hi = training.labels.min(), training.labels.max()
    print(f"wrote {len(training)} entries ({training.family}, {training.n_qubits} qubits, "
          f"copies={training.copies}, labels in [{lo:.4g}, {hi:.4g}]) to {args.out}")
    return EXIT_OK


def _spec_from_args(args, n_qubits: int) -> ObservableSpec:
    measured = n_qubits if args.m is None else args.m
    total = n_qubits + args.naimark
    return ObservableSpec(n_qubits, measured, args.naimark, AnsatzSpec(total, args.layers, args.ansatz))


def cmd_train(args) -> int:
    training = io.load_dataset(args.data)
    spec = _spec_from_args(args, training.n_qubits)
    config = TrainConfig(max_iter=args.max_iter, shots=args.shots, seed=args.seed, restarts=args.restarts,
                         threads=args.threads)
    if args.bayes:
        model = train_bayes(training, spec, config)
    else:
        model = train(training, spec, CostWeights(args.w_ls, args.w_var), config)
    if args.bias_degree:
        model = fit_bias(model, training, args.bias_degree)
    io.save_model(model, args.out)
    history = args.history or str(Path(args.out).with_suffix("")) + "_history.csv"
    io.write_history_csv(model, history)
    print(f"cost {model.final_cost:.6g} after {len(model.history_cost) - 1} iterations "
          f"({model.message}); model -> {args.out}, history -> {history}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    model = io.load_model(args.model)
    test = io.load_dataset(args.data)
    result = evaluate(model, test)
    if args.out:
        io.write_csv(args.out, ("label", "prediction", "variance"),
                     zip(result.labels, result.predictions, result.variances))
    print(f"test MSE {result.mse:.6g} over {len(result.labels)} states")
    return EXIT_OK


def _grid(args) -> np.ndarray:
    if args.alphas is not None:
        return np.array(args.alphas, dtype=float)
    family = _family_from_args(args)
    lo = family.a if args.a is None else args.a
    hi = family.b if args.b is None else args.b
    return np.linspace(lo, hi, args.points)


def cmd_report(args) -> int:
    family = _family_from_args(args)
    if args.local_optimal is not None:
        measurement = SpectralMeasurement(metrology.local_optimal_observable(family, args.local_optimal))
    elif args.model:
        measurement = io.load_model(args.model).measurement()
    else:
        raise UsageError("report needs --model or --local-optimal")
    grid = _grid(args)
    if grid.size == 0:
        raise UsageError("report grid is empty")
    rows = metrology.fisher_report(measurement, family, grid, mu=args.mu, qfi_method=args.qfi_method)
    io.write_report_csv(rows, args.out)
    print(f"wrote {len(rows)} report rows to {args.out}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    if args.list:
        for preset in PRESETS.values():
            tag = " [long]" if preset.long else ""
            print(f"{preset.id:20s}{preset.description} -> {preset.targets}{tag}")
        return EXIT_OK
    if not args.id:
        raise UsageError("reproduce needs a preset id (see --list)")
    if args.id not in PRESETS:
        raise UsageError(f"unknown preset {args.id!r}; known: {', '.join(PRESETS)}")
    preset = PRESETS[args.id]
    if preset.long and not args.long:
        raise UsageError(f"{preset.id} is a long preset; pass --long to run it")
    result = preset.run(RunContext(seed=args.seed, threads=args.threads, out_dir=args.out_dir))
    for check in result.checks:
        print(check.line())
    print(f"{preset.id}: {'PASS' if result.passed else 'FAIL'}")
    return EXIT_OK if result.passed else EXIT_FAIL


# --- parser ---------------------------------------------------------------------------------

def _add_family_flags(p, required: bool = True) -> None:
    p.add_argument("--family", required=required, choices=FAMILY_NAMES)
    p.add_argument("--copies", type=int, default=1)
    p.add_argument("--n", type=int, default=8, help="Ising chain length")
    p.add_argument("--coupling", type=float, default=1.0, help="Ising coupling J")
    p.add_argument("--h-min", type=float, default=0.05)
    p.add_argument("--h-max", type=float, default=2.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qregress", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for cost evaluation (default: $QREGRESS_THREADS or 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a labelled dataset")
    gen.add_argument("--family", required=True, choices=FAMILY_NAMES + SAMPLED_FAMILIES)
    gen.add_argument("--copies", type=int, default=1)
    gen.add_argument("--n", type=int, default=8)
    gen.add_argument("--coupling", type=float, default=1.0)
    gen.add_argument("--h-min", type=float, default=0.05)
    gen.add_argument("--h-max", type=float, default=2.0)
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--grid", choices=("random", "midpoint"), default="random")
    gen.add_argument("--bins", type=int, default=20, help="negativity bins for sampled families")
    gen.add_argument("--squared", action="store_true", help="store squared negativities")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    tr = sub.add_parser("train", help="train an observable on a dataset")
    tr.add_argument("--data", required=True)
    tr.add_argument("--ansatz", choices=ANSATZ_KINDS, default="hea")
    tr.add_argument("--layers", type=int, default=1)
    tr.add_argument("--m", type=int, default=None, help="measured qubits (default: all)")
    tr.add_argument("--naimark", type=int, default=0, help="ancilla qubits")
    tr.add_argument("--w-ls", type=float, default=1.0)
    tr.add_argument("--w-var", type=float, default=1e-4)
    tr.add_argument("--bayes", action="store_true", help="minimize the Bayesian MSE instead")
    tr.add_argument("--shots", type=_shots, default=None, help="'exact' or a shot count")
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--restarts", type=int, default=1)
    tr.add_argument("--max-iter", type=int, default=2000)
    tr.add_argument("--bias-degree", type=int, default=0)
    tr.add_argument("--out", required=True)
    tr.add_argument("--history", default=None)
    tr.set_defaults(func=cmd_train)

    ev = sub.add_parser("evaluate", help="test MSE of a model on a dataset")
    ev.add_argument("--model", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--out", default=None)
    ev.set_defaults(func=cmd_evaluate)

    rep = sub.add_parser("report", help="Fisher-information report on a label grid")
    _add_family_flags(rep)
    rep.add_argument("--model", default=None)
    rep.add_argument("--local-optimal", type=float, default=None, metavar="ALPHA")
    rep.add_argument("--a", type=float, default=None)
    rep.add_argument("--b", type=float, default=None)
    rep.add_argument("--points", type=int, default=21)
    rep.add_argument("--alphas", type=float, nargs="*", default=None)
    rep.add_argument("--mu", type=int, default=1)
    rep.add_argument("--qfi-method", choices=metrology.QFI_METHODS, default="sld")
    rep.add_argument("--out", required=True)
    rep.set_defaults(func=cmd_report)

    rp = sub.add_parser("reproduce", help="run a named experiment and check its targets")
    rp.add_argument("id", nargs="?")
    rp.add_argument("--list", action="store_true")
    rp.add_argument("--long", action="store_true", help="allow long presets")
    rp.add_argument("--seed", type=int, default=0)
    rp.add_argument("--out-dir", type=Path, default=None)
    rp.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.threads is None:
            args.threads = default_threads()
        return args.func(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, io.SchemaError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
