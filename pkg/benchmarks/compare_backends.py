#!/usr/bin/env python3
"""Time the compiled simulation kernel against the pure-Python one.

Runs identical chunks through both backends, checks the outputs are
bit-for-bit equal, and reports repetitions per second plus the speedup.

    python3 benchmarks/compare_backends.py [--reps 20000] [--chunks 4]
"""

import argparse
import sys
import time

import numpy as np

from pconj.evalues import BayesFactorSpec, null_expectation
from pconj.kernel import (
    CODE_BONFERRONI,
    CODE_E_ARITHMETIC,
    CODE_E_HARMONIC,
    CODE_E_PRODUCT,
    CODE_FISHER,
    CODE_MINIMUM,
    CODE_STOUFFER,
    available_backends,
)
from pconj.models import DEFAULT_SIGMA, find_pattern

ALL_CODES = (
    CODE_FISHER, CODE_STOUFFER, CODE_MINIMUM, CODE_BONFERRONI,
    CODE_E_PRODUCT, CODE_E_ARITHMETIC, CODE_E_HARMONIC,
)

# one p-heavy and one e-heavy setting, both with a composite spec so the
# kernel exercises every branch it has
SETTINGS = (
    ("beta", "7c", 5.0, 2),
    ("normal", "9c", 1.5 * DEFAULT_SIGMA, 3),
)


def _run(run_chunk, model, label, strength, gamma, reps, chunks, seed=99):
    pattern = find_pattern(label, strength)
    model_kind = 0 if model == "beta" else 1
    spec = BayesFactorSpec(
        model=model, strength=strength,
        null_kind="composite" if any(b < 0 for b in pattern.base) else "simple",
        sigma=DEFAULT_SIGMA,
    )
    bounds = np.asarray(pattern.theta_bounds, dtype=np.float64)
    codes = np.asarray(ALL_CODES, dtype=np.int64)
    e0 = null_expectation(spec)
    out = np.zeros((len(codes), reps), dtype=np.float64)
    pieces = []
    start = time.perf_counter()
    for chunk in range(chunks):
        run_chunk(
            seed, chunk, reps, model_kind, DEFAULT_SIGMA, bounds, gamma, codes,
            1 if model_kind == 0 else 2, spec.alt_span, spec.null_span,
            1 if spec.null_kind == "composite" else 0, e0, out,
        )
        pieces.append(out.copy())
    elapsed = time.perf_counter() - start
    return np.concatenate(pieces, axis=1), elapsed


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=20_000, help="repetitions per chunk")
    parser.add_argument("--chunks", type=int, default=4)
    args = parser.parse_args(argv)

    backends = available_backends()
    if "fast" not in backends:
        print("compiled backend not built; nothing to compare", file=sys.stderr)
        return 1

    total = args.reps * args.chunks
    print(f"{total} repetitions per setting, both backends, all methods\n")
    print(f"{'setting':<28}{'pure reps/s':>14}{'fast reps/s':>14}{'speedup':>10}")
    for model, label, strength, gamma in SETTINGS:
        out_pure, t_pure = _run(
            backends["pure"], model, label, strength, gamma, args.reps, args.chunks
        )
        out_fast, t_fast = _run(
            backends["fast"], model, label, strength, gamma, args.reps, args.chunks
        )
        if not np.array_equal(out_pure, out_fast):
            print(f"MISMATCH in {model} pattern {label}", file=sys.stderr)
            return 1
        name = f"{model} pattern {label} gamma={gamma}"
        print(
            f"{name:<28}{total / t_pure:>14.0f}{total / t_fast:>14.0f}"
            f"{t_pure / t_fast:>9.1f}x"
        )
    print("\noutputs bit-identical across backends")
    return 0


if __name__ == "__main__":
    sys.exit(main())
