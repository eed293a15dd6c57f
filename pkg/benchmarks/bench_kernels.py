#!/usr/bin/env python3
"""Benchmark the compiled kernel extension against the pure-numpy fallback.

Times the per-call primitives (gate application, phase normalization,
feature building, dedup keys) and a composite beam-expansion inner loop at
each qubit count, then prints a side-by-side table with speedups. Run after
building the extension:

    python benchmarks/bench_kernels.py [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mdlsynth._kernels import _ref

try:
    from mdlsynth._kernels import _fast
except ImportError:
    _fast = None

from mdlsynth.core import Circuit, action_set, circuit_unitary
from mdlsynth.datagen import PHASE_EPS


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    dim = 2**n
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def best_of(fn, repeats: int, min_batch: int = 200) -> float:
    """Seconds per call, best of ``repeats`` timed batches."""
    timings = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(min_batch):
            fn()
        timings.append((time.perf_counter() - t0) / min_batch)
    return min(timings)


def kernel_cases(impl, u: np.ndarray, n: int):
    pad = 2 ** (5 - n)
    cases = {
        "apply H": lambda: impl.apply_gate_left(u, impl.GATE_H, 0, 0),
        "adjoint T": lambda: impl.apply_gate_adjoint_left(u, impl.GATE_T, 0, 0),
        "phase normalize": lambda: impl.phase_normalize(u, PHASE_EPS),
        "features (pad to 5q)": lambda: impl.padded_features(u, pad, PHASE_EPS),
        "dedup key": lambda: impl.rounded_key(u, 9, PHASE_EPS),
    }
    if n >= 2:
        cases["apply CX"] = lambda: impl.apply_gate_left(u, impl.GATE_CX, 0, n - 1)
    return cases


def expansion_loop(impl, residuals, actions_coded, pad):
    def run():
        feats = []
        seen = set()
        for r in residuals:
            for code, q0, q1 in actions_coded:
                new = impl.apply_gate_adjoint_left(r, code, q0, q1)
                key = impl.rounded_key(new, 9, PHASE_EPS)
                if key in seen:
                    continue
                seen.add(key)
                feats.append(impl.padded_features(new, pad, PHASE_EPS))
        return np.stack(feats)

    return run


_CODES = {"H": 0, "S": 1, "T": 2, "CX": 3}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if _fast is None:
        print("compiled extension not built; showing the fallback only\n")

    rng = np.random.default_rng(0)
    print(f"{'case':<34}{'python':>12}{'compiled':>12}{'speedup':>9}")
    print("-" * 67)
    for n in (1, 2, 3, 4, 5):
        u = random_unitary(n, rng)
        ref_cases = kernel_cases(_ref, u, n)
        fast_cases = kernel_cases(_fast, u, n) if _fast else {}
        for name, fn in ref_cases.items():
            t_ref = best_of(fn, args.repeats)
            line = f"n={n} {name:<30}{t_ref * 1e6:>10.2f}us"
            if _fast:
                t_fast = best_of(fast_cases[name], args.repeats)
                line += f"{t_fast * 1e6:>10.2f}us{t_ref / t_fast:>8.1f}x"
            print(line)

        # composite: one beam-expansion step (10 candidates x all actions)
        residuals = [random_unitary(n, rng) for _ in range(10)]
        coded = [
            (_CODES[g.kind], g.qubits[0], g.qubits[1] if len(g.qubits) > 1 else 0)
            for g in action_set(n)
        ]
        pad = 2 ** (5 - n)
        t_ref = best_of(expansion_loop(_ref, residuals, coded, pad), args.repeats, 5)
        line = f"n={n} {'beam expansion step':<30}{t_ref * 1e3:>10.3f}ms"
        if _fast:
            t_fast = best_of(
                expansion_loop(_fast, residuals, coded, pad), args.repeats, 5
            )
            line += f"{t_fast * 1e3:>10.3f}ms{t_ref / t_fast:>8.1f}x"
        print(line)
        print()


if __name__ == "__main__":
    main()
