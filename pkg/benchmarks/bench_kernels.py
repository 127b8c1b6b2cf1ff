"""Time each kernel in its numba and numpy forms on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

The numba column includes one warm-up call so compilation is not timed.
"""

from __future__ import annotations

import argparse
import itertools
import math
import time

import numpy as np

from boxtopos import kernels
from boxtopos._accel import HAVE_NUMBA
from boxtopos.logic import pr_presentation
from boxtopos.phase_space import phase_space
from boxtopos.polytope import independent_equalities, integer_row
from boxtopos.poset import _kernel_inputs, poset_product, chain
from boxtopos.states import equality_system


def _upper_set_case():
    pts = phase_space(pr_presentation()).points
    _, strict, order = _kernel_inputs(pts)
    return (strict, order), "upper sets, PR phase space (25 points)"


def _closed_case():
    p = poset_product(chain(4), chain(5))
    up = np.array(p.up_masks, dtype=np.int64)
    return (up, len(p)), "subset filter, 4x5 grid (2^20 subsets)"


def _basis_case():
    coords, rows, rhs = equality_system(pr_presentation())
    rows, rhs, _ = independent_equalities(rows, rhs)
    ints = [integer_row(list(r) + [v]) for r, v in zip(rows, rhs)]
    n, m = len(coords), len(rows)
    a = np.array([r[:n] for r in ints], dtype=np.int64)
    b = np.array([r[n] for r in ints], dtype=np.int64)
    combos = np.array(list(itertools.combinations(range(n), m)), dtype=np.int64)
    return (a, b, combos), f"basis solves, PR system ({math.comb(n, m)} bases)"


CASES = [
    ("upper_set_masks", _upper_set_case),
    ("closed_masks", _closed_case),
    ("basis_solve", _basis_case),
]


def _time(fn, args, repeat: int) -> float:
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    print(f"numba available: {HAVE_NUMBA}; default backend: {kernels.BACKEND}")
    print(f"{'kernel':<18}{'case':<44}{'numpy s':>10}{'numba s':>10}{'speedup':>9}  agree")
    for name, make in CASES:
        inputs, desc = make()
        np_fn = getattr(kernels, f"{name}_numpy")
        nb_fn = getattr(kernels, f"{name}_numba")
        t_np = _time(np_fn, inputs, args.repeat)
        ref = np_fn(*inputs)
        if HAVE_NUMBA:
            got = nb_fn(*inputs)  # warm-up / compile
            t_nb = _time(nb_fn, inputs, args.repeat)
            agree = _same(ref, got)
            print(f"{name:<18}{desc:<44}{t_np:>10.4f}{t_nb:>10.4f}{t_np / t_nb:>8.1f}x  {agree}")
        else:
            print(f"{name:<18}{desc:<44}{t_np:>10.4f}{'-':>10}{'-':>9}  -")


if __name__ == "__main__":
    main()
