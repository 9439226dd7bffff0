"""Time the numba kernels against their numpy fallbacks on n = 4 workloads.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--quick]

Each row reports the best wall time of both variants and checks that they
return the same answer.  The numba variants are warmed up once first so JIT
compilation is not timed.
"""

import argparse
import time

import numpy as np

from cnflab import kernels as K
from cnflab.formula import universe

FULL = np.uint64(0xFFFF)


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def workloads(quick):
    U = universe(4)
    masks = U.masks
    suffix = K.suffix_unions(masks)
    binom = K.binom_table(32)
    empty = np.zeros(0, np.uint64)
    rng = np.random.default_rng(0)
    sels = np.argpartition(rng.random((20_000, 32)), 11, axis=1)[:, :12].astype(np.int64)
    sizes = np.full(len(sels), 12, dtype=np.int64)
    big = 10 ** 12
    scan_m = 3 if quick else 4
    dfs_m = 9 if quick else 10

    def dfs_unsat(fn):
        return lambda: sum(int(fn(masks, suffix, FULL, 2, dfs_m, f, binom, big)[0])
                           for f in range(32))

    def dfs_ins(fn):
        return lambda: sum(int(fn(masks, suffix, FULL, 9, f, big, empty, 0)[0])
                           for f in range(32))

    items = np.uint64(1) << np.arange(0, 32, 2, dtype=np.uint64)
    catalog = np.array([2 ** 40], dtype=np.uint64)  # never hit: full walk

    return [
        (f"exhaustive_sat_scan m={scan_m}",
         lambda: tuple(K.nb_exhaustive_sat_scan(masks, U.cvars, U.cpols, 4, scan_m)),
         lambda: tuple(K.np_exhaustive_sat_scan(masks, U.cvars, U.cpols, 4, scan_m))),
        ("batch_sat_scan 20k x m=12",
         lambda: K.nb_batch_sat_scan(masks, U.cvars, U.cpols, 4, sels, sizes).sum(),
         lambda: K.np_batch_sat_scan(masks, U.cvars, U.cpols, 4, sels, sizes).sum()),
        ("batch_ins_scan 20k x m=12",
         lambda: K.nb_batch_ins_scan(masks, 4, sels, sizes).sum(),
         lambda: K.np_batch_ins_scan(masks, 4, sels, sizes).sum()),
        (f"unsat_dfs all units m={dfs_m}", dfs_unsat(K.nb_unsat_dfs_unit),
         dfs_unsat(K.np_unsat_dfs_unit)),
        ("ins_dfs all units m=9", dfs_ins(K.nb_ins_dfs_unit), dfs_ins(K.np_ins_dfs_unit)),
        ("collect_cover_keys m=8",
         lambda: int(K.nb_collect_cover_keys(masks, FULL, 8, empty)),
         lambda: int(K.np_collect_cover_keys(masks, FULL, 8, empty))),
        ("first_subset_hit 16 choose 8",
         lambda: tuple(map(int, K.nb_first_subset_hit(items, 8, catalog, big))),
         lambda: tuple(map(int, K.np_first_subset_hit(items, 8, catalog, big)))),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller workloads")
    args = ap.parse_args()

    rows = workloads(args.quick)
    for _, nb, _ in rows:
        nb()  # compile
    print(f"{'kernel':34} {'numba s':>10} {'numpy s':>10} {'speedup':>9}  same")
    for name, nb, np_ in rows:
        t_nb, a = best_of(nb, args.repeat)
        t_np, b = best_of(np_, max(1, args.repeat // 3))
        same = a == b
        print(f"{name:34} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f}x  {same}")


if __name__ == "__main__":
    main()
