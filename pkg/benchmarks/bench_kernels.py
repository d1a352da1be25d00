"""Compare the Newton-point kernels: numba, pure numpy and the exact Python loop.

    python3 benchmarks/bench_kernels.py [--ranks 5,6,7] [--repeat 3] [--python-max 5]

Each row times ``strata`` on type B with ``l = 1`` (one factor, composite
enumeration) and checks that all backends return the same strata.
"""
import argparse
import statistics
import time

from newton_strata import _kernels
from newton_strata.newton import strata
from newton_strata.rootdata import MinusculeSpec, enumeration_size, make_group_datum


def timed(fn, repeat):
    out, times = None, []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return out, statistics.median(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="B")
    ap.add_argument("--ranks", default="5,6,7")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--python-max", type=int, default=5, help="largest rank for the exact Python loop")
    args = ap.parse_args(argv)

    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    if _kernels.HAVE_NUMBA:
        # compile outside the timed region
        d = make_group_datum(args.family, 2)
        strata(d, MinusculeSpec.from_l(d, 1), backend="numba")

    print(f"{'group':<8}{'elements':>12}" + "".join(f"{b:>12}" for b in backends + ["python"]) + f"{'speedup':>10}")
    for r in (int(x) for x in args.ranks.split(",")):
        d = make_group_datum(args.family, r)
        mu = MinusculeSpec.from_l(d, 1)
        row, results = {}, {}
        for b in backends + (["python"] if r <= args.python_max else []):
            res, t = timed(lambda: strata(d, mu, backend=b), 1 if b == "python" else args.repeat)
            row[b] = t
            results[b] = [(s.nu, s.count) for s in res]
        ref = next(iter(results.values()))
        assert all(v == ref for v in results.values()), f"backends disagree on {d.label()}"
        speed = row["numpy"] / row["numba"] if "numba" in row else float("nan")
        cells = "".join(f"{row[b]:>11.3f}s" if b in row else f"{'-':>12}" for b in backends + ["python"])
        print(f"{d.label():<8}{enumeration_size(d, True, mu):>12}{cells}{speed:>9.1f}x")


if __name__ == "__main__":
    main()
