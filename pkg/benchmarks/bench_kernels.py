"""Wall-clock comparison of the numba and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

from holoseries import _backend, build_generator, g_sequence, h_sequence, models, simulate_paths


def _best(fn, repeat):
    fn()  # warm-up (compilation for numba)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    heston = build_generator(models.heston_like_2d())
    cp = build_generator(models.compound_poisson())
    sr = models.square_root()
    cpm = models.compound_poisson()
    return {
        "g_sequence heston_like_2d r=40": lambda: g_sequence(heston, [1.0, 0.5], 40),
        "h_sequence compound_poisson r=120": lambda: h_sequence(cp, [2.0], 1.0, 120),
        "mc square_root 50k paths x 256 steps": lambda: simulate_paths(sr, [0.3], 1.0, 50_000, 1 / 256, seed=0),
        "mc compound_poisson 50k paths x 256 steps": lambda: simulate_paths(cpm, [0.3], 1.0, 50_000, 1 / 256, seed=0),
    }


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    backends = ["numpy"] + (["numba"] if _backend.HAS_NUMBA else [])
    print(f"{'case':<45}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, fn in cases().items():
        row = {}
        for b in backends:
            with _backend.use_backend(b):
                row[b] = _best(fn, args.repeat)
        speed = row["numpy"] / row["numba"] if "numba" in row else float("nan")
        print(f"{name:<45}" + "".join(f"{row[b]:>11.3f}s" for b in backends) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
