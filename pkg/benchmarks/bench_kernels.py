"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--size 64] [--repeat 7]

Prints one row per kernel (best of ``--repeat`` runs) plus a short
end-to-end fit, then checks that both backends agree on the outputs.
"""

import argparse
import sys
import timeit
from contextlib import contextmanager

import numpy as np

from vesselmip import kernels
from vesselmip.harness import Condition, build_supervision, random_axis
from vesselmip.optimfit import FitConfig, fit
from vesselmip.phantom import standard_suite

NAMES = ["ray_extrema", "ray_argmax", "fill_spans", "adam_step", "sigmoid_backward", "sigmoid"]


@contextmanager
def using(impl):
    saved = {k: getattr(kernels, k) for k in NAMES}
    for k in NAMES:
        setattr(kernels, k, getattr(impl, k))
    try:
        yield
    finally:
        for k, f in saved.items():
            setattr(kernels, k, f)


def cases(n, rng):
    vol = rng.random((n, n, n)).astype(np.float32)
    vm = np.moveaxis(vol, 0, -1)  # strided, like a projection along x
    vm64 = vm.astype(np.float64)
    mx, fw, bw = kernels.backends()["python"].ray_extrema(vm)
    ann = rng.random((n, n)) > 0.8
    flat = rng.normal(size=n**3)
    y = rng.random(n**3)

    def adam(mod):
        theta, m, v = flat.copy(), np.zeros_like(flat), np.zeros_like(flat)
        return lambda: mod.adam_step(theta, y, m, v, 0.05, 0.9, 0.999, 1e-8, 3)

    return {
        "ray_extrema": lambda mod: (lambda: mod.ray_extrema(vm)),
        "ray_argmax": lambda mod: (lambda: mod.ray_argmax(vm64)),
        "fill_spans": lambda mod: (lambda: mod.fill_spans(vm, ann, fw, bw, mx, 0.05)),
        "adam_step": adam,
        "sigmoid_backward": lambda mod: (lambda: mod.sigmoid_backward(flat, y)),
        "sigmoid": lambda mod: (lambda: mod.sigmoid(flat)),
    }


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=7)
    ap.add_argument("--fit-steps", type=int, default=50)
    args = ap.parse_args(argv)

    mods = kernels.backends()
    if "cython" not in mods:
        print("compiled kernels are not built; only the fallback is available", file=sys.stderr)
    rng = np.random.default_rng(0)
    table = cases(args.size, rng)

    print(f"kernel timings, {args.size}^3, best of {args.repeat} (ms)")
    print(f"{'kernel':<18}" + "".join(f"{name:>10}" for name in mods) + "   speedup")
    for kernel, make in table.items():
        times = {name: 1e3 * best(make(mod), args.repeat) for name, mod in mods.items()}
        row = f"{kernel:<18}" + "".join(f"{t:>10.3f}" for t in times.values())
        if "cython" in times:
            row += f"   {times['python'] / times['cython']:>6.2f}x"
        print(row)

    p = standard_suite(1, dims=(args.size,) * 3)[0]
    cond = Condition.parse("rand1+d")
    s = build_supervision(p, cond, (random_axis(0, p.seed),), 0.5, 0.05)
    cfg = FitConfig(steps=args.fit_steps)
    print(f"\nend-to-end fit, rand1+d, {args.fit_steps} steps")
    masks = {}
    for name, mod in mods.items():
        with using(mod):
            t = best(lambda: masks.__setitem__(name, fit(s, cfg).mask), 3)
        print(f"  {name:<8} {1e3 * t / args.fit_steps:8.2f} ms/step")
    if len(masks) == 2:
        same = np.array_equal(masks["python"], masks["cython"])
        print(f"  masks identical across backends: {same}")


if __name__ == "__main__":
    main()
