"""Time the numba kernels against the pure-numpy fallback.

Each backend runs in its own interpreter because ``JFX_DISABLE_NUMBA`` is
read at import. Usage: ``python3 benchmarks/bench_accel.py [--repeat R]``.
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, time
import numpy as np
from jfx import _accel as A
from jfx import bessel as B
from jfx.jordan import get_algebra
from jfx.polyengine import engine

R = {repeat}
rng = np.random.default_rng(0)
out = {{"backend": A.backend()}}

def best(fn):
    fn()  # warm-up (includes JIT compilation or cache load)
    ts = []
    for _ in range(R):
        t = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t)
    return min(ts)

phi = engine(get_algebra("herm:2")).spherical_phi((3, 1))
exps, coeffs = phi.compiled()
pts = rng.normal(size=(20000, 4)) + 1j * rng.normal(size=(20000, 4))
out["poly_eval 20k pts"] = best(lambda: A.poly_eval_many(exps, coeffs, pts))

vals = rng.normal(size=200000).astype(complex)
out["compensated_sum 200k"] = best(lambda: A.compensated_sum(vals))

alg = get_algebra("sym:2")
coef, mom = B._series_tables(alg, 2.3, 2, 1, 80, "rank2")
a1 = (rng.normal(size=5000) * 4 + 1j * rng.normal(size=5000)).astype(complex)
a2 = (rng.normal(size=5000) * 2).astype(complex)
out["radial_series 5k pts"] = best(lambda: A.radial_series(a1, a2, coef, mom, 1e-14))
print(json.dumps(out))
"""


def run(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("JFX_DISABLE_NUMBA", None)
    if disable:
        env["JFX_DISABLE_NUMBA"] = "1"
    res = subprocess.run([sys.executable, "-c", WORKLOAD.format(repeat=repeat)], capture_output=True,
                         text=True, env=env, check=True)
    return json.loads(res.stdout)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    fast, slow = run(False, args.repeat), run(True, args.repeat)
    print(f"{'kernel':<24}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for key in fast:
        if key == "backend":
            continue
        print(f"{key:<24}{fast[key] * 1e3:>10.2f}ms{slow[key] * 1e3:>10.2f}ms{slow[key] / fast[key]:>9.1f}x")


if __name__ == "__main__":
    main()
