"""Regenerates rotation_norm_dense.json.

Dense-sampling oracle for the rotation deviation norm: at every sample x the
exact pointwise quantity ||Rx - x|| + sup_v ||Rv - v|| is evaluated and the
max over 10^6 seeded uniform points recorded, independently of the mesh
estimator.  Values are frozen so the suite never recomputes them.
"""

import json
import math
import pathlib

import numpy as np

N = 1_000_000
SEED = 20240817
THETAS = [0.002, 0.004, 0.008]


def dense_sup(theta, rng):
    total_max = 0.0
    chunk = 200_000
    left = N
    while left > 0:
        n = min(chunk, left)
        left -= n
        x = rng.normal(size=(n, 3))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        sin_colat = np.sqrt(np.maximum(1.0 - x[:, 2] ** 2, 0.0))
        # chord displacement 2 sin(theta/2) sin(colatitude); the tangent sup
        # equals 2 sin(theta/2) at every point (take v perpendicular to the
        # axis inside the tangent plane)
        vals = 2.0 * math.sin(theta / 2.0) * sin_colat + 2.0 * math.sin(theta / 2.0)
        total_max = max(total_max, float(vals.max()))
    return total_max


def main():
    rng = np.random.default_rng(SEED)
    out = {"n_samples": N, "seed": SEED, "entries": {}}
    for theta in THETAS:
        out["entries"][repr(theta)] = {
            "dense_sup": dense_sup(theta, rng),
            "analytic": 4.0 * math.sin(theta / 2.0),
        }
    path = pathlib.Path(__file__).with_name("rotation_norm_dense.json")
    path.write_text(json.dumps(out, indent=2) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
