"""Smoke test for the depthkit_py extension.

Build and install first:
    pip install maturin
    pip install --no-build-isolation ./crates/python
"""

import math
import random

import depthkit_py as dk


def main():
    rng = random.Random(7)

    # Location depth of the origin among symmetric points in the plane.
    pts = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]
    inf = dk.InfluenceSet.location(pts, [0.0, 0.0])
    assert inf.n == 4 and inf.shape == (1, 2)
    assert dk.exact_depth(inf) == 2.0

    # SAP against the exact 2D depth on a Gaussian cloud.
    z = [[rng.gauss(0, 1), rng.gauss(0, 1)] for _ in range(40)]
    inf = dk.InfluenceSet.location(z, [0.1, -0.2])
    cfg = dk.SolverConfig(seed=3, starts=5)
    res = dk.depth(inf, cfg)
    exact = dk.exact_depth(inf)
    assert res.count >= exact, (res.count, exact)
    assert res.count - exact <= 2, (res.count, exact)
    v = res.direction
    assert abs(math.hypot(*v[0]) - 1.0) < 1e-9
    assert inf.d01(v) == res.count

    # Regression influences and the normalized form.
    x = [[1.0, rng.gauss(0, 1)] for _ in range(30)]
    y = [r[1] + rng.gauss(0, 1) for r in x]
    reg = dk.InfluenceSet.regression(x, y, [0.0, 1.0])
    assert len(reg.explicit()) == 30
    assert reg.normalized().n == 30

    # Depth curve with the sign family matches counting.
    data = [-2.0, -1.0, 0.5, 1.5, 3.0]
    curve = dk.depth_curve(data, [0.0, 1.0], contrast=True)
    assert curve == [(0.0, 2 / 5), (1.0, 2 / 5)], curve

    # Errors surface as Python exceptions.
    try:
        dk.InfluenceSet.location([[1.0, 2.0], [3.0]], [0.0, 0.0])
    except ValueError:
        pass
    else:
        raise AssertionError("ragged input accepted")
    try:
        dk.SolverConfig(phi="nope")
    except Exception:
        pass
    else:
        raise AssertionError("unknown phi accepted")

    mu, best = dk.deepest_location(z, cfg, 20)
    assert len(mu) == 2 and best.count >= 0
    print("smoke test passed:", res, best)


if __name__ == "__main__":
    main()
