"""Smoke test for the pycrystalwalk extension module."""

import math

import pycrystalwalk as cw


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def main():
    sq = cw.Graph.builtin("square")
    assert sq.dim == 2 and sq.vertices == ["x0"]
    assert len(sq.edges) == 4
    assert sq.validate() == []

    again = cw.Graph.from_json(sq.to_json())
    assert again.to_json() == sq.to_json()

    a = cw.analyze(sq)
    assert (a.period_k, a.index) == (2, 2)
    assert close(a.volume, 4.0) and close(a.original_volume, 2.0)
    assert a.report()["period"]["K"] == 2

    heat = sq.heat_kernel(2)
    origin = sum(p for v, cell, p in heat if cell == [0, 0])
    assert close(origin, 0.25)

    tri = cw.analyze(cw.Graph.builtin("triangular"))
    assert close(tri.volume, math.sqrt(3.0))
    assert tri.lclt_sup_error(64) < 0.05

    out = a.a1([40, 80], mode="analytic")
    assert close(out["a1_analytic"], -0.5)

    clt = a.clt(64, [0.5, 1.0], 2000, 7)
    assert clt["report"]["pass"] and len(clt["steps"]) == 2

    try:
        cw.Graph.builtin("square", "alpha=2")
    except ValueError:
        pass
    else:
        raise AssertionError("bad params accepted")

    print("pycrystalwalk smoke test passed")


if __name__ == "__main__":
    main()
