"""Smoke test for the rfselect_py extension module."""

import math

import rfselect_py as rf


def main():
    g = rf.Graph([[1.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 1.0]])
    assert g.size == 3
    assert math.isclose(g.total, 4.4)

    obj = rf.Objective(g, groups=[0, 0, 1], tau=2.0, lambda1=1.0)
    lazy = obj.greedy(2)
    naive = obj.greedy(2, lazy=False)
    assert lazy["chosen"] == naive["chosen"]
    assert lazy["gains"] == naive["gains"]
    first = lazy["chosen"][0]
    assert math.isclose(obj.marginal_gain([], first), lazy["gains"][0])
    assert math.isclose(obj.evaluate(lazy["chosen"]), lazy["objective_trace"][-1])
    assert obj.marginal_gain([0], 2) >= obj.marginal_gain([0, 1], 2) >= 0.0

    assert rf.set_distance([[0.0, 0.0]], [[1.0, 0.0]]) == 1.0
    assert rf.set_distance([[0.0, 0.0], [2.0, 0.0]], [[1.0, 0.0]]) == 1.0
    a = [[[0.0, 0.0]]] * 29
    b = [[[1.0, 0.0]]] * 29
    assert rf.ped_distance(a, b) == 29.0
    assert rf.ped_distance(a, a) == 0.0

    assert len(rf.make_templates(64, 48)) == 256

    points, clusters = rf.synth_points()
    assert len(points) == 180 and sorted(set(clusters)) == [0, 1, 2]
    demo = rf.run_demo()
    assert len(demo["chosen"]) == 6

    try:
        rf.Objective(g, tau=0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("tau <= 1 accepted")

    print("smoke test passed:", demo["chosen"])


if __name__ == "__main__":
    main()
