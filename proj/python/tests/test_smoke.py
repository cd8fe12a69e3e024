import math

import numpy as np
import pytest

import ustail


def test_fenchel_closed_form():
    psi = ustail.Psi.mr(2.0, 0.0)
    u = 2.0
    assert ustail.nu_star(psi, u) == pytest.approx(math.exp(2 * u - 1) / 2, rel=1e-6)


def test_tail_bound_void_below_threshold():
    psi = ustail.Psi.mr(2.0, 0.0)
    assert ustail.tail_bound(psi, 1.0, 2.0) == 1.0
    assert ustail.tail_bound(psi, 1.0, 10.0) < 1.0


def test_grid_covering():
    points = np.linspace(0.0, 1.0, 101)
    assert ustail.grid_covering(points, 0.25) == 2


def test_u_stat_sample_variance():
    data = [0.3, -1.2, 2.5, 0.7, 1.1]
    value = ustail.u_stat(ustail.Kernel.half_sq_diff(), data)[0]
    assert value == pytest.approx(np.var(data, ddof=1), rel=1e-12)


def test_decomposition_of_product_kernel():
    d = ustail.hoeffding_decompose(ustail.Kernel.product(2), [-1.0, 1.0], [0.5, 0.5])
    assert d["rank"] == 2
    assert d["zetas"] == pytest.approx([0.0, 1.0], abs=1e-14)


def test_panel_is_deterministic_and_bounded():
    k = ustail.Kernel.parametric(1, "sin", [0.5, 0.75, 1.0])
    a = ustail.simulate_panel(k, "normal", 16, 400, seed=7)
    b = ustail.simulate_panel(k, "normal", 16, 400, seed=7, threads=1)
    assert a.shape == (400, 3)
    assert np.array_equal(a, b)
    p = list(range(2, 9))
    u = list(np.linspace(0.5, 5.0, 10))
    rep = ustail.theorem31_bound(a, p, 1, u)
    emp, upper = rep["curves"][0], rep["curves"][1]
    assert all(e <= b_ + 1e-12 for e, b_ in zip(emp["prob"], upper["prob"]))
