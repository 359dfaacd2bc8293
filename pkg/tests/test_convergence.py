from __future__ import annotations

import math
import warnings

import pytest
from hypothesis import given, strategies as st

from willmore_fb import convergence as C
from willmore_fb.errors import NonMonotone


@given(st.floats(0.5, 6.0), st.floats(1e-3, 10.0))
def test_observed_order_recovers_power_law(p, c):
    hs = [0.1, 0.05, 0.025, 0.0125]
    table = C.convergence_table("q", hs, [c * h**p for h in hs], target=0.0)
    assert all(math.isclose(o, p, rel_tol=1e-6) for o in table.orders)


def test_orders_need_three_rungs():
    assert C.observed_orders([0.1, 0.05], [1.0, 0.25]) == [None, None]


def test_non_monotone_warning():
    with pytest.warns(NonMonotone):
        C.convergence_table("q", [0.1, 0.05, 0.025], [1.1, 1.2, 1.05], target=1.0)


def test_reference_without_target():
    hs = [0.1, 0.05, 0.025, 0.0125]
    table = C.convergence_table("q", hs, [2.0 + h**2 for h in hs])
    assert table.rows[-1].order is None
    assert table.final_order is not None


def test_run_config_validation():
    with pytest.raises(ValueError):
        C.RunConfig("converge", tol_constraint=0.0)
    with pytest.raises(ValueError):
        C.RunConfig("converge", ladder=((65, 33), (65, 65)))
    assert C.RunConfig("x", ladder=[[9, 5], [17, 9]]).ladder == ((9, 5), (17, 9))


def test_hemisphere_study_and_csv():
    table = C.convergence_study("hemisphere_W")
    assert table.final_order >= 1.9
    rows = list(table.csv_rows())
    assert rows[0] == ["h", "value", "error", "order"] and len(rows) == 4


@pytest.mark.parametrize("name", ["sphere_operator", "parity", "density_identity", "bilaplacian"])
def test_standard_studies_run(name):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonMonotone)
        table = C.convergence_study(name, ladder=((33, 17), (65, 33), (129, 65)))
    assert len(table.rows) == 3


def test_sphere_operator_converges_on_interior_window():
    table = C.convergence_study("sphere_operator", ladder=((33, 17), (65, 33), (129, 65)))
    # second order is the design target; the symmetric band superconverges to about 4
    assert table.final_order >= 1.9


def test_parity_study_is_identically_zero():
    table = C.convergence_study("parity", ladder=((17, 9), (33, 17), (65, 33)))
    assert all(r.value == 0.0 for r in table.rows)
