import json

import numpy as np
import pytest

from dipolar_sle.correlators import FieldSpec
from dipolar_sle.errors import ContourCollision
from dipolar_sle.geometry import Chart
from dipolar_sle.virasoro_checks import (
    IdentityReport, bpz_cardy_check, bpz_sides, kernel_boundary_suite, mode_action_check,
    ope_virasoro_suite, run_identity_suite, step_scaling_ratio, virasoro_onepoint,
    ward_equation_check, ward_ope_bivertex_check, ward_residual_3pt,
)


def test_identity_report_bookkeeping():
    rep = IdentityReport("demo")
    rep.add("a", 1e-9, 1e-6)
    rep.add("b", 5e-7, 1e-6)
    assert rep.passed and rep.max_residual == 5e-7 and rep.worst == "b"
    rep.add("c", 2e-6, 1e-6)
    assert not rep.passed and rep.worst == "c"
    assert json.loads(rep.to_json())["rows"][2]["label"] == "c"
    assert rep.summary().startswith("FAIL demo")
    with pytest.raises(ArithmeticError):
        rep.add("nan", float("nan"), 1.0)


def test_virasoro_onepoint_values():
    assert virasoro_onepoint(0.3 + 1.2j) == pytest.approx(1 / 48)
    # (H, 0, inf): w = log z, S_w = 1/(2 z^2), w'^2 = 1/z^2
    z = 0.7 + 0.4j
    assert virasoro_onepoint(z, Chart.HALF_PLANE_0INF) == pytest.approx(1 / (24 * z * z) + 1 / (48 * z * z))


def test_ward_ope_and_modes():
    assert ward_ope_bivertex_check().passed
    for n in (1, 0, -1, -2):
        assert mode_action_check(n).passed


def test_ward_equation_and_bpz():
    assert ward_equation_check().passed
    for spec, tol in ((FieldSpec.phi(), 1e-6), (FieldSpec.virasoro(), 1e-5)):
        assert bpz_cardy_check(spec, tol=tol).passed


@pytest.mark.parametrize("spec", [FieldSpec.vertex(0.5), FieldSpec.virasoro()], ids=["Vertex", "T"])
def test_bpz_fails_at_a_wrong_insertion_charge(spec):
    xi, z = 0.1, 0.2 + 0.6j
    lhs, rhs = bpz_sides(spec, xi, z)
    assert abs(lhs - rhs) < 1e-6
    lhs2, rhs2 = bpz_sides(spec, xi, z, a=0.5)
    assert abs(lhs2 - rhs2) > 1e-3


def test_step_scaling_is_second_order():
    assert abs(step_scaling_ratio(ward_residual_3pt) - 4) < 0.5


def test_contour_collision():
    with pytest.raises(ContourCollision):
        ward_ope_bivertex_check(z=0.2 + 1.4j, z1=0.2 + 1.41j)


def test_full_suites_pass():
    reports = kernel_boundary_suite() + ope_virasoro_suite() + run_identity_suite()
    failed = [r.summary() for r in reports if not r.passed]
    assert not failed, failed


def test_tolerance_scale_applies():
    tight = run_identity_suite(tolerance_scale=1e-12)
    assert not all(r.passed for r in tight)
