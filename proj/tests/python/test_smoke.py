import json
import math

import pytest

bsinst = pytest.importorskip("bsinst")


def test_quaternion_table():
    i = bsinst.Quaternion(0, 1, 0, 0)
    j = bsinst.Quaternion(0, 0, 1, 0)
    k = i * j
    assert (k.w, k.x, k.y, k.z) == (0, 0, 0, 1)
    q = bsinst.Quaternion(1, 2, 3, 4)
    assert q.norm() == pytest.approx(math.sqrt(30))
    r = q * q.inverse()
    assert r.w == pytest.approx(1.0)
    assert abs(r.x) < 1e-15


def test_profiles():
    f, fp = bsinst.g2_profile(C=0.0, r=0.0)
    assert f == pytest.approx(2.0 / 3.0)
    assert fp == pytest.approx(-2.0 / 3.0)
    f1, _ = bsinst.spin7_profile_f(D=0.0, r=2.0)
    assert f1 == pytest.approx(0.5)
    assert bsinst.g2_ode_residual(1.0, [0.0, 0.5, 5.0, 50.0]) < 1e-12


def test_instanton_residuals():
    rep = bsinst.g2_instanton_residual(C=1.0, r=1.0)
    assert rep["psi_wedge_F"] < 1e-10
    assert rep["star_gammaF_minus_F"] < 1e-10
    rep7 = bsinst.spin7_instanton_residual(D=1.0, r=1.0)
    assert rep7["instanton_numeric"] < 1e-10
    hym = bsinst.hym_residual()
    assert hym["F_wedge_Omega2"] < 1e-11
    assert hym["F_norm"] > 0.01


def test_spectra():
    eig = bsinst.two_form_eigenvalues("g2", r=1.3)
    low = sum(1 for e in eig if abs(e + 2) < 1e-9)
    high = sum(1 for e in eig if abs(e - 1) < 1e-9)
    assert (low, high) == (7, 14)
    eig7 = bsinst.two_form_eigenvalues("spin7", r=1.3)
    assert sum(1 for e in eig7 if abs(e + 3) < 1e-9) == 7


def test_asymptotics():
    assert bsinst.metric_decay_exponent() == pytest.approx(3.0, abs=0.05)
    assert bsinst.connection_decay_exponent(C=1.0) > 2.9
    assert bsinst.metric_deviation(100.0) < bsinst.metric_deviation(10.0)


def test_run_suite_json_deterministic():
    ok1, rep1 = bsinst.run_suite("algebra", samples=10, seed=7)
    ok2, rep2 = bsinst.run_suite("algebra", samples=10, seed=7)
    assert ok1 and ok2
    d1, d2 = json.loads(rep1), json.loads(rep2)
    d1.pop("wall_time_ms"), d2.pop("wall_time_ms")
    assert d1 == d2
    assert all(c["pass"] for c in d1["cases"])
