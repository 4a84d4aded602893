import math

import numpy as np
import pytest
from scipy import integrate

from renormalist.counterterms import (
    DIAGRAMS,
    PHI34_ORDER,
    Diagram,
    FitError,
    QuadConfig,
    QuadratureError,
    dyadic_decompose,
    fit_divergence,
    heat_kernel,
    homogeneous_kernel,
    kappa,
    pam_constants,
    phi,
    phi4_constants,
    phi34_constants,
    power_counting,
    psi,
    sweep,
    zbar,
)

EPS = [2.0**-k for k in range(3, 9)]


def test_cutoff_profile():
    assert kappa(-0.1) == 0 and kappa(2.5) == 0
    assert np.all(kappa(np.linspace(0, 0.99, 50)) == 1)
    mid = kappa(np.linspace(1, 2, 101))
    assert np.all(np.diff(mid) <= 0) and 0 < kappa(1.5) < 1


def test_mollifier_profile():
    assert integrate.quad(lambda s: float(phi(s)), -1, 1)[0] == pytest.approx(1, abs=1e-10)
    assert phi(0.3) == phi(-0.3) and phi(1.0) == 0
    assert integrate.quad(lambda s: float(psi(s)), -2, 2, limit=200)[0] == pytest.approx(1, abs=1e-6)


def test_zbar_examples():
    assert zbar(3.0, np.zeros(2)) == 0
    assert zbar(-1.0, np.zeros(2)) == 0
    assert zbar(0.5, np.zeros(2), 2) == pytest.approx(1 / (2 * math.pi), rel=1e-14)


@pytest.mark.parametrize("t", [0.05, 0.5, 1.2, 1.7, 1.95])
def test_zbar_spatial_mass_is_the_cutoff(t):
    # radial integral in d = 2 over a radius of at least 10 sqrt(t)
    R = 10 * math.sqrt(t) + 1
    mass = integrate.quad(lambda r: 2 * math.pi * r * float(zbar(t, r, 2)), 0, R, epsabs=1e-13)[0]
    assert abs(mass - float(kappa(t))) < 1e-6


def test_fit_log_synthetic():
    eps = np.array(EPS)
    fit = fit_divergence(list(zip(eps, 5 * np.log(1 / eps) + 1)))
    assert fit.model == "log"
    assert abs(fit.a - 5) < 1e-6 and abs(fit.b - 1) < 1e-6


def test_fit_power_synthetic():
    eps = np.array(EPS)
    fit = fit_divergence(list(zip(eps, 2 / eps)))
    assert fit.model == "power"
    assert abs(fit.p - 1) < 1e-6


def test_fit_rejects_degenerate_samples():
    with pytest.raises(FitError):
        fit_divergence([(0.1, 1.0), (0.05, 2.0), (0.025, 3.0)])
    with pytest.raises(FitError):
        fit_divergence([(0.1, 1.0), (0.1, 2.0), (0.05, 3.0), (0.025, 4.0)])
    with pytest.raises(FitError):
        fit_divergence([(0.1, 0.0), (0.05, 2.0), (0.025, 3.0), (0.01, 4.0)])


def test_power_counting_predictions():
    pred = {name: [power_counting(D) for D in ds] for name, ds in DIAGRAMS.items()}
    assert [p.model for p in pred["gpam"]] == ["log", "log"]
    assert [(p.model, p.p) for p in pred["phi43"]] == [("power", 1), ("log", None)]
    models = [(p.model, p.p, p.log_power) for p in pred["phi34"]]
    assert models == [
        ("power", 2, 0),
        ("log", None, 1),
        ("log", None, 2),
        ("log", None, 1),
        ("log", None, 1),
    ]
    assert power_counting(Diagram("finite", 2, ((0, 1, -1),), 4)).model == "finite"


def test_phi34_order_and_count():
    values = phi34_constants(2.0**-3)
    assert tuple(v.name for v in values) == PHI34_ORDER
    assert len(values) == 5
    assert all(v.value > 0 for v in values)


def test_pam_independent_of_the_dummy_time():
    for eps in (2.0**-3, 2.0**-5):
        a, b = pam_constants(eps), pam_constants(eps, t=0.37)
        for x, y in zip(a, b):
            assert abs(x.value - y.value) <= x.error + y.error


def test_two_resolutions_agree_within_error():
    for fn in (pam_constants, phi4_constants):
        for eps in (2.0**-3, 2.0**-5):
            base = fn(eps)
            fine = fn(eps, QuadConfig(n=8))
            for x, y in zip(base, fine):
                assert abs(x.value - y.value) <= x.error


def test_cheap_constants_positive_and_monotone():
    for name in ("gpam", "phi43"):
        rows = sweep(name, EPS[:4])
        for k in range(2):
            vals = [row[k].value for _, row in rows]
            assert all(v > 0 for v in vals)
            assert all(b > a for a, b in zip(vals, vals[1:]))


def test_deterministic():
    assert pam_constants(2.0**-4) == pam_constants(2.0**-4)
    assert phi4_constants(2.0**-4) == phi4_constants(2.0**-4)


def test_strict_sweep_reports_nonconvergence():
    coarse = QuadConfig(n=1, ratio=4.0)
    with pytest.raises(QuadratureError):
        sweep("phi43", [2.0**-6], coarse, strict=True)


def test_dyadic_heat_kernel_bounded():
    report = dyadic_decompose(heat_kernel(2), d=2, scaling_norm=4, beta=2.0)
    assert report.bounded
    assert max(report.sup) < 10 * min(report.sup)
    assert len(report.n) == 13


def test_dyadic_zero_kernel():
    report = dyadic_decompose(lambda t, x: np.zeros(np.shape(t)), d=2, scaling_norm=4, beta=2.0)
    assert report.bounded
    assert report.sup == (0.0,) * 13 and report.grad_x == (0.0,) * 13


def test_dyadic_homogeneous_kernel():
    K = homogeneous_kernel(4)
    assert dyadic_decompose(K, d=2, scaling_norm=4, beta=0.0).bounded
    flagged = dyadic_decompose(K, d=2, scaling_norm=4, beta=1.0)
    assert not flagged.bounded
    assert flagged.growth == pytest.approx(1.0, abs=1e-6)
