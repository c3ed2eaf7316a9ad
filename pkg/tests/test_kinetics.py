import math

import numpy as np
import pytest

from rdfem.kinetics import (
    SchnakenbergParams,
    dispersion_determinant,
    dispersion_growth_rate,
    equilibrium,
    reaction_eval,
    turing_analysis,
)

P_SQUARE = SchnakenbergParams(a=0.1, b=0.9, d=10.0, gamma=29.0)
P_MODE_21 = SchnakenbergParams(a=0.1, b=0.9, d=9.1676, gamma=176.72)
P_MODE_33 = SchnakenbergParams(a=0.1, b=0.9, d=8.6076, gamma=535.09)


def test_param_validation():
    with pytest.raises(ValueError):
        SchnakenbergParams(a=0.0, b=0.0, d=1.0, gamma=1.0)
    with pytest.raises(ValueError):
        SchnakenbergParams(a=0.1, b=0.9, d=0.0, gamma=1.0)
    with pytest.raises(ValueError):
        SchnakenbergParams(a=0.1, b=0.9, d=1.0, gamma=-1.0)
    SchnakenbergParams(a=1.0, b=0.0, d=1.0, gamma=0.0)  # boundary cases allowed


def test_equilibrium_values():
    eq = equilibrium(P_SQUARE)
    assert eq.u_eq == pytest.approx(1.0, abs=1e-15)
    assert eq.v_eq == pytest.approx(0.9, abs=1e-15)


def test_equilibrium_jacobian_hand_derived():
    eq = equilibrium(P_SQUARE)
    assert np.allclose(eq.jac, [[0.8, 1.0], [-1.8, -1.0]], atol=1e-14)


def test_equilibrium_b_zero_limit():
    eq = equilibrium(SchnakenbergParams(a=1.0, b=0.0, d=1.0, gamma=1.0))
    assert (eq.u_eq, eq.v_eq) == (1.0, 0.0)
    assert np.allclose(eq.jac, [[-1.0, 1.0], [0.0, -1.0]])


def test_equilibrium_zeroes_reaction():
    for p in (P_SQUARE, P_MODE_21, P_MODE_33):
        eq = equilibrium(p)
        f, g = reaction_eval(p, eq.u_eq, eq.v_eq)
        assert abs(f) < 1e-14 and abs(g) < 1e-14


def test_jacobian_matches_finite_differences():
    # analytic entries vs central differences at random states
    rng = np.random.default_rng(17)
    h = 1e-6
    for _ in range(100):
        u, v = rng.uniform(0.2, 3.0, 2)
        fu = (reaction_eval(P_SQUARE, u + h, v)[0] - reaction_eval(P_SQUARE, u - h, v)[0]) / (2 * h)
        fv = (reaction_eval(P_SQUARE, u, v + h)[0] - reaction_eval(P_SQUARE, u, v - h)[0]) / (2 * h)
        gu = (reaction_eval(P_SQUARE, u + h, v)[1] - reaction_eval(P_SQUARE, u - h, v)[1]) / (2 * h)
        gv = (reaction_eval(P_SQUARE, u, v + h)[1] - reaction_eval(P_SQUARE, u, v - h)[1]) / (2 * h)
        exact = np.array([[-1 + 2 * u * v, u * u], [-2 * u * v, -u * u]])
        approx = np.array([[fu, fv], [gu, gv]])
        assert np.abs(approx - exact).max() / max(np.abs(exact).max(), 1.0) < 1e-6


def test_reaction_eval_examples():
    f, g = reaction_eval(P_SQUARE, 1.0, 0.0)
    assert (f, g) == pytest.approx((-0.9, 0.9))
    f, g = reaction_eval(P_SQUARE, 0.0, 5.0)
    assert (f, g) == pytest.approx((0.1, 0.9))


def test_turing_band_square_parameters():
    rep = turing_analysis(P_SQUARE)
    assert rep.stable_without_diffusion
    assert rep.diffusion_driven_unstable
    assert rep.k2_minus == pytest.approx(5.8, rel=1e-12)
    assert rep.k2_plus == pytest.approx(14.5, rel=1e-12)
    assert (1, 0) in rep.unstable_modes and (0, 1) in rep.unstable_modes
    assert len(rep.unstable_modes) == 2


def test_turing_no_instability_equal_diffusion():
    rep = turing_analysis(SchnakenbergParams(a=0.1, b=0.9, d=1.0, gamma=29.0))
    assert rep.stable_without_diffusion
    assert not rep.diffusion_driven_unstable
    assert math.isnan(rep.k2_minus)


def test_turing_mode_isolation_first_set():
    rep = turing_analysis(P_MODE_21, mode_cap=4)
    assert rep.k2_minus < 5 * math.pi**2 < rep.k2_plus
    assert not (rep.k2_minus < 4 * math.pi**2 < rep.k2_plus)
    assert sorted(rep.unstable_modes) == [(1, 2), (2, 1)]
    # (2,2) sits a fraction of a percent outside the upper edge
    assert (2, 2) in rep.near_edge_modes


def test_turing_mode_isolation_second_set():
    rep = turing_analysis(P_MODE_33)
    assert (3, 3) in rep.unstable_modes
    assert (2, 4) in rep.near_edge_modes and (4, 2) in rep.near_edge_modes


def test_growth_rate_excited_mode():
    lam = dispersion_growth_rate(P_SQUARE, math.pi**2)
    assert lam == pytest.approx(1.6246, abs=1e-3)


def test_growth_rate_homogeneous_mode_stable():
    # gamma*J has trace -5.8 and det 841: complex pair with real part -2.9
    lam = dispersion_growth_rate(P_SQUARE, 0.0)
    assert lam == pytest.approx(-2.9, abs=1e-12)


def test_growth_rate_large_k_decreasing():
    lams = [dispersion_growth_rate(P_SQUARE, k2) for k2 in (1e3, 1e4, 1e5)]
    assert all(l < 0 for l in lams)
    assert lams[0] > lams[1] > lams[2]


def test_band_endpoints_are_dispersion_roots():
    for p in (P_SQUARE, P_MODE_21, P_MODE_33):
        rep = turing_analysis(p)
        assert abs(dispersion_determinant(p, rep.k2_minus)) < 1e-9 * p.gamma**2
        assert abs(dispersion_determinant(p, rep.k2_plus)) < 1e-9 * p.gamma**2


def test_band_midpoint_grows_homogeneous_decays():
    for p in (P_SQUARE, P_MODE_21, P_MODE_33):
        rep = turing_analysis(p)
        assert rep.diffusion_driven_unstable
        mid = 0.5 * (rep.k2_minus + rep.k2_plus)
        assert dispersion_growth_rate(p, mid) > 0
        assert dispersion_growth_rate(p, 0.0) < 0


def test_unstable_modes_inside_band():
    rep = turing_analysis(P_SQUARE)
    for n, m in rep.unstable_modes:
        k2 = math.pi**2 * (n * n + m * m)
        assert rep.k2_minus < k2 < rep.k2_plus


def test_report_json_fields():
    rep = turing_analysis(P_SQUARE)
    payload = rep.to_json_dict()
    assert set(payload) >= {"k2_minus", "k2_plus", "unstable_modes", "growth_rate"}
    assert payload["growth_rate"] == pytest.approx(1.6246, abs=1e-3)
    assert payload["k2_minus"] == pytest.approx(5.8)


def test_growth_rate_of_uses_params():
    rep = turing_analysis(P_SQUARE)
    assert rep.growth_rate_of(math.pi**2) == pytest.approx(1.6246, abs=1e-3)
