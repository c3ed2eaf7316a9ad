import math

import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg

from rdfem.assembly import interpolate, l2_norm
from rdfem.kinetics import SchnakenbergParams, equilibrium
from rdfem.linsolve import LinearSolveConfig
from rdfem.mesh import unit_square_mesh
from rdfem.stepping import (
    DEFAULT_THETA,
    Discretization,
    FieldPair,
    NonlinearDivergenceError,
    NonlinearPolicy,
    SchemeConfig,
    SourceTerms,
    Stepper,
    make_stage_be,
    make_stage_cn,
    make_stage_fsts_middle,
    manufactured_initial,
    manufactured_solution,
    manufactured_sources,
    newton_update,
    picard_update,
    residual_be,
    solve_stage,
    stage_picard_update,
)

P = SchnakenbergParams(a=0.1, b=0.9, d=10.0, gamma=29.0)
P0 = SchnakenbergParams(a=0.1, b=0.9, d=10.0, gamma=0.0)  # linear decoupled heat


def equilibrium_state(mesh, p=P):
    eq = equilibrium(p)
    n = mesh.n_vertices
    return FieldPair(np.full(n, eq.u_eq), np.full(n, eq.v_eq), 0.0)


def perturbed_state(mesh, seed=0, amplitude=1e-2, p=P):
    eq = equilibrium(p)
    rng = np.random.default_rng(seed)
    n = mesh.n_vertices
    return FieldPair(
        eq.u_eq + rng.uniform(-amplitude, amplitude, n),
        eq.v_eq + rng.uniform(-amplitude, amplitude, n),
        0.0,
    )


# --- configuration types ------------------------------------------------------

def test_scheme_config_parse():
    assert SchemeConfig.parse("cnb5", 0.1).warmup_steps == 5
    assert SchemeConfig.parse("cnb", 0.1).warmup_steps == 1
    assert SchemeConfig.parse("fsts", 0.1).theta == pytest.approx(1 - 1 / math.sqrt(2))
    with pytest.raises(ValueError):
        SchemeConfig("be", tau=0.0)
    with pytest.raises(ValueError):
        SchemeConfig("fsts", tau=0.1, theta=0.6)


def test_policy_validation():
    with pytest.raises(ValueError):
        NonlinearPolicy("secant")
    with pytest.raises(ValueError):
        NonlinearPolicy("picard", tol=0.0)
    with pytest.raises(ValueError):
        NonlinearPolicy("picard", mode="fixed", count=0)


def test_fieldpair_length_check():
    with pytest.raises(ValueError):
        FieldPair(np.ones(3), np.ones(4))


# --- backward Euler residual -----------------------------------------------------

def test_residual_zero_at_equilibrium():
    mesh = unit_square_mesh(4)
    disc = Discretization(mesh)
    state = equilibrium_state(mesh)
    f1, f2 = residual_be(disc, P, 0.01, state, state)
    assert np.abs(f1).max() < 1e-12
    assert np.abs(f2).max() < 1e-12


def test_residual_zero_for_linear_heat_solution():
    # gamma = 0 decouples the system into two linear heat steps
    mesh = unit_square_mesh(4)
    disc = Discretization(mesh)
    state = perturbed_state(mesh, p=P0)
    tau = 0.05
    lhs_u = (disc.M / tau + disc.A).tocsc()
    lhs_v = (disc.M / tau + P0.d * disc.A).tocsc()
    u_new = scipy.sparse.linalg.spsolve(lhs_u, disc.M @ state.u / tau)
    v_new = scipy.sparse.linalg.spsolve(lhs_v, disc.M @ state.v / tau)
    f1, f2 = residual_be(disc, P0, tau, state, FieldPair(u_new, v_new))
    assert np.abs(f1).max() < 1e-10
    assert np.abs(f2).max() < 1e-10


def test_residual_small_at_converged_solve():
    mesh = unit_square_mesh(4)
    disc = Discretization(mesh)
    state = perturbed_state(mesh)
    stage = make_stage_be(disc, P, 0.01, state)
    fields, _, _ = solve_stage(stage, state, NonlinearPolicy("newton", tol=1e-12))
    f1, f2 = stage.residual(fields.u, fields.v)
    assert np.abs(f1).max() < 1e-9
    assert np.abs(f2).max() < 1e-9


# --- Picard -----------------------------------------------------------------------

def test_picard_gamma_zero_single_update():
    mesh = unit_square_mesh(4)
    disc = Discretization(mesh)
    state = perturbed_state(mesh, p=P0)
    first = picard_update(disc, P0, 0.01, state, state)
    second = picard_update(disc, P0, 0.01, state, first)
    assert disc.norm(second.u - first.u) < 1e-10
    assert disc.norm(second.v - first.v) < 1e-10


def test_picard_single_update_is_imex_step():
    mesh = unit_square_mesh(4)
    disc = Discretization(mesh)
    state = perturbed_state(mesh, seed=3)
    stepper = Stepper(
        disc, P, SchemeConfig("be", 0.01),
        NonlinearPolicy("picard", mode="fixed", count=1),
    )
    imex, _ = stepper.step(state)
    direct = picard_update(disc, P, 0.01, state, state)
    assert np.array_equal(imex.u, direct.u)
    assert np.array_equal(imex.v, direct.v)


def test_picard_increments_contract_geometrically():
    mesh = unit_square_mesh(8)
    disc = Discretization(mesh)
    state = perturbed_state(mesh, seed=5)
    stage = make_stage_be(disc, P, 1e-3, state)
    iterate = state
    increments = []
    for _ in range(8):
        new, _ = stage_picard_update(stage, iterate)
        increments.append(
            math.hypot(disc.norm(new.u - iterate.u), disc.norm(new.v - iterate.v))
        )
        iterate = new
    ratios = [
        increments[k + 1] / increments[k]
        for k in range(len(increments) - 1)
        if increments[k] > 1e-14
    ]
    assert all(r < 1.0 for r in ratios)


# --- Newton ------------------------------------------------------------------------

def test_newton_gamma_zero_single_iteration():
    mesh = unit_square_mesh(4)
    disc = Discretization(mesh)
    state = perturbed_state(mesh, p=P0)
    first = newton_update(disc, P0, 0.01, state, state,
                          cfg=LinearSolveConfig(method="gmres", rel_tol=1e-13))
    f1, f2 = residual_be(disc, P0, 0.01, state, first)
    assert np.abs(f1).max() < 1e-9
    assert np.abs(f2).max() < 1e-9


def test_newton_jacobian_directional_derivative():
    # finite differences of the stage residual against the Jacobian blocks
    mesh = unit_square_mesh(4)
    disc = Discretization(mesh)
    rng = np.random.default_rng(21)
    n = mesh.n_vertices
    state = perturbed_state(mesh, seed=2)
    for maker in (
        lambda: make_stage_be(disc, P, 0.01, state),
        lambda: make_stage_cn(disc, P, 0.01, state),
        lambda: make_stage_fsts_middle(disc, P, 0.01, DEFAULT_THETA, state),
    ):
        stage = maker()
        w_u = 1.0 + 0.2 * rng.standard_normal(n)
        w_v = 0.9 + 0.2 * rng.standard_normal(n)
        xi_u = rng.standard_normal(n)
        xi_v = rng.standard_normal(n)
        op, _ = stage.newton_system(w_u, w_v)
        jxi = op @ np.concatenate([xi_u, xi_v])
        f0 = np.concatenate(stage.residual(w_u, w_v))
        best = math.inf
        for eps in (1e-4, 1e-5, 1e-6):
            f1 = np.concatenate(stage.residual(w_u + eps * xi_u, w_v + eps * xi_v))
            fd = (f1 - f0) / eps
            best = min(best, np.linalg.norm(fd - jxi) / np.linalg.norm(jxi))
        assert best < 1e-6


def test_newton_quadratic_convergence():
    mesh = unit_square_mesh(8)
    disc = Discretization(mesh)
    state = perturbed_state(mesh, seed=11, amplitude=0.3)  # far-ish start
    stage = make_stage_be(disc, P, 0.1, state)
    iterate = state
    increments = []
    cfg = LinearSolveConfig(method="gmres", rel_tol=1e-13)
    for _ in range(6):
        from rdfem.stepping import stage_newton_update

        new, _ = stage_newton_update(stage, iterate, cfg)
        increments.append(
            math.hypot(disc.norm(new.u - iterate.u), disc.norm(new.v - iterate.v))
        )
        iterate = new
    usable = [d for d in increments if d > 1e-12]
    # order estimate from three consecutive increments is ~2 for Newton
    p = math.log(usable[2] / usable[1]) / math.log(usable[1] / usable[0])
    assert p > 1.6


def test_newton_divergence_guard():
    mesh = unit_square_mesh(4)
    disc = Discretization(mesh)
    state = perturbed_state(mesh)
    stage = make_stage_be(disc, P, 0.01, state)
    with pytest.raises(NonlinearDivergenceError):
        solve_stage(stage, state, NonlinearPolicy("newton", tol=1e-30, max_iters=4))


# --- full steps -----------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["be", "cn", "cnb5", "fsts"])
def test_equilibrium_is_fixed_point(kind):
    mesh = unit_square_mesh(6)
    disc = Discretization(mesh)
    state = equilibrium_state(mesh)
    stepper = Stepper(disc, P, SchemeConfig.parse(kind, 0.01), NonlinearPolicy("newton"))
    new, rep = stepper.step(state)
    assert np.abs(new.u - state.u).max() < 1e-10
    assert np.abs(new.v - state.v).max() < 1e-10
    assert rep.converged


def test_cnb5_first_steps_match_be_bitwise():
    mesh = unit_square_mesh(4)
    disc = Discretization(mesh)
    policy = NonlinearPolicy("newton")
    s_cnb = Stepper(disc, P, SchemeConfig.parse("cnb5", 0.01), policy)
    s_be = Stepper(disc, P, SchemeConfig("be", 0.01), policy)
    a = perturbed_state(mesh, seed=9)
    b = a.copy()
    for step in range(6):
        a, _ = s_cnb.step(a)
        b, _ = s_be.step(b)
        if step < 5:
            assert np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v)
        else:
            assert not np.array_equal(a.u, b.u)  # switched to CN


def test_fsts_substep_iterations_counted():
    mesh = unit_square_mesh(4)
    disc = Discretization(mesh)
    state = perturbed_state(mesh)
    stepper = Stepper(disc, P, SchemeConfig("fsts", 0.01), NonlinearPolicy("newton"))
    _, rep = stepper.step(state)
    assert rep.nonlinear_iterations == rep.stage_iterations + 2


def test_scalar_ode_amplification_factors():
    # 1-node degenerate harness: M=[1], A=[0], B=0 and a=0 turn the u-equation
    # into du/dt = -gamma u
    m = sp.csr_matrix(np.array([[1.0]]))
    a = sp.csr_matrix(np.array([[0.0]]))
    disc = Discretization.from_matrices(m, a, np.array([1.0]),
                                        lambda x, y: sp.csr_matrix((1, 1)))
    lam, tau = -2.0, 0.5
    p = SchnakenbergParams(a=0.0, b=1.0, d=1.0, gamma=-lam)
    for kind, expected in [
        ("be", 1.0 / (1.0 - lam * tau)),
        ("cn", (1.0 + lam * tau / 2.0) / (1.0 - lam * tau / 2.0)),
    ]:
        stepper = Stepper(disc, p, SchemeConfig(kind, tau),
                          NonlinearPolicy("newton", tol=1e-13))
        out, _ = stepper.step(FieldPair(np.array([1.0]), np.array([0.0])))
        assert out.u[0] == pytest.approx(expected, abs=1e-12)


def test_schemes_share_steady_state_linear_problem():
    # gamma = 0: the schemes relax to the mean-value steady state.  Plain CN
    # keeps a slowly decaying stiff-mode oscillation (amplification -> -1),
    # so it is compared separately with a loose bound.
    mesh = unit_square_mesh(4)
    disc = Discretization(mesh)
    start = perturbed_state(mesh, seed=13, amplitude=0.5, p=P0)

    def relax(kind):
        stepper = Stepper(disc, P0, SchemeConfig.parse(kind, 0.1),
                          NonlinearPolicy("picard"),
                          linear=LinearSolveConfig(rel_tol=1e-12))
        state = start.copy()
        for _ in range(400):
            state, _ = stepper.step(state)
        return state

    reference = relax("be")
    for kind in ("cnb5", "fsts"):
        state = relax(kind)
        assert l2_norm(mesh, state.u - reference.u) < 1e-8
        assert l2_norm(mesh, state.v - reference.v) < 1e-8
    cn = relax("cn")
    assert l2_norm(mesh, cn.u - reference.u) < 1e-8
    assert l2_norm(mesh, cn.v - reference.v) < 0.02  # oscillation remnant


def test_picard_newton_same_answer_adaptive():
    mesh = unit_square_mesh(6)
    disc = Discretization(mesh)
    start = perturbed_state(mesh, seed=4)
    finals = {}
    for method in ("picard", "newton"):
        stepper = Stepper(disc, P, SchemeConfig("be", 0.01),
                          NonlinearPolicy(method, tol=1e-5))
        state = start.copy()
        for _ in range(50):
            state, _ = stepper.step(state)
        finals[method] = state
    assert l2_norm(mesh, finals["picard"].u - finals["newton"].u) < 1e-4
    assert l2_norm(mesh, finals["picard"].v - finals["newton"].v) < 1e-4


def test_fsts_middle_matrix_symmetric_nonsymmetric_split():
    mesh = unit_square_mesh(4)
    disc = Discretization(mesh)
    state = perturbed_state(mesh, seed=1)
    stage = make_stage_fsts_middle(disc, P, 0.01, DEFAULT_THETA, state)
    m_u, m_v = stage.picard_matrices(state.u, state.v)
    assert np.abs((m_u - m_u.T).toarray()).max() < 1e-12
    assert np.abs((m_v - m_v.T).toarray()).max() < 1e-12
    op, _ = stage.newton_system(state.u, state.v)
    dense = op.to_dense()
    assert np.abs(dense - dense.T).max() > 1e-3  # coupled system is non-symmetric


# --- manufactured solution ----------------------------------------------------------

def test_manufactured_sources_satisfy_modified_system():
    # substitute u = v = Xi into the forced equations at random points
    src = manufactured_sources(P)
    xi = manufactured_solution()
    rng = np.random.default_rng(33)
    x, y, t = rng.uniform(0.05, 0.95, (3, 100))
    X = x**3 / 3 - x**2 / 2
    Y = y**3 / 3 - y**2 / 2
    w = xi(x, y, t)
    w_t = -np.exp(-t) * X * Y
    lap = (1 + np.exp(-t)) * ((2 * x - 1) * Y + X * (2 * y - 1))
    f = P.a - w + w**2 * w
    g = P.b - w**2 * w
    res_u = w_t - lap - P.gamma * f - src.s_u(x, y, t)
    res_v = w_t - P.d * lap - P.gamma * g - src.s_v(x, y, t)
    assert np.abs(res_u).max() < 1e-12
    assert np.abs(res_v).max() < 1e-12


def test_manufactured_derivatives_match_finite_differences():
    # closed forms for Xi_t and lap(Xi) against central differences of Xi
    xi = manufactured_solution()
    rng = np.random.default_rng(7)
    h = 1e-5
    for _ in range(30):
        x, y, t = rng.uniform(0.1, 0.9, 3)
        xt = (xi(x, y, t + h) - xi(x, y, t - h)) / (2 * h)
        lap = (
            xi(x + h, y, t) + xi(x - h, y, t) + xi(x, y + h, t) + xi(x, y - h, t)
            - 4 * xi(x, y, t)
        ) / h**2
        X = x**3 / 3 - x**2 / 2
        Y = y**3 / 3 - y**2 / 2
        assert xt == pytest.approx(-math.exp(-t) * X * Y, abs=1e-8)
        assert lap == pytest.approx(
            (1 + math.exp(-t)) * ((2 * x - 1) * Y + X * (2 * y - 1)), abs=1e-5
        )


def test_manufactured_neumann_boundary():
    # X'(s) = s^2 - s vanishes at 0 and 1, so the normal derivative is zero
    for s in (0.0, 1.0):
        assert s**2 - s == 0.0
    xi = manufactured_solution()
    h = 1e-7
    ys = np.linspace(0.1, 0.9, 5)
    for y in ys:
        dndx0 = (xi(h, y, 1.0) - xi(0.0, y, 1.0)) / h
        dndx1 = (xi(1.0, y, 1.0) - xi(1.0 - h, y, 1.0)) / h
        assert abs(dndx0) < 1e-6 and abs(dndx1) < 1e-6


def test_manufactured_long_time_limit():
    # Xi -> u0/2 as t -> infinity
    mesh = unit_square_mesh(5)
    u0 = manufactured_initial(mesh)
    late = interpolate(mesh, manufactured_solution(), 40.0)
    assert np.allclose(late, u0 / 2.0, atol=1e-15)


def test_sources_sampled_in_step():
    # a sourced equilibrium state must not stay fixed (forcing acts)
    mesh = unit_square_mesh(4)
    disc = Discretization(mesh)
    state = FieldPair(manufactured_initial(mesh), manufactured_initial(mesh), 0.0)
    stepper = Stepper(disc, P, SchemeConfig("be", 0.05), NonlinearPolicy("newton"),
                      sources=manufactured_sources(P))
    new, _ = stepper.step(state)
    xi = manufactured_solution()
    exact = interpolate(mesh, xi, 0.05)
    assert l2_norm(mesh, new.u - exact) < 5e-4  # one BE step stays near Xi
