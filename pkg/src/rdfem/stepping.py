"""One-step time integrators for the semidiscrete reaction-diffusion system.

Implements backward Euler (BE), Crank-Nicolson (CN), CN warm-started with
k BE steps (CNB-k), and the three-substep fractional-step theta scheme
(FSTS).  Every implicit nonlinear stage is reduced to the normal form

    F1(u,v) = cm_u*M u + ca_u*A u - cb_u*gamma*B(u,v) u - rhs_u
    F2(u,v) = cm_v*M v + ca_v*A v + cb_v*gamma*B(u,u) v - rhs_v

which BE, CN and the middle FSTS substep all instantiate with different
coefficients.  The nonlinearity is resolved either by Picard iteration
(lagged B matrices, block-diagonal symmetric systems solved by CG) or by
Newton's method (coupled non-symmetric block system solved by GMRES),
run adaptively to a tolerance or for a fixed iteration count; a fixed
count of one reproduces the IMEX / single-Newton variants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .assembly import NonlinearAssembler, geometry
from .kinetics import SchnakenbergParams
from .linsolve import (
    BlockOperator2x2,
    LinearSolveConfig,
    NumericBreakdownError,
    SolveReport,
    cg_solve,
    gmres_solve,
)

__all__ = [
    "FieldPair",
    "SchemeConfig",
    "NonlinearPolicy",
    "SourceTerms",
    "StepReport",
    "StepFailureError",
    "NonlinearDivergenceError",
    "Discretization",
    "Stage",
    "Stepper",
    "residual_be",
    "picard_update",
    "newton_update",
    "manufactured_solution",
    "manufactured_sources",
    "manufactured_initial",
    "DEFAULT_THETA",
]

DEFAULT_THETA = 1.0 - 1.0 / math.sqrt(2.0)


class StepFailureError(RuntimeError):
    """A timestep could not be completed (inner solve failed or diverged)."""


class NonlinearDivergenceError(StepFailureError):
    """The Picard/Newton iteration diverged instead of contracting."""


@dataclass
class FieldPair:
    """Nodal coefficient vectors of the two species at one time level."""

    u: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.u = np.asarray(self.u, float)
        self.v = np.asarray(self.v, float)
        if self.u.shape != self.v.shape:
            raise ValueError("u and v must have equal length")

    def copy(self) -> "FieldPair":
        return FieldPair(self.u.copy(), self.v.copy(), self.t)


@dataclass(frozen=True)
class SchemeConfig:
    """Time discretisation: kind in {'be','cn','cnb','fsts'}; for 'cnb' the
    first warmup_steps are BE; theta defaults to 1 - 1/sqrt(2)."""

    kind: str
    tau: float
    warmup_steps: int = 0
    theta: float = DEFAULT_THETA

    def __post_init__(self):
        if self.kind not in ("be", "cn", "cnb", "fsts"):
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.kind == "fsts" and not 0.0 < self.theta < 0.5:
            raise ValueError("FSTS needs theta in (0, 1/2)")
        if self.kind == "cnb" and self.warmup_steps < 1:
            raise ValueError("CNB-k needs warmup_steps >= 1")

    @staticmethod
    def parse(name: str, tau: float, theta: float = DEFAULT_THETA) -> "SchemeConfig":
        """Accepts 'be', 'cn', 'cnb<k>' (default k=1) and 'fsts'."""
        name = name.lower()
        if name.startswith("cnb"):
            k = int(name[3:]) if len(name) > 3 else 1
            return SchemeConfig(kind="cnb", tau=tau, warmup_steps=k, theta=theta)
        return SchemeConfig(kind=name, tau=tau, theta=theta)

    @property
    def label(self) -> str:
        if self.kind == "cnb":
            return f"cnb{self.warmup_steps}"
        return self.kind


@dataclass(frozen=True)
class NonlinearPolicy:
    """How each nonlinear stage is solved.

    Adaptive mode iterates until both L2 increments drop below tol;
    fixed mode runs exactly `count` updates.  Fixed(1) with Picard is the
    IMEX scheme, Fixed(1) with Newton the single-Newton scheme.
    """

    method: str  # 'picard' | 'newton'
    mode: str = "adaptive"
    tol: float = 1e-5
    max_iters: int = 50
    count: int = 1

    def __post_init__(self):
        if self.method not in ("picard", "newton"):
            raise ValueError(f"unknown nonlinear method {self.method!r}")
        if self.mode not in ("adaptive", "fixed"):
            raise ValueError(f"unknown policy mode {self.mode!r}")
        if self.tol <= 0 or self.count < 1:
            raise ValueError("tol must be > 0 and count >= 1")


@dataclass
class SourceTerms:
    """Optional right-hand-side forcing s_u, s_v as vectorized (x, y, t)
    callables; absent terms mean the plain reaction-diffusion system."""

    s_u: object = None
    s_v: object = None


@dataclass
class StepReport:
    """Diagnostics for one accepted timestep.

    nonlinear_iterations counts solver iterations plus one for each of the
    two linear FSTS substeps (the convention used when totalling
    iterations per run); stage_iterations is the nonlinear-solver count
    alone.
    """

    nonlinear_iterations: int
    stage_iterations: int
    inner_solves: list = field(default_factory=list)
    increment_norm: float = 0.0
    increment_norm_v: float = 0.0
    converged: bool = True


class Discretization:
    """Assembled operators for one mesh: M, A, the load vector, and a
    reusable B(a,b) assembler, plus the norm used by all tolerances."""

    def __init__(self, mesh, norm: str = "mass"):
        self.mesh = mesh
        geo = geometry(mesh)
        self.M = geo.mass
        self.A = geo.stiffness
        self.load = geo.unit_load
        self.assemble_b = NonlinearAssembler(mesh)
        self._geo = geo
        self.norm_kind = norm
        if norm not in ("mass", "euclidean"):
            raise ValueError(f"unknown norm {norm!r}")
        self.n = mesh.n_vertices

    @classmethod
    def from_matrices(cls, M, A, load, assemble_b, norm: str = "mass"):
        """Degenerate harness (used in tests): operators supplied directly."""
        obj = cls.__new__(cls)
        obj.mesh = None
        obj.M = M
        obj.A = A
        obj.load = load
        obj.assemble_b = assemble_b
        obj._geo = None
        obj.norm_kind = norm
        obj.n = M.shape[0]
        return obj

    def norm(self, w: np.ndarray) -> float:
        if self.norm_kind == "euclidean":
            return float(np.linalg.norm(w))
        return math.sqrt(max(float(w @ (self.M @ w)), 0.0))

    def source_vector(self, f, t: float) -> np.ndarray:
        if f is None:
            return np.zeros(self.n)
        return self._geo.function_load(f, t)


@dataclass
class Stage:
    """One implicit nonlinear stage in normal form (see module docstring)."""

    disc: Discretization
    gamma: float
    cm_u: float
    ca_u: float
    cb_u: float
    rhs_u: np.ndarray
    cm_v: float
    ca_v: float
    cb_v: float
    rhs_v: np.ndarray

    def __post_init__(self):
        self.K_u = self.cm_u * self.disc.M + self.ca_u * self.disc.A
        self.K_v = self.cm_v * self.disc.M + self.ca_v * self.disc.A

    def residual(self, u: np.ndarray, v: np.ndarray, b_uu=None):
        """(F1, F2) at the given iterate.

        B(u,v)u equals B(u,u)v by the cyclic identity, so a single B(u,u)
        assembly covers both nonlinear terms.
        """
        if b_uu is None:
            b_uu = self.disc.assemble_b(u, u)
        w = b_uu @ v
        f1 = self.K_u @ u - self.cb_u * self.gamma * w - self.rhs_u
        f2 = self.K_v @ v + self.cb_v * self.gamma * w - self.rhs_v
        return f1, f2

    def picard_matrices(self, u_k: np.ndarray, v_k: np.ndarray):
        b_uv = self.disc.assemble_b(u_k, v_k)
        b_uu = self.disc.assemble_b(u_k, u_k)
        m_u = self.K_u - (self.cb_u * self.gamma) * b_uv
        m_v = self.K_v + (self.cb_v * self.gamma) * b_uu
        return m_u, m_v

    def newton_system(self, u_k: np.ndarray, v_k: np.ndarray):
        b_uv = self.disc.assemble_b(u_k, v_k)
        b_uu = self.disc.assemble_b(u_k, u_k)
        j11 = self.K_u - (2.0 * self.cb_u * self.gamma) * b_uv
        j12 = (-self.cb_u * self.gamma) * b_uu
        j21 = (2.0 * self.cb_v * self.gamma) * b_uv
        j22 = self.K_v + (self.cb_v * self.gamma) * b_uu
        f1, f2 = self.residual(u_k, v_k, b_uu=b_uu)
        return BlockOperator2x2(j11, j12, j21, j22), np.concatenate([f1, f2])


def make_stage_be(
    disc: Discretization,
    p: SchnakenbergParams,
    tau: float,
    prev: FieldPair,
    sources: SourceTerms | None = None,
    t_new: float | None = None,
) -> Stage:
    t_new = prev.t + tau if t_new is None else t_new
    g = p.gamma
    rhs_u = g * p.a * disc.load + (1.0 / tau) * (disc.M @ prev.u)
    rhs_v = g * p.b * disc.load + (1.0 / tau) * (disc.M @ prev.v)
    if sources is not None:
        rhs_u = rhs_u + disc.source_vector(sources.s_u, t_new)
        rhs_v = rhs_v + disc.source_vector(sources.s_v, t_new)
    return Stage(
        disc=disc, gamma=g,
        cm_u=1.0 / tau + g, ca_u=1.0, cb_u=1.0, rhs_u=rhs_u,
        cm_v=1.0 / tau, ca_v=p.d, cb_v=1.0, rhs_v=rhs_v,
    )


def make_stage_cn(
    disc: Discretization,
    p: SchnakenbergParams,
    tau: float,
    prev: FieldPair,
    sources: SourceTerms | None = None,
) -> Stage:
    g = p.gamma
    b_uu_old = disc.assemble_b(prev.u, prev.u)
    w_old = b_uu_old @ prev.v  # = B(u^n, v^n) u^n by the cyclic identity
    rhs_u = (
        (1.0 / tau) * (disc.M @ prev.u)
        + g * p.a * disc.load
        - 0.5 * (disc.A @ prev.u)
        - 0.5 * g * (disc.M @ prev.u)
        + 0.5 * g * w_old
    )
    rhs_v = (
        (1.0 / tau) * (disc.M @ prev.v)
        + g * p.b * disc.load
        - 0.5 * p.d * (disc.A @ prev.v)
        - 0.5 * g * w_old
    )
    if sources is not None:
        rhs_u = rhs_u + 0.5 * (
            disc.source_vector(sources.s_u, prev.t)
            + disc.source_vector(sources.s_u, prev.t + tau)
        )
        rhs_v = rhs_v + 0.5 * (
            disc.source_vector(sources.s_v, prev.t)
            + disc.source_vector(sources.s_v, prev.t + tau)
        )
    return Stage(
        disc=disc, gamma=g,
        cm_u=1.0 / tau + 0.5 * g, ca_u=0.5, cb_u=0.5, rhs_u=rhs_u,
        cm_v=1.0 / tau, ca_v=0.5 * p.d, cb_v=0.5, rhs_v=rhs_v,
    )


def make_stage_fsts_middle(
    disc: Discretization,
    p: SchnakenbergParams,
    tau: float,
    theta: float,
    mid: FieldPair,
    sources: SourceTerms | None = None,
    t_stage: float | None = None,
) -> Stage:
    """Middle FSTS substep: nonlinear terms implicit, linear terms explicit."""
    sigma = (1.0 - 2.0 * theta) * tau
    g = p.gamma
    rhs_u = (
        g * p.a * disc.load
        + (1.0 / sigma) * (disc.M @ mid.u)
        - disc.A @ mid.u
        - g * (disc.M @ mid.u)
    )
    rhs_v = (
        g * p.b * disc.load
        + (1.0 / sigma) * (disc.M @ mid.v)
        - p.d * (disc.A @ mid.v)
    )
    if sources is not None:
        rhs_u = rhs_u + disc.source_vector(sources.s_u, t_stage)
        rhs_v = rhs_v + disc.source_vector(sources.s_v, t_stage)
    return Stage(
        disc=disc, gamma=g,
        cm_u=1.0 / sigma, ca_u=0.0, cb_u=1.0, rhs_u=rhs_u,
        cm_v=1.0 / sigma, ca_v=0.0, cb_v=1.0, rhs_v=rhs_v,
    )


def stage_picard_update(
    stage: Stage, iterate: FieldPair, cfg: LinearSolveConfig | None = None
):
    """One Picard sweep: lag B at the iterate, solve the two symmetric
    systems by CG (warm-started at the iterate)."""
    cfg = cfg or LinearSolveConfig()
    m_u, m_v = stage.picard_matrices(iterate.u, iterate.v)
    u_new, rep_u = cg_solve(m_u, stage.rhs_u, x0=iterate.u, cfg=cfg)
    v_new, rep_v = cg_solve(m_v, stage.rhs_v, x0=iterate.v, cfg=cfg)
    _require_converged((rep_u, rep_v), "Picard inner CG solve failed")
    return FieldPair(u_new, v_new, iterate.t), [rep_u, rep_v]


def stage_newton_update(
    stage: Stage, iterate: FieldPair, cfg: LinearSolveConfig | None = None
):
    """One Newton sweep: solve J delta = -F on the coupled block system by
    GMRES and add the correction."""
    cfg = cfg or LinearSolveConfig(method="gmres")
    op, f = stage.newton_system(iterate.u, iterate.v)
    delta, rep = gmres_solve(op, -f, x0=None, cfg=cfg)
    _require_converged((rep,), "Newton inner GMRES solve failed")
    n = len(iterate.u)
    return FieldPair(iterate.u + delta[:n], iterate.v + delta[n:], iterate.t), [rep]


def _require_converged(reports, msg: str) -> None:
    for rep in reports:
        if not rep.converged:
            raise StepFailureError(
                f"{msg}: {rep.iterations} iterations, residual {rep.final_residual:.3e}"
            )


def solve_stage(
    stage: Stage,
    start: FieldPair,
    policy: NonlinearPolicy,
    cfg: LinearSolveConfig | None = None,
):
    """Drive the Picard/Newton iteration per the policy.

    Returns (fields, iterations, inner_reports).  Adaptive mode requires
    both increments below tol and aborts on divergence (three consecutive
    growing increments) or iteration exhaustion.
    """
    update = stage_picard_update if policy.method == "picard" else stage_newton_update
    iterate = start
    inner: list[SolveReport] = []
    if policy.mode == "fixed":
        for _ in range(policy.count):
            iterate, reps = update(stage, iterate, cfg)
            inner.extend(reps)
        return iterate, policy.count, inner

    norm = stage.disc.norm
    prev_total = math.inf
    growing = 0
    for k in range(1, policy.max_iters + 1):
        new, reps = update(stage, iterate, cfg)
        inner.extend(reps)
        du = norm(new.u - iterate.u)
        dv = norm(new.v - iterate.v)
        if not (math.isfinite(du) and math.isfinite(dv)):
            raise NonlinearDivergenceError("non-finite nonlinear increment")
        iterate = new
        if du < policy.tol and dv < policy.tol:
            return iterate, k, inner
        total = du + dv
        growing = growing + 1 if total > prev_total else 0
        if growing >= 3:
            raise NonlinearDivergenceError(
                f"nonlinear increments grew for 3 iterations (last {total:.3e})"
            )
        prev_total = total
    raise NonlinearDivergenceError(
        f"no convergence in {policy.max_iters} nonlinear iterations"
    )


def _linear_substep_fsts(disc, p, theta_tau, state, w_explicit, sources, t_new, cfg):
    """First/last FSTS substep: implicit diffusion + linear reaction,
    explicit nonlinearity (w_explicit = B(u,u) v at the framing state)."""
    g = p.gamma
    lhs_u = (1.0 / theta_tau) * disc.M + disc.A + g * disc.M
    lhs_v = (1.0 / theta_tau) * disc.M + p.d * disc.A
    rhs_u = (1.0 / theta_tau) * (disc.M @ state.u) + g * p.a * disc.load + g * w_explicit
    rhs_v = (1.0 / theta_tau) * (disc.M @ state.v) + g * p.b * disc.load - g * w_explicit
    if sources is not None:
        rhs_u = rhs_u + disc.source_vector(sources.s_u, t_new)
        rhs_v = rhs_v + disc.source_vector(sources.s_v, t_new)
    u_new, rep_u = cg_solve(lhs_u, rhs_u, x0=state.u, cfg=cfg)
    v_new, rep_v = cg_solve(lhs_v, rhs_v, x0=state.v, cfg=cfg)
    _require_converged((rep_u, rep_v), "FSTS linear substep CG failed")
    return FieldPair(u_new, v_new, t_new), [rep_u, rep_v]


class Stepper:
    """Advances the discrete system one timestep at a time.

    Holds the scheme, nonlinear policy and inner-solver settings, and the
    number of elapsed steps (which drives the CNB-k BE-to-CN switch).
    """

    def __init__(
        self,
        disc: Discretization,
        params: SchnakenbergParams,
        scheme: SchemeConfig,
        policy: NonlinearPolicy,
        linear: LinearSolveConfig | None = None,
        sources: SourceTerms | None = None,
    ):
        self.disc = disc
        self.params = params
        self.scheme = scheme
        self.policy = policy
        self.linear_cg = linear or LinearSolveConfig(method="cg")
        self.linear_gmres = replace(self.linear_cg, method="gmres")
        self.sources = sources
        self.steps_done = 0

    def _cfg_for(self, policy: NonlinearPolicy) -> LinearSolveConfig:
        return self.linear_cg if policy.method == "picard" else self.linear_gmres

    def step(self, state: FieldPair):
        """One step of the configured scheme; returns (new_state, report)."""
        tau = self.scheme.tau
        kind = self.scheme.kind
        if kind == "cnb":
            kind = "be" if self.steps_done < self.scheme.warmup_steps else "cn"

        if kind in ("be", "cn"):
            maker = make_stage_be if kind == "be" else make_stage_cn
            stage = maker(self.disc, self.params, tau, state, self.sources)
            fields, iters, inner = solve_stage(
                stage, state, self.policy, self._cfg_for(self.policy)
            )
            new = FieldPair(fields.u, fields.v, state.t + tau)
            counted = iters
        elif kind == "fsts":
            new, iters, inner = self._fsts_step(state)
            counted = iters + 2  # the two linear substeps each count as one
        else:  # pragma: no cover
            raise ValueError(f"unknown scheme kind {kind!r}")

        if not (np.isfinite(new.u).all() and np.isfinite(new.v).all()):
            raise StepFailureError("non-finite field after timestep")
        self.steps_done += 1
        report = StepReport(
            nonlinear_iterations=counted,
            stage_iterations=iters,
            inner_solves=inner,
            increment_norm=self.disc.norm(new.u - state.u),
            increment_norm_v=self.disc.norm(new.v - state.v),
            converged=True,
        )
        return new, report

    def _fsts_step(self, state: FieldPair):
        p = self.params
        tau = self.scheme.tau
        theta = self.scheme.theta
        disc = self.disc
        inner: list[SolveReport] = []

        w_n = disc.assemble_b(state.u, state.u) @ state.v
        mid, reps = _linear_substep_fsts(
            disc, p, theta * tau, state, w_n, self.sources,
            state.t + theta * tau, self.linear_cg,
        )
        inner.extend(reps)

        stage = make_stage_fsts_middle(
            disc, p, tau, theta, mid, self.sources,
            t_stage=state.t + (1.0 - theta) * tau,
        )
        fields, iters, reps = solve_stage(
            stage, mid, self.policy, self._cfg_for(self.policy)
        )
        inner.extend(reps)
        mid2 = FieldPair(fields.u, fields.v, state.t + (1.0 - theta) * tau)

        w_mid2 = disc.assemble_b(mid2.u, mid2.u) @ mid2.v
        new, reps = _linear_substep_fsts(
            disc, p, theta * tau, mid2, w_mid2, self.sources,
            state.t + tau, self.linear_cg,
        )
        inner.extend(reps)
        return new, iters, inner


def residual_be(
    disc: Discretization,
    p: SchnakenbergParams,
    tau: float,
    state_prev: FieldPair,
    iterate: FieldPair,
    sources: SourceTerms | None = None,
):
    """Residual (F1, F2) of the backward-Euler step at a trial iterate;
    zero exactly when the iterate solves the BE system."""
    stage = make_stage_be(disc, p, tau, state_prev, sources)
    return stage.residual(iterate.u, iterate.v)


def picard_update(
    disc: Discretization,
    p: SchnakenbergParams,
    tau: float,
    state_prev: FieldPair,
    iterate: FieldPair,
    cfg: LinearSolveConfig | None = None,
    sources: SourceTerms | None = None,
):
    """One Picard sweep of the BE system; returns the next iterate."""
    stage = make_stage_be(disc, p, tau, state_prev, sources)
    fields, _ = stage_picard_update(stage, iterate, cfg)
    return fields


def newton_update(
    disc: Discretization,
    p: SchnakenbergParams,
    tau: float,
    state_prev: FieldPair,
    iterate: FieldPair,
    cfg: LinearSolveConfig | None = None,
    sources: SourceTerms | None = None,
):
    """One Newton sweep of the BE system; returns the next iterate."""
    stage = make_stage_be(disc, p, tau, state_prev, sources)
    fields, _ = stage_newton_update(stage, iterate, cfg)
    return fields


# --- manufactured solution -------------------------------------------------

def _poly(x):
    return x**3 / 3.0 - x**2 / 2.0


def manufactured_solution():
    """Closed-form field Xi(x,y,t) = (x^3/3 - x^2/2)(y^3/3 - y^2/2)(1 + e^-t);
    satisfies homogeneous Neumann conditions on the unit square."""

    def xi(x, y, t):
        return _poly(x) * _poly(y) * (1.0 + np.exp(-t))

    return xi


def manufactured_sources(p: SchnakenbergParams) -> SourceTerms:
    """Forcing that makes u = v = Xi the exact solution on the unit square.

    s_u = Xi_t - lap(Xi) - gamma (a - Xi + Xi^3),
    s_v = Xi_t - d lap(Xi) - gamma (b - Xi^3),
    with Xi_t = -e^-t X Y and lap(Xi) = (1+e^-t)((2x-1) Y + X (2y-1)).
    """

    def parts(x, y, t):
        X, Y = _poly(x), _poly(y)
        decay = np.exp(-t)
        xi = X * Y * (1.0 + decay)
        xi_t = -decay * X * Y
        lap = (1.0 + decay) * ((2.0 * x - 1.0) * Y + X * (2.0 * y - 1.0))
        return xi, xi_t, lap

    def s_u(x, y, t):
        xi, xi_t, lap = parts(x, y, t)
        return xi_t - lap - p.gamma * (p.a - xi + xi**3)

    def s_v(x, y, t):
        xi, xi_t, lap = parts(x, y, t)
        return xi_t - p.d * lap - p.gamma * (p.b - xi**3)

    return SourceTerms(s_u=s_u, s_v=s_v)


def manufactured_initial(mesh) -> np.ndarray:
    """Nodal interpolant of Xi(., ., 0) = 2 X Y, the initial data of the
    convergence study."""
    from .assembly import interpolate

    return interpolate(mesh, manufactured_solution(), 0.0)
