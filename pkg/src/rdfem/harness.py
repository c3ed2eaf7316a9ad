"""Experiment drivers: pattern simulations with a steady-state stopping
criterion, manufactured-solution convergence studies, growth-rate
diagnostics, IMEX comparisons, and the Picard contraction probe.

Every run is seeded and logs per-step diagnostics; CSV/JSON/VTK artifacts
are written when an output directory is configured.
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import io as rdio
from .assembly import l2_error_exact
from .kinetics import SchnakenbergParams, dispersion_growth_rate, equilibrium, turing_analysis
from .linsolve import LinearSolveConfig, NumericBreakdownError
from .mesh import Mesh, load_mesh, unit_cube_mesh, unit_square_mesh
from .stepping import (
    Discretization,
    FieldPair,
    NonlinearPolicy,
    SchemeConfig,
    SourceTerms,
    StepFailureError,
    Stepper,
    make_stage_be,
    manufactured_initial,
    manufactured_solution,
    manufactured_sources,
    stage_picard_update,
)

__all__ = [
    "RunConfig",
    "TraceRecord",
    "SimulationTrace",
    "EocRow",
    "EocReport",
    "GrowthSeries",
    "ContractionRow",
    "run_simulation",
    "run_eoc",
    "run_mms_level",
    "growth_ratio_series",
    "detect_exponential_window",
    "run_imex_comparison",
    "picard_contraction_probe",
    "IMEX_NAMES",
    "default_params",
]

IMEX_NAMES = {"be": "BIMEX", "cn": "CIMEX", "cnb5": "C5IMEX", "fsts": "FIMEX"}


def default_params() -> SchnakenbergParams:
    """Parameter set driving the (1,0)/(0,1) instability on the unit square."""
    return SchnakenbergParams(a=0.1, b=0.9, d=10.0, gamma=29.0)


@dataclass
class RunConfig:
    """Full description of one simulation run (mesh, physics, numerics, IO)."""

    mesh_kind: str = "square"  # 'square' | 'cube' | 'file'
    mesh_n: int = 32
    mesh_path: str | None = None
    params: SchnakenbergParams = field(default_factory=default_params)
    scheme: SchemeConfig = field(default_factory=lambda: SchemeConfig("fsts", 0.01))
    policy: NonlinearPolicy = field(default_factory=lambda: NonlinearPolicy("newton"))
    linear: LinearSolveConfig = field(default_factory=LinearSolveConfig)
    t_end: float = 30.0
    stop_tol: float = 1e-4
    ic: str = "equilibrium"  # 'equilibrium' | 'manufactured' | 'file'
    amplitude: float = 1e-2
    seed: int = 0
    ic_path: str | None = None
    sources_on: bool = False
    norm: str = "mass"
    snapshot_every: int = 0
    report_turing: bool = False
    outdir: str | None = None
    label: str = "run"

    def __post_init__(self):
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")
        if self.ic not in ("equilibrium", "manufactured", "file"):
            raise ValueError(f"unknown ic kind {self.ic!r}")

    def build_mesh(self) -> Mesh:
        if self.mesh_kind == "square":
            return unit_square_mesh(self.mesh_n)
        if self.mesh_kind == "cube":
            return unit_cube_mesh(self.mesh_n)
        if self.mesh_kind == "file":
            if not self.mesh_path:
                raise ValueError("mesh_kind 'file' needs mesh_path")
            return load_mesh(self.mesh_path)
        raise ValueError(f"unknown mesh kind {self.mesh_kind!r}")


@dataclass
class TraceRecord:
    step: int
    t: float
    du_rate: float
    dv_rate: float
    nonlin_iters: int
    stage_iters: int
    inner_iters: int
    wall_ms: float
    u_inf: float


@dataclass
class SimulationTrace:
    tau: float
    seed: int
    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)  # (t, u, v) copies
    end_time: float = 0.0
    stopped_by: str = "t_end"  # 'steady' | 't_end' | 'failure'
    failure_message: str = ""

    @property
    def total_iterations(self) -> int:
        return sum(r.nonlin_iters for r in self.records)

    @property
    def max_u_inf(self) -> float:
        finite = [r.u_inf for r in self.records if math.isfinite(r.u_inf)]
        return max(finite) if finite else math.nan


def _initial_state(cfg: RunConfig, mesh: Mesh) -> FieldPair:
    if cfg.ic == "equilibrium":
        eq = equilibrium(cfg.params)
        rng = np.random.default_rng(cfg.seed)
        n = mesh.n_vertices
        u = eq.u_eq + rng.uniform(-cfg.amplitude, cfg.amplitude, n)
        v = eq.v_eq + rng.uniform(-cfg.amplitude, cfg.amplitude, n)
        return FieldPair(u, v, 0.0)
    if cfg.ic == "manufactured":
        u0 = manufactured_initial(mesh)
        return FieldPair(u0.copy(), u0.copy(), 0.0)
    if cfg.ic == "file":
        data = np.loadtxt(cfg.ic_path)
        if data.ndim != 2 or data.shape != (mesh.n_vertices, 2):
            raise ValueError("nodal IC file must have n_vertices rows of 'u v'")
        return FieldPair(data[:, 0], data[:, 1], 0.0)
    raise ValueError(cfg.ic)


def run_simulation(cfg: RunConfig):
    """Advance from the seeded initial condition until the steady-state
    criterion (both increment rates <= stop_tol) or t_end, logging one
    trace record per step.  Failures stop the run but artifacts are still
    written.  Returns (SimulationTrace, final FieldPair)."""
    mesh = cfg.build_mesh()
    disc = Discretization(mesh, cfg.norm)
    sources = None
    if cfg.sources_on or cfg.ic == "manufactured":
        sources = manufactured_sources(cfg.params)
    state = _initial_state(cfg, mesh)
    stepper = Stepper(disc, cfg.params, cfg.scheme, cfg.policy, cfg.linear, sources)

    tau = cfg.scheme.tau
    n_steps = int(round(cfg.t_end / tau))
    trace = SimulationTrace(tau=tau, seed=cfg.seed)
    if cfg.snapshot_every:
        trace.snapshots.append((0.0, state.u.copy(), state.v.copy()))

    last_good = state
    with np.errstate(all="ignore"):
        for step in range(1, n_steps + 1):
            tic = time.perf_counter()
            try:
                new, rep = stepper.step(state)
            except (StepFailureError, NumericBreakdownError) as exc:
                trace.stopped_by = "failure"
                trace.failure_message = str(exc)
                break
            wall_ms = (time.perf_counter() - tic) * 1e3
            new.t = step * tau
            du_rate = rep.increment_norm / tau
            dv_rate = rep.increment_norm_v / tau
            trace.records.append(
                TraceRecord(
                    step=step,
                    t=new.t,
                    du_rate=du_rate,
                    dv_rate=dv_rate,
                    nonlin_iters=rep.nonlinear_iterations,
                    stage_iters=rep.stage_iterations,
                    inner_iters=sum(sr.iterations for sr in rep.inner_solves),
                    wall_ms=wall_ms,
                    u_inf=float(np.abs(new.u).max()),
                )
            )
            state = new
            last_good = new
            if cfg.snapshot_every and step % cfg.snapshot_every == 0:
                trace.snapshots.append((new.t, new.u.copy(), new.v.copy()))
            if du_rate <= cfg.stop_tol and dv_rate <= cfg.stop_tol:
                trace.stopped_by = "steady"
                break

    trace.end_time = trace.records[-1].t if trace.records else 0.0
    if cfg.outdir:
        _write_run_artifacts(cfg, mesh, trace, last_good)
    return trace, last_good


def _write_run_artifacts(cfg, mesh, trace, state) -> None:
    out = Path(cfg.outdir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {"seed": cfg.seed, "label": cfg.label, "scheme": cfg.scheme.label,
            "tau": cfg.scheme.tau, "method": cfg.policy.method, "mode": cfg.policy.mode}
    rdio.write_trace_csv(out / "trace.csv", trace, meta)

    summary = {
        "label": cfg.label,
        "seed": cfg.seed,
        "scheme": cfg.scheme.label,
        "tau": cfg.scheme.tau,
        "method": cfg.policy.method,
        "mode": cfg.policy.mode,
        "mesh": {"kind": cfg.mesh_kind, "n": cfg.mesh_n, "path": cfg.mesh_path},
        "params": {"a": cfg.params.a, "b": cfg.params.b,
                   "d": cfg.params.d, "gamma": cfg.params.gamma},
        "end_time": trace.end_time,
        "stopped_by": trace.stopped_by,
        "failure_message": trace.failure_message,
        "total_iterations": trace.total_iterations,
        "max_u_inf": _json_float(trace.max_u_inf),
        "wall_ms_total": sum(r.wall_ms for r in trace.records),
    }
    report = turing_analysis(cfg.params) if cfg.report_turing else None
    if report is not None:
        summary["turing"] = report.to_json_dict()
    rdio.write_summary_json(out / "summary.json", summary)

    if np.isfinite(state.u).all() and np.isfinite(state.v).all():
        rdio.write_vtk(out / "fields.vtk", mesh, {"u": state.u, "v": state.v},
                       title=f"{cfg.label} t={trace.end_time}")

    report = report or turing_analysis(cfg.params)
    fastest = report.fastest_mode()
    if fastest is not None and len(trace.records) >= 3:
        k2 = math.pi**2 * (fastest[0] ** 2 + fastest[1] ** 2)
        series = growth_ratio_series(trace, cfg.params, k2)
        rdio.write_growth_csv(out / "growth.csv", series, meta)


def _json_float(x: float):
    return x if math.isfinite(x) else None


# --- convergence study ------------------------------------------------------

@dataclass
class EocRow:
    level: int
    tau: float
    n: int
    error_u: float
    error_v: float
    history: list = field(default_factory=list, repr=False)  # (t, e_u) samples


@dataclass
class EocReport:
    scheme: str
    rows: list

    @property
    def alpha_u(self):
        return _alphas([r.tau for r in self.rows], [r.error_u for r in self.rows])

    @property
    def alpha_v(self):
        return _alphas([r.tau for r in self.rows], [r.error_v for r in self.rows])


def _alphas(taus, errors):
    out = []
    for i in range(1, len(taus)):
        out.append(
            (math.log(errors[i]) - math.log(errors[i - 1]))
            / (math.log(taus[i]) - math.log(taus[i - 1]))
        )
    return out


def run_mms_level(
    scheme_name: str,
    tau: float,
    n: int,
    policy: NonlinearPolicy | None = None,
    params: SchnakenbergParams | None = None,
    t_end: float = 10.0,
    record_history: bool = False,
    linear: LinearSolveConfig | None = None,
):
    """One manufactured-solution run; returns (E_u, E_v, history)."""
    p = params or default_params()
    policy = policy or NonlinearPolicy("newton")
    mesh = unit_square_mesh(n)
    disc = Discretization(mesh)
    scheme = SchemeConfig.parse(scheme_name, tau)
    stepper = Stepper(disc, p, scheme, policy, linear, manufactured_sources(p))
    u0 = manufactured_initial(mesh)
    state = FieldPair(u0.copy(), u0.copy(), 0.0)
    xi = manufactured_solution()
    steps = int(round(t_end / tau))
    history = []
    for step in range(1, steps + 1):
        state, _ = stepper.step(state)
        state.t = step * tau
        if record_history:
            history.append((state.t, l2_error_exact(mesh, state.u, xi, state.t)))
    e_u = l2_error_exact(mesh, state.u, xi, t_end)
    e_v = l2_error_exact(mesh, state.v, xi, t_end)
    return e_u, e_v, history


def eoc_mesh_size(scheme_name: str, level: int) -> int:
    """Timestep-mesh coupling: n = 2^i for the second-order schemes
    (h = tau), nearest n to 1/sqrt(tau) for backward Euler (h ~ sqrt(tau))."""
    if scheme_name == "be":
        return int(round(2 ** (level / 2)))
    return 2**level


def run_eoc(
    scheme_name: str,
    levels,
    policy: NonlinearPolicy | None = None,
    params: SchnakenbergParams | None = None,
    record_history: bool = False,
) -> EocReport:
    """Convergence study over tau_i = 2^-i on t in [0, 10]."""
    rows = []
    for level in levels:
        tau = 2.0 ** (-level)
        n = eoc_mesh_size(scheme_name, level)
        e_u, e_v, hist = run_mms_level(
            scheme_name, tau, n, policy, params, record_history=record_history
        )
        rows.append(EocRow(level=level, tau=tau, n=n, error_u=e_u, error_v=e_v,
                           history=hist))
    return EocReport(scheme=scheme_name, rows=rows)


# --- growth-rate diagnostics -------------------------------------------------

@dataclass
class GrowthSeries:
    steps: list
    times: list
    ratios: list
    theory: float
    window: tuple | None = None  # (start, stop) indices into ratios
    measured_ratio: float = math.nan


def growth_ratio_series(trace: SimulationTrace, p: SchnakenbergParams, k2: float) -> GrowthSeries:
    """Per-step increment ratios ||du^n|| / ||du^{n-1}|| against the
    theoretical e^{lambda tau} of the mode with squared wavenumber k2."""
    if len(trace.records) < 3:
        raise ValueError("growth series needs at least 3 steps")
    lam = dispersion_growth_rate(p, k2)
    theory = math.exp(lam * trace.tau)
    steps, times, ratios = [], [], []
    recs = trace.records
    for i in range(2, len(recs)):
        denom = recs[i - 1].du_rate
        if denom == 0.0:
            continue
        steps.append(recs[i].step)
        times.append(recs[i].t)
        ratios.append(recs[i].du_rate / denom)
    window = detect_exponential_window(ratios)
    measured = math.nan
    if window is not None:
        lo, hi = window
        measured = float(np.mean(ratios[lo:hi]))
    return GrowthSeries(steps=steps, times=times, ratios=ratios, theory=theory,
                        window=window, measured_ratio=measured)


def detect_exponential_window(ratios, rel_var: float = 0.02, min_len: int = 5):
    """Longest contiguous span where every ratio is > 1 and the spread
    satisfies max <= (1 + rel_var) * min; None when no such span exists."""
    best = None
    left = 0
    maxq: deque = deque()  # decreasing values
    minq: deque = deque()  # increasing values
    for right, x in enumerate(ratios):
        if x <= 1.0 or not math.isfinite(x):
            left = right + 1
            maxq.clear()
            minq.clear()
            continue
        while maxq and ratios[maxq[-1]] <= x:
            maxq.pop()
        maxq.append(right)
        while minq and ratios[minq[-1]] >= x:
            minq.pop()
        minq.append(right)
        while ratios[maxq[0]] > (1.0 + rel_var) * ratios[minq[0]]:
            if maxq[0] == left:
                maxq.popleft()
            if minq[0] == left:
                minq.popleft()
            left += 1
        if right - left + 1 >= min_len and (
            best is None or right - left + 1 > best[1] - best[0]
        ):
            best = (left, right + 1)
    return best


# --- IMEX comparison ----------------------------------------------------------

_VARIANT_POLICIES = {
    "imex": NonlinearPolicy("picard", mode="fixed", count=1),
    "newton1": NonlinearPolicy("newton", mode="fixed", count=1),
    "picard": NonlinearPolicy("picard", mode="adaptive"),
    "newton": NonlinearPolicy("newton", mode="adaptive"),
}


@dataclass
class ImexComparison:
    results: dict  # (scheme, variant) -> summary dict
    traces: dict   # (scheme, variant) -> SimulationTrace


def run_imex_comparison(
    base: RunConfig,
    schemes=("be", "cn", "cnb5", "fsts"),
    variants=("imex", "newton1", "picard", "newton"),
) -> ImexComparison:
    """Run each scheme under each nonlinear-solver variant from the same
    seeded initial condition; divergence is recorded, never raised."""
    results = {}
    traces = {}
    for scheme_name in schemes:
        for variant in variants:
            cfg = replace(
                base,
                scheme=SchemeConfig.parse(scheme_name, base.scheme.tau),
                policy=_VARIANT_POLICIES[variant],
                outdir=None,
                label=f"{scheme_name}-{variant}",
            )
            trace, _ = run_simulation(cfg)
            results[(scheme_name, variant)] = {
                "end_time": trace.end_time,
                "stopped_by": trace.stopped_by,
                "max_u_inf": trace.max_u_inf,
                "total_iterations": trace.total_iterations,
            }
            traces[(scheme_name, variant)] = trace
    return ImexComparison(results=results, traces=traces)


# --- Picard contraction probe --------------------------------------------------

@dataclass
class ContractionRow:
    tau: float
    max_ratio: float
    iterations: int       # updates performed, including the certifying one
    converged_after: int  # updates whose increment still exceeded the tolerance


def picard_contraction_probe(
    mesh: Mesh,
    p: SchnakenbergParams,
    tau_list,
    seed: int = 0,
    amplitude: float = 1e-2,
    linear: LinearSolveConfig | None = None,
) -> list:
    """For each timestep length, run one BE step's Picard iteration to a
    tight tolerance and report the worst contraction ratio
    ||xi_{k+1} - xi*|| / ||xi_k - xi*|| toward the converged iterate."""
    disc = Discretization(mesh)
    eq = equilibrium(p)
    rng = np.random.default_rng(seed)
    n = mesh.n_vertices
    state = FieldPair(
        eq.u_eq + rng.uniform(-amplitude, amplitude, n),
        eq.v_eq + rng.uniform(-amplitude, amplitude, n),
        0.0,
    )
    cfg = linear or LinearSolveConfig(rel_tol=1e-12)

    rows = []
    for tau in tau_list:
        stage = make_stage_be(disc, p, tau, state)
        iterates = [state]
        deltas = []
        for _ in range(200):
            new, _ = stage_picard_update(stage, iterates[-1], cfg)
            deltas.append(math.hypot(
                disc.norm(new.u - iterates[-1].u), disc.norm(new.v - iterates[-1].v)
            ))
            iterates.append(new)
            if deltas[-1] < 1e-13:
                break
        star = iterates[-1]
        errors = [
            math.hypot(disc.norm(it.u - star.u), disc.norm(it.v - star.v))
            for it in iterates[:-1]
        ]
        ratios = [
            errors[k + 1] / errors[k]
            for k in range(len(errors) - 1)
            if errors[k] > 1e-11
        ]
        max_ratio = max(ratios) if ratios else 0.0
        rows.append(ContractionRow(
            tau=tau,
            max_ratio=max_ratio,
            iterations=len(iterates) - 1,
            converged_after=sum(1 for d in deltas if d >= 1e-13),
        ))
    return rows
