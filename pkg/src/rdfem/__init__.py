"""Fully implicit FEM solvers for two-species reaction-diffusion systems."""

from .assembly import (
    assemble_mass,
    assemble_nonlinear_b,
    assemble_stiffness,
    assemble_unit_load,
    interpolate,
    l2_error_exact,
    l2_norm,
)
from .harness import (
    RunConfig,
    picard_contraction_probe,
    run_eoc,
    run_imex_comparison,
    run_simulation,
)
from .kinetics import (
    SchnakenbergParams,
    dispersion_growth_rate,
    equilibrium,
    reaction_eval,
    turing_analysis,
)
from .linsolve import BlockOperator2x2, LinearSolveConfig, cg_solve, gmres_solve
from .mesh import (
    Mesh,
    load_mesh,
    mesh_spacing,
    save_mesh,
    unit_cube_mesh,
    unit_square_mesh,
)
from .stepping import (
    Discretization,
    FieldPair,
    NonlinearPolicy,
    SchemeConfig,
    SourceTerms,
    Stepper,
    manufactured_sources,
)

__version__ = "0.1.0"
