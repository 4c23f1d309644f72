"""Discrete Riesz potential theory: sweeping, capacities, and Green kernels."""

from .balayage import (
    SignedSweepResult,
    SweepChecks,
    SweepResult,
    sweep,
    sweep_dirac_by_inversion,
    sweep_signed,
    verify_integral_representation,
    verify_symmetry,
    verify_transitivity,
)
from .core import (
    DiscreteMeasure,
    GramMatrix,
    KernelSpec,
    assemble_gram,
    cross_energy,
    dirac,
    energy,
    potential,
    potential_at,
    riesz_kernel,
)
from .equilibrium import (
    EquilibriumResult,
    green_equilibrium,
    riesz_equilibrium,
    verify_green_minimality,
)
from .errors import (
    CenterCharged,
    CenterInversion,
    DegenerateNodes,
    DimensionMismatch,
    EmptyShellRun,
    IllConditioned,
    IndeterminateValue,
    NodesOutsideDomain,
    PointOutsideDomain,
    RieszLabError,
    SchemaError,
    SolverFailure,
)
from .green import (
    GreenKernel,
    GreenPotentialResult,
    green_eval,
    green_gram,
    green_potential,
    green_values,
    verify_domination,
    verify_energy_decomposition,
)
from .kelvin import (
    Inversion,
    invert_point,
    invert_points,
    invert_shape,
    kelvin_transform,
    verify_potential_covariance,
)
from .regions import (
    Ball,
    BallComplement,
    HalfSpace,
    InvertedShape,
    PointCloud,
    Region,
    Shape,
    SphereShell,
    UnionShape,
    ball_complement_region,
    ball_region,
    build_region,
    cloud_region,
    fibonacci_ball,
    fibonacci_disk,
    fibonacci_sphere,
    half_space_region,
    reinterpret_region,
    sample_points_off,
    sphere_region,
    union_region,
)
from .solver import QPSolution, solve_nonneg, solve_simplex
from .thinness import (
    ShellStat,
    ThinAtInfinityReport,
    WienerReport,
    classify_terms,
    mass_loss_test,
    thin_at_infinity_report,
    wiener_report,
)

__version__ = "0.1.0"

__all__ = [
    "Ball",
    "BallComplement",
    "CenterCharged",
    "CenterInversion",
    "DegenerateNodes",
    "DimensionMismatch",
    "DiscreteMeasure",
    "EmptyShellRun",
    "EquilibriumResult",
    "GramMatrix",
    "GreenKernel",
    "GreenPotentialResult",
    "HalfSpace",
    "IllConditioned",
    "IndeterminateValue",
    "InvertedShape",
    "Inversion",
    "KernelSpec",
    "NodesOutsideDomain",
    "PointCloud",
    "PointOutsideDomain",
    "QPSolution",
    "Region",
    "RieszLabError",
    "SchemaError",
    "Shape",
    "ShellStat",
    "SignedSweepResult",
    "SolverFailure",
    "SphereShell",
    "SweepChecks",
    "SweepResult",
    "ThinAtInfinityReport",
    "UnionShape",
    "WienerReport",
    "assemble_gram",
    "ball_complement_region",
    "ball_region",
    "build_region",
    "classify_terms",
    "cloud_region",
    "cross_energy",
    "dirac",
    "energy",
    "fibonacci_ball",
    "fibonacci_disk",
    "fibonacci_sphere",
    "green_equilibrium",
    "green_eval",
    "green_gram",
    "green_potential",
    "green_values",
    "half_space_region",
    "invert_point",
    "invert_points",
    "invert_shape",
    "kelvin_transform",
    "mass_loss_test",
    "potential",
    "potential_at",
    "reinterpret_region",
    "riesz_equilibrium",
    "riesz_kernel",
    "sample_points_off",
    "solve_nonneg",
    "solve_simplex",
    "sphere_region",
    "sweep",
    "sweep_dirac_by_inversion",
    "sweep_signed",
    "thin_at_infinity_report",
    "union_region",
    "verify_domination",
    "verify_energy_decomposition",
    "verify_green_minimality",
    "verify_integral_representation",
    "verify_potential_covariance",
    "verify_symmetry",
    "verify_transitivity",
    "wiener_report",
]
