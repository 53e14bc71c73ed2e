"""Numerical laboratory for the mass-critical focusing Schrodinger equation
with an attractive inverse-square potential: ground states, blow-up runs,
mass-concentration measurements, and finite-grid bubble decompositions."""

from .grids import (
    CartesianGrid,
    Field,
    RadialGrid,
    critical_coupling,
    gradient_norm_sq,
    origin_exponent,
    quadrature,
    rescale,
    translate,
)
from .functionals import (
    InvariantReport,
    diamagnetic_defect,
    energy,
    gn_ratio,
    h1_norm,
    hardy_functional,
    hardy_margin,
    lp_norm,
    mass,
)
from .ground_state import (
    GroundState,
    equation_residual,
    oracle_l2_distance,
    sharp_constant,
    shooting_oracle,
    solve_ground_state,
)
from .evolution import (
    BlowupEstimate,
    EvolveConfig,
    EvolutionState,
    EvolutionTrace,
    adaptive_dt,
    estimate_t_star,
    evolve,
    step,
)
from .concentration import (
    ConcentrationRow,
    WindowSpec,
    best_center,
    concentration_curve,
    focusing_scale,
    rescaled_snapshot,
    windowed_mass,
)
from .profiles import (
    CompactnessReport,
    Decomposition,
    DefectReport,
    FieldSequence,
    compactness_harness,
    cross_term,
    defect_report,
    extract_profiles,
    generate_synthetic,
)
from .checkpoint import read_checkpoint, write_checkpoint

__version__ = "0.1.0"
