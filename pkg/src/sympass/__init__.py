"""Polarization, rearrangement, and minimax tools on symmetric grids.

Modules: grid (domains, grid functions, norms), rearrange (polarizers,
Schwarz rearrangement, greedy symmetrization), energy (the lambda-affine
functional families and their validators), minimax (paths and the descent
estimate of the mountain pass level), trick (lambda scans, Palais-Smale
extraction, critical point refinement), cli (the sympass command).
"""

from .backend import BACKEND
from .energy import (
    EnergySpec,
    H3Report,
    H4Report,
    LambdaFamily,
    PurePower,
    Surrogate,
    WeightedPower,
    check_h3,
    check_h4,
)
from .grid import (
    Domain,
    GridFunction,
    NormKind,
    embed_constant,
    lp_norm,
    reflect,
    sobolev_full_norm,
    sobolev_seminorm,
    v_norm,
)
from .minimax import (
    DescentResult,
    MinimaxConfig,
    MPEstimate,
    Path,
    StepRule,
    descend_path,
    make_initial_path,
    mountain_pass_value,
    path_max,
    polyline_max,
    reparametrize_collapse,
)
from .rearrange import (
    Polarizer,
    PolarizerSequence,
    SymmetrizationConfig,
    SymmetrizationResult,
    approximate_curve,
    approximate_symmetrization,
    origin_polarizer,
    polarize,
    polarizer_pool,
    schwarz,
    theta,
)
from .trick import (
    Corollary2Report,
    CriticalPointRecord,
    DenjoyPoint,
    PSReport,
    SBPSRow,
    ScanConfig,
    ScanResult,
    ScanRow,
    corollary2_sequence,
    extract_sbps,
    refine_to_critical,
    scan_c,
    select_denjoy_points,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Domain",
    "GridFunction",
    "NormKind",
    "lp_norm",
    "v_norm",
    "sobolev_seminorm",
    "sobolev_full_norm",
    "reflect",
    "embed_constant",
    "Polarizer",
    "PolarizerSequence",
    "SymmetrizationConfig",
    "SymmetrizationResult",
    "polarize",
    "polarizer_pool",
    "origin_polarizer",
    "schwarz",
    "theta",
    "approximate_symmetrization",
    "approximate_curve",
    "PurePower",
    "WeightedPower",
    "EnergySpec",
    "LambdaFamily",
    "Surrogate",
    "H3Report",
    "H4Report",
    "check_h3",
    "check_h4",
    "StepRule",
    "MinimaxConfig",
    "Path",
    "MPEstimate",
    "DescentResult",
    "make_initial_path",
    "path_max",
    "polyline_max",
    "descend_path",
    "mountain_pass_value",
    "reparametrize_collapse",
    "ScanConfig",
    "ScanResult",
    "ScanRow",
    "DenjoyPoint",
    "PSReport",
    "SBPSRow",
    "CriticalPointRecord",
    "Corollary2Report",
    "scan_c",
    "select_denjoy_points",
    "extract_sbps",
    "refine_to_critical",
    "corollary2_sequence",
    "__version__",
]
