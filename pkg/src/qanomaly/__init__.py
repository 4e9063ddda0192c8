"""Perturbative symmetry anomalies of finite quantum systems via CE cohomology."""

__version__ = "0.1.0"

from .cecomplex import (
    Cochain,
    CohomologyReport,
    GeneralCochain,
    LieAlgebraData,
    cohomology_bruteforce,
    cohomology_theorem,
    d_abelian,
    d_general,
    homotopy,
)
from .config import Tolerances
from .deformation import (
    DeformationProblem,
    DeformationSeries,
    ObstructionClass,
    Obstructed,
    anomaly_report,
    completion_residual,
    continue_series,
    feasibility_residual,
    obstruction_second_order,
    solve_first_order,
)
from .errors import (
    AnomalyError,
    FirstOrderObstructed,
    InputError,
    NotExactError,
    NumericalError,
    SpectrumError,
)
from .linalg import AntiHermitianMatrix, anti_hermitize, commutator, real_rank
from .spectral import (
    BlockIndex,
    CommutantBasis,
    JointSpectrum,
    SymmetryPair,
    block_project,
    commutant_basis,
    joint_diagonalize,
    structure_constants,
)
