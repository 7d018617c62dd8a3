"""Finite-dimensional Banach lattices, their p-concavifications and the
Fremlin tensor square, with numerical checks that the 2-concavification
matches the diagonal of the tensor square."""

from .concavification import (
    ConcaveSeminormResult,
    EstimateConstantReport,
    al_trinorm,
    concavification_seminorm,
    lower_estimate_constant,
    odot,
    oplus,
    seminorm_bruteforce_oracle,
    upper_estimate_constant,
    verify_estimate_transfer,
)
from .diagonal import (
    DiagonalElement,
    IsometryReport,
    QuotientValue,
    diagonal_map,
    ioc_residual,
    quotient_norm_dual,
    quotient_norm_primal,
    split_offdiagonal,
    verify_main_isometry,
)
from .fremlin import (
    CutPool,
    NormBracket,
    RegularOperator,
    TensorElement,
    fremlin_norm,
    pairing,
    regular_norm,
    tensor_meet_eval,
)
from .labcli import ExperimentConfig, ExperimentReport, emit_table, run_experiment
from .lattice import (
    DimensionError,
    HomogeneousFunction,
    NormedLatticeSpace,
    apply_homogeneous,
    basis_vector,
    eval_dual_norm,
    eval_norm,
    half_power_product,
    is_disjoint,
    signed_power,
)
from .simplex import linprog

__version__ = "0.1.0"
