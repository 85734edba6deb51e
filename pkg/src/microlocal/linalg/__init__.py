"""Dense complex linear algebra, primary matrix functions and dual numbers."""

from .core import (
    DEFAULT_TOL,
    LinAlgError,
    ToleranceConfig,
    as_matrix,
    complex_from_json,
    complex_to_json,
    eigenvalues,
    fro,
    identity,
    is_invertible,
    matrix_from_json,
    matrix_to_json,
    null_space,
    orth,
    rank,
    rel_diff,
    solve,
    zeros,
)
from .matfunc import (
    EXP,
    LOG_ARG0_2PI,
    PHI,
    BranchCutError,
    BranchCutWarning,
    FunctionSpec,
    exp_spec,
    log_branch_arg0_2pi,
    matrix_function,
    phi,
    phi_scalar,
    phi_taylor,
    schur_parlett,
)
