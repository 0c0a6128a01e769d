"""qsdp: semidefinite programming toolkit for quantum information."""

from .blockmat import (
    BlockStructure,
    PsdCheck,
    StructureMismatchError,
    SymBlockMat,
    embed_hermitian,
    frobenius_inner,
    is_psd,
    mat,
    recover_complex,
    schur_complement,
    sylvester_psd_oracle,
    vec,
)
from .problem import (
    ConeProblem,
    Solution,
    ValidationReport,
    validate_problem,
    STATUS_SUCCESS,
    STATUS_PRIMAL_INFEASIBLE,
    STATUS_DUAL_INFEASIBLE,
    STATUS_LACK_OF_PROGRESS,
    STATUS_NUMERICAL_FAILURE,
    STATUS_ITERATION_LIMIT,
)
from .ipm import (
    IterationLog,
    Iterate,
    SolverConfig,
    cold_start,
    corrector_nu,
    newton_direction,
    perturb,
    residuals,
    solve,
    step_length,
)

from .modeling import (
    MatExpr,
    Model,
    ModelError,
    ScalarExpr,
    clean,
    model_from_json,
    model_to_json,
    partial_trace,
    partial_transpose,
    scalar_nonneg,
)
from .npa import (
    Scenario,
    build_moment_model,
    chsh_functional,
    generate_words,
    mlp_bound,
    mlp_constraints,
    nv_build_basis,
    nv_solve,
    reduce_word,
    solve_bell,
)
from .graphs import GraphSpec, exclusivity_graph, lovasz_theta, weighted_theta
from .quantum import (
    ChoiMatrix,
    DensityMatrix,
    apply_choi,
    channel_feasibility,
    choi_of_channel,
    dps_test,
    qsd_optimal,
    swap_probability_extract,
    werner_state,
)
from .sos import sos_certificate, tsirelson_sos_chsh
from .seesaw import BellSeesawTask, PamSeesawTask, chsh_seesaw, qrac_seesaw, seesaw
from .sdpa import parse_sdpa, write_sdpa
from .report import RunReport, dimacs_errors

__version__ = "0.1.0"

__all__ = [
    "BlockStructure",
    "SymBlockMat",
    "PsdCheck",
    "StructureMismatchError",
    "frobenius_inner",
    "vec",
    "mat",
    "embed_hermitian",
    "recover_complex",
    "is_psd",
    "sylvester_psd_oracle",
    "schur_complement",
    "ConeProblem",
    "Solution",
    "ValidationReport",
    "validate_problem",
    "SolverConfig",
    "Iterate",
    "IterationLog",
    "cold_start",
    "residuals",
    "newton_direction",
    "step_length",
    "corrector_nu",
    "perturb",
    "solve",
    "STATUS_SUCCESS",
    "STATUS_PRIMAL_INFEASIBLE",
    "STATUS_DUAL_INFEASIBLE",
    "STATUS_LACK_OF_PROGRESS",
    "STATUS_NUMERICAL_FAILURE",
    "STATUS_ITERATION_LIMIT",
    # modeling
    "Model",
    "MatExpr",
    "ScalarExpr",
    "ModelError",
    "clean",
    "scalar_nonneg",
    "model_to_json",
    "model_from_json",
    "partial_trace",
    "partial_transpose",
    # hierarchies
    "Scenario",
    "reduce_word",
    "generate_words",
    "build_moment_model",
    "solve_bell",
    "chsh_functional",
    "mlp_constraints",
    "mlp_bound",
    "nv_build_basis",
    "nv_solve",
    # applications
    "GraphSpec",
    "lovasz_theta",
    "weighted_theta",
    "exclusivity_graph",
    "DensityMatrix",
    "ChoiMatrix",
    "choi_of_channel",
    "apply_choi",
    "channel_feasibility",
    "dps_test",
    "swap_probability_extract",
    "qsd_optimal",
    "werner_state",
    "sos_certificate",
    "tsirelson_sos_chsh",
    "seesaw",
    "BellSeesawTask",
    "PamSeesawTask",
    "chsh_seesaw",
    "qrac_seesaw",
    # interchange
    "parse_sdpa",
    "write_sdpa",
    "RunReport",
    "dimacs_errors",
]
