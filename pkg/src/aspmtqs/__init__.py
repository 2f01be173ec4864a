"""aspmtqs: non-monotonic spatial logic programs compiled to SMT.

Parses programs with qualitative-spatial atoms, desugars defaults, grounds
over finite sorts, checks tightness, applies Clark completion, encodes the
spatial layer as polynomial constraints, and solves with an external
SMT-LIB solver over nonlinear real arithmetic.
"""

from .model import (
    Atom,
    ConstantDecl,
    FnEq,
    Formula,
    IntensionalSignature,
    ObjectDecl,
    PolyCmp,
    Program,
    ProgramError,
    Rule,
    SortDecl,
    SourceSpan,
    ValidationReport,
    validate_program,
)
from .oracle import (
    DomainTooLarge,
    FiniteInterpretation,
    OracleError,
    ReductContext,
    enumerate_classical_models,
    enumerate_stable_models,
    evaluate,
    star_transform,
)
from .parser import ModelBinding, ParseError, parse_program, parse_solver_model, pretty_program
from .smtlib import (
    EmitError,
    EntailmentResult,
    EntailmentStatus,
    SmtInstance,
    SolverLaunchError,
    SolverProtocolError,
    SolverVerdict,
    SpatialModel,
    Status,
    check_entailed,
    default_solver_command,
    emit_smtlib,
    solve,
    verify_model,
)
from .spatial import (
    CATALOG,
    ArgRef,
    KindMismatch,
    MissingSlot,
    RelationSchema,
    UnknownRelation,
    domain_axioms,
    encode_relation,
    evaluate_relation,
)
from .transform import (
    CompletedTheory,
    DependencyGraph,
    GroundTheory,
    GroundingError,
    PipelineResult,
    TightnessError,
    check_av_separated,
    check_f_plain,
    clark_completion,
    dependency_graph,
    desugar_defaults,
    ground,
    is_tight,
    run_pipeline,
    to_clark_normal_form,
)

__version__ = "0.1.0"
