# fredholm_completion/__init__.py
from .extmath import (
    ExtNat,
    ExtInt,
    ComplexRational,
    INF,
    ZERO,
    nat,
    ext_add,
    ext_sum,
    ext_leq,
    ext_sub,
    parse_rational,
    parse_complex,
)

from .fredholm import (
    FredholmData,
    ClassSet,
    SpectrumFlags,
    deficiency,
    index,
    classify,
    adjoint_data,
    spectra_flags,
)

from .models import (
    BasisVector,
    FiniteThenConstant,
    Harmonic,
    Periodic,
    Diagonal,
    ForwardShift,
    BackwardShift,
    DirectSum,
    Scaled,
    Shifted,
    point_data,
    cokernel_basis,
    kernel_basis,
    truncate,
    section,
    adjoint_model,
    norm_bound,
    parse_model,
    model_to_json,
)

from .decision import (
    Target,
    Verdict,
    DecisionOutcome,
    ZeroCompletion,
    RowConstruction,
    ColumnConstruction,
    FredholmPair,
    decide,
    condition_i,
    condition_iii,
    lower_conditions_direct,
    reversed_adjoints,
    decision_to_json,
)

from .construct import (
    BasisMap,
    CompletionCertificate,
    Predicted,
    construct,
    covered_indices,
    apply_certificate,
    certificate_to_json,
    certificate_from_json,
    zero_certificate,
)

from .verify import (
    TruncationReport,
    verify_completion,
    verify_point_data,
    partial_isometry_residual,
    numerical_kernel_dim,
    system_section,
)

from .spectra import (
    Grid,
    PointReport,
    parse_grid,
    delta_sets,
    point_report,
    sandwich_report,
    sandwich_summary,
    diagonal_corner_check,
    write_csv,
)

from .problem import (
    ProblemFile,
    load_problem,
    parse_problem,
    load_certificate,
    format_json,
    format_yaml,
)

from .errors import (
    FredholmError,
    BothInfinite,
    UnsupportedPoint,
    NotAvailable,
    BadArity,
    ArityMismatch,
    NotConstructible,
    MissingCokernel,
    ConsistencyViolation,
    NumericalIllConditioned,
    ParseError,
)

__all__ = [
    'ExtNat', 'ExtInt', 'ComplexRational', 'INF', 'ZERO', 'nat',
    'ext_add', 'ext_sum', 'ext_leq', 'ext_sub', 'parse_rational', 'parse_complex',
    'FredholmData', 'ClassSet', 'SpectrumFlags', 'deficiency', 'index', 'classify',
    'adjoint_data', 'spectra_flags',
    'BasisVector', 'FiniteThenConstant', 'Harmonic', 'Periodic', 'Diagonal', 'ForwardShift',
    'BackwardShift', 'DirectSum', 'Scaled', 'Shifted', 'point_data', 'cokernel_basis',
    'kernel_basis', 'truncate', 'section', 'adjoint_model', 'norm_bound', 'parse_model',
    'model_to_json',
    'Target', 'Verdict', 'DecisionOutcome', 'ZeroCompletion', 'RowConstruction',
    'ColumnConstruction', 'FredholmPair', 'decide', 'condition_i', 'condition_iii',
    'lower_conditions_direct', 'reversed_adjoints', 'decision_to_json',
    'BasisMap', 'CompletionCertificate', 'Predicted', 'construct', 'covered_indices',
    'apply_certificate', 'certificate_to_json', 'certificate_from_json', 'zero_certificate',
    'TruncationReport', 'verify_completion', 'verify_point_data', 'partial_isometry_residual',
    'numerical_kernel_dim', 'system_section',
    'Grid', 'PointReport', 'parse_grid', 'delta_sets', 'point_report', 'sandwich_report',
    'sandwich_summary', 'diagonal_corner_check', 'write_csv',
    'ProblemFile', 'load_problem', 'parse_problem', 'load_certificate', 'format_json', 'format_yaml',
    'FredholmError', 'BothInfinite', 'UnsupportedPoint', 'NotAvailable', 'BadArity',
    'ArityMismatch', 'NotConstructible', 'MissingCokernel', 'ConsistencyViolation',
    'NumericalIllConditioned', 'ParseError',
]
