"""lcgf: truncated Levi-Civita scalars, generalized functions, and a
contradiction-free Laplace transform, with an HTTP service and CLI on top."""

from .errors import (
    ConstructionError,
    ContextMismatchError,
    DomainError,
    DomainMembershipError,
    LCZeroDivisionError,
    LcgfError,
    NotFiniteError,
    ParseError,
    SupportError,
    ToleranceError,
    UnsupportedError,
    UnsupportedQueryError,
)
from .levicivita import (
    Classification,
    INFINITE_VALUATION,
    LCComplex,
    LCReal,
    TruncationContext,
    as_lc_complex,
    as_lc_real,
    compare,
    exp_scale,
    lc_to_records,
    records_to_lc,
)
from .mollify import Mollifier, QuadratureScheme, get_mollifier
from .genfunc import (
    Algebra,
    DEFAULT_ALGEBRA,
    FALSE,
    GenFunction,
    TRUE,
    UNDETERMINED,
    Verdict,
    associated,
    evaluate_at,
    integral_compact,
    normalize,
    pairing,
    support,
    weak_equal,
)
from .laplace import (
    AuditProblem,
    ClassicalTerm,
    ContradictionReport,
    IVPSpec,
    LaplaceDomainElement,
    LaplaceImage,
    LemmaCheck,
    SolveResult,
    audit_classical,
    check_lemma_6_2,
    classical_table,
    derivative_rule,
    from_genfunction,
    inverse_transform,
    solve_ivp,
    transform,
    transform_derivative_shifted,
)

__version__ = "0.1.0"
