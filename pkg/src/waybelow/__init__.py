"""Computable bases with a way-below relation, finite-model checks, and exact reals."""

from .algebra import (
    ONE,
    ZERO,
    AlgebraError,
    CodeAlgebra,
    canon_key,
    code_congruent,
    dnf_congruent,
    dnf_meet,
    dnf_plus,
    ev,
    finset,
    formal_dnf,
    imposed_leq,
    table_algebra,
    upper_order,
)
from .basis import (
    AbstractBasis,
    AxiomReport,
    BasisError,
    Classification,
    Exhaustive,
    RandomUniverse,
    SearchExhausted,
    check_axioms,
    classify,
    dual_wilker_star,
    interpolant,
    or_closure,
    wilker_witness,
)
from .expr import ParseError, eval_rational, parse_expr, print_expr
from .instances import (
    BUILTIN_BASES,
    LoadError,
    RoundedIdeal,
    builtin_basis,
    con_check,
    diamond_basis,
    discrete_basis,
    free_dl_basis,
    is_rounded_ideal,
    load_finite_basis,
    point_ideal,
    principal_ideal,
    real_line_basis,
    real_line_meet_basis,
    sigma_basis,
    two_chain_basis,
    unit_interval_basis,
    unit_interval_meet_basis,
)
from .intervals import IntervalCode, IntervalError, make_interval, make_union, parse_code
from .matrices import (
    Matrix,
    MatrixError,
    apply_ideal,
    builtin_real_matrix,
    compose,
    identity,
    matrix_hom_roundtrip,
    matrix_of_hom,
    pair_matrix,
    preserves,
    product_basis,
    validate_matrix,
)
from .nucleus import (
    CarrierTooLarge,
    apply_E,
    apply_E_enumerated,
    check_nucleus_laws,
    is_admissible,
    points_theorem_check,
    recovered_waybelow,
    waybelow_recovery_report,
)
from .realcalc import DepthExhausted, RationalInterval, compile_expr, evaluate

__all__ = [name for name in dir() if not name.startswith("_")]
