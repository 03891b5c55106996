"""Exact-arithmetic toolkit for uniform recurrence of morphic sequences.

A morphic sequence is phi(y) where y is the fixed point of an endomorphism
sigma prolongable on a start letter and phi is a second morphism applied
letter by letter.  The package parses such systems from a small text format,
computes their growth and return-word structure with exact integer and
rational arithmetic, and decides whether the sequence is uniformly recurrent,
emitting a certificate that an independent checker can replay.
"""

from .words import Alphabet, factor_set, occurrences_in_word
from .errors import (
    MorphrecError,
    ParseError,
    AlphabetMismatch,
    NotPrimitive,
    PreconditionViolated,
    NormalizationUnsupported,
    BudgetExhausted,
    NotEnoughOccurrences,
    PrefixInvalid,
    NoPrimitiveSubmorphism,
    NoOccurrence,
    WitnessSearchExhausted,
    InternalConsistencyError,
)
from .morphism import Morphism, MorphismFlags, compose, power, classify
from .system import (
    ProlongableSystem,
    parse_system,
    system_to_text,
    restrict_to_reachable,
    normalize_to_coding,
)
from .growth import (
    PerronValue,
    GrowthType,
    BlockDecomposition,
    IncidenceStructure,
    incidence,
    growth_type,
    block_decomposition,
    compare_perron,
    horn_exponent,
    is_primitive,
    letter_envelopes,
    pq_constants,
)
from .stream import (
    FixedPointStream,
    prefix,
    occurrences,
    max_gap,
    MaxGapResult,
    complexity,
    ComplexityResult,
    factor_language,
)
from .returns import (
    ReturnTable,
    return_words_to_word,
    ReturnSubstitution,
    return_substitution,
    pms_decompose,
    DriverExit,
    DerivedDescriptor,
    build_sigma_U,
    delta_reconstruct,
    derived_step,
)
from .constants import (
    compute_R_sigma,
    compute_K,
    compute_caps,
    compute_constant_sheet,
    SubMorphismConstants,
    CapExpression,
    CapsResult,
    ConstantSheet,
)
from .decider import (
    Certificate,
    Verdict,
    PreparedSystem,
    prepare,
    periodic_checklist,
    decide_uniform_recurrence,
    derive_chain,
    verify_certificate,
    UNIFORMLY_RECURRENT,
    NOT_UNIFORMLY_RECURRENT,
    INCONCLUSIVE,
)
from .oracle import (
    GapViolation,
    OracleReport,
    window_ur_check,
    brute_force_return_words,
)

__version__ = "1.0.0"

__all__ = [
    "Alphabet",
    "factor_set",
    "occurrences_in_word",
    "MorphrecError",
    "ParseError",
    "AlphabetMismatch",
    "NotPrimitive",
    "PreconditionViolated",
    "NormalizationUnsupported",
    "BudgetExhausted",
    "NotEnoughOccurrences",
    "PrefixInvalid",
    "NoPrimitiveSubmorphism",
    "NoOccurrence",
    "WitnessSearchExhausted",
    "InternalConsistencyError",
    "Morphism",
    "MorphismFlags",
    "compose",
    "power",
    "classify",
    "ProlongableSystem",
    "parse_system",
    "system_to_text",
    "restrict_to_reachable",
    "normalize_to_coding",
    "PerronValue",
    "GrowthType",
    "BlockDecomposition",
    "IncidenceStructure",
    "incidence",
    "growth_type",
    "block_decomposition",
    "compare_perron",
    "horn_exponent",
    "is_primitive",
    "letter_envelopes",
    "pq_constants",
    "FixedPointStream",
    "prefix",
    "occurrences",
    "max_gap",
    "MaxGapResult",
    "complexity",
    "ComplexityResult",
    "factor_language",
    "ReturnTable",
    "return_words_to_word",
    "ReturnSubstitution",
    "return_substitution",
    "pms_decompose",
    "DriverExit",
    "DerivedDescriptor",
    "build_sigma_U",
    "delta_reconstruct",
    "derived_step",
    "compute_R_sigma",
    "compute_K",
    "compute_caps",
    "compute_constant_sheet",
    "SubMorphismConstants",
    "CapExpression",
    "CapsResult",
    "ConstantSheet",
    "Certificate",
    "Verdict",
    "PreparedSystem",
    "prepare",
    "periodic_checklist",
    "decide_uniform_recurrence",
    "derive_chain",
    "verify_certificate",
    "UNIFORMLY_RECURRENT",
    "NOT_UNIFORMLY_RECURRENT",
    "INCONCLUSIVE",
    "GapViolation",
    "OracleReport",
    "window_ur_check",
    "brute_force_return_words",
]
