"""Type checking and normalization by evaluation for the Kripke-style modal
lambda calculus with box, arrow and contextual types."""

__version__ = "0.1.0"

from .checker import ALL_SYSTEMS, System, TypeCheckError, check_ksub, check_semisub, synth
from .nbe import nbe, normalize
from .oracle import beta_normalize, eta_expand, oracle_normalize
from .parser import parse_file, parse_term, parse_type, pretty, pretty_ty
from .syntax import (
    B,
    App,
    Arr,
    Base,
    Box,
    BoxT,
    CBox,
    CtxT,
    CUnbox,
    Lam,
    SemiKSub,
    Unbox,
    Var,
    alpha_eq,
    is_neutral,
    is_normal,
    stack_len,
    stack_truncate,
)

__all__ = [
    "ALL_SYSTEMS",
    "App",
    "Arr",
    "B",
    "Base",
    "Box",
    "BoxT",
    "CBox",
    "CUnbox",
    "CtxT",
    "Lam",
    "SemiKSub",
    "System",
    "TypeCheckError",
    "Unbox",
    "Var",
    "alpha_eq",
    "beta_normalize",
    "check_ksub",
    "check_semisub",
    "eta_expand",
    "is_neutral",
    "is_normal",
    "nbe",
    "normalize",
    "oracle_normalize",
    "parse_file",
    "parse_term",
    "parse_type",
    "pretty",
    "pretty_ty",
    "stack_len",
    "stack_truncate",
    "synth",
]
