"""Exact verification toolkit for isotropic unimodular frame posets over
small finite fields: poset enumeration, integral and modular homology of
their chain complexes, the hyperbolic isometry groups acting on them, and
the orbit/stabilizer/bottom-row checks those two sides fit into."""

__version__ = "0.1.0"

from .fields import FieldSpec, FiniteField, FormParams, field_make, lambda_set, norm_one_units
from .hermitian import HyperbolicSpace
from .posets import PosetSpec, enumerate_chains, enumerate_simplices, link_restrict
from .chains import acyclicity_verdict, build_complex, homology_field, homology_snf

__all__ = [
    "FieldSpec",
    "FiniteField",
    "FormParams",
    "field_make",
    "lambda_set",
    "norm_one_units",
    "HyperbolicSpace",
    "PosetSpec",
    "enumerate_simplices",
    "enumerate_chains",
    "link_restrict",
    "build_complex",
    "homology_field",
    "homology_snf",
    "acyclicity_verdict",
]
