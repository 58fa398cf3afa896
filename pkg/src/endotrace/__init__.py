"""Twisted endomorphisms over finite rings: Frobenius, Verschiebung, shadow
traces and truncated big Witt vectors, all in exact integer arithmetic."""

from .algebra import FinAlgebra, catalog, integers, make_algebra
from .bimodule import Bimodule, BimoduleMap, power, ring_bimodule, tensor, twisted_ring
from .dualizable import DualityData, ProjectivePresentation, duality, free_presentation
from .endo import (Context, TwistedEndo, TwistedTuple, endo_from_json, frobenius, gamma,
                   make_endo, rotate, tuple_from_json, untwisted, verschiebung,
                   verschiebung_tuple)
from .lattice import FinAbGroup, smith_normal_form
from .shadow import ShadowMap, theta, trace, trace_sequence, transfer, varsigma
from .witt import WittVector, ch, ghost, witt_add, witt_frobenius, witt_mul, witt_verschiebung

__version__ = "0.1.0"

__all__ = [
    "FinAlgebra", "catalog", "integers", "make_algebra",
    "Bimodule", "BimoduleMap", "power", "ring_bimodule", "tensor", "twisted_ring",
    "DualityData", "ProjectivePresentation", "duality", "free_presentation",
    "Context", "TwistedEndo", "TwistedTuple", "endo_from_json", "frobenius", "gamma",
    "make_endo", "rotate", "tuple_from_json", "untwisted", "verschiebung", "verschiebung_tuple",
    "FinAbGroup", "smith_normal_form",
    "ShadowMap", "theta", "trace", "trace_sequence", "transfer", "varsigma",
    "WittVector", "ch", "ghost", "witt_add", "witt_frobenius", "witt_mul", "witt_verschiebung",
]
