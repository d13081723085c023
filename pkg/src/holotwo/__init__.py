"""Crossed modules of algebras and two-dimensional holonomy with truncated power series."""
from .carriers import Carrier, WordAlgebra, chord_algebra, load_carrier_spec
from .geometry import ConnectionForm, Path1, Path2, TwoConnection, TwoForm
from .groups import BareGroupXMod, HopfGroupXMod, PlusCell, TimesCell
from .holonomy import (
    HolonomyResult,
    QuadratureConfig,
    holonomy_fuzzy,
    holonomy_P,
    holonomy_Q,
    holonomy_R,
    verify_composition_laws,
)
from .instances import chain_two_connection, kz_connection, kz_two_connection
from .series import TruncatedSeries
from .xmod import BareXMod, HopfXMod, build_ba, build_hom_complex, reflect

__all__ = [
    "BareGroupXMod",
    "BareXMod",
    "Carrier",
    "ConnectionForm",
    "HolonomyResult",
    "HopfGroupXMod",
    "HopfXMod",
    "Path1",
    "Path2",
    "PlusCell",
    "QuadratureConfig",
    "TimesCell",
    "TruncatedSeries",
    "TwoConnection",
    "TwoForm",
    "WordAlgebra",
    "build_ba",
    "build_hom_complex",
    "chain_two_connection",
    "chord_algebra",
    "holonomy_P",
    "holonomy_Q",
    "holonomy_R",
    "holonomy_fuzzy",
    "kz_connection",
    "kz_two_connection",
    "load_carrier_spec",
    "reflect",
    "verify_composition_laws",
]
