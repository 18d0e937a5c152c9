"""Delaunay surfaces through the DPW loop-group construction."""

from .loops import LoopMatrix
from .iwasawa import IwasawaFactors, iwasawa_decompose, spectral_factorize_positive
from .dpw import DPWTriple, Potential, immerse, integrate_frame, sym_bobenko, sym_bobenko_parallel
from .monodromy import ClosingReport, MonodromyMatrix, closing_conditions, compute_monodromy
from .delaunay import DelaunayParams, delaunay_potential, delaunay_triple, neck_bulge_radii

__all__ = [
    "LoopMatrix",
    "IwasawaFactors",
    "iwasawa_decompose",
    "spectral_factorize_positive",
    "DPWTriple",
    "Potential",
    "immerse",
    "integrate_frame",
    "sym_bobenko",
    "sym_bobenko_parallel",
    "ClosingReport",
    "MonodromyMatrix",
    "closing_conditions",
    "compute_monodromy",
    "DelaunayParams",
    "delaunay_potential",
    "delaunay_triple",
    "neck_bulge_radii",
]
