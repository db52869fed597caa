"""Exact counting of dot-product chains in F_q^d and Z_{p^l}^d."""

__version__ = "0.1.0"

from dotchains.algebra import AlgebraicStructure, Kind, make_structure, parse_structure
from dotchains.chains import ChainSpec, CountReport, Policy, count_chains, count_chains_brute, count_chains_dp
from dotchains.errors import BudgetExceeded, DotChainsError
from dotchains.pointsets import PointSet, parse_pointset, sample_uniform, serialize_pointset

__all__ = [
    "AlgebraicStructure",
    "BudgetExceeded",
    "ChainSpec",
    "CountReport",
    "DotChainsError",
    "Kind",
    "PointSet",
    "Policy",
    "count_chains",
    "count_chains_brute",
    "count_chains_dp",
    "make_structure",
    "parse_pointset",
    "parse_structure",
    "sample_uniform",
    "serialize_pointset",
]
