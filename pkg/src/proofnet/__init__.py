"""Proof nets for untyped MELL: cut elimination, longest reductions, and the
relational-semantics account of strong normalization lengths."""

from .net import Net, NetError, classify_cuts, net_size, parse_net, serialize, validate_net
from .rewrite import canonical_sequence, nets_isomorphic, normalize, reduce_cut, strong_length

__all__ = [
    "Net",
    "NetError",
    "canonical_sequence",
    "classify_cuts",
    "net_size",
    "nets_isomorphic",
    "normalize",
    "parse_net",
    "reduce_cut",
    "serialize",
    "strong_length",
    "validate_net",
]
