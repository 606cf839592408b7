"""Ranks of sl_r conformal blocks and the birational data of parabolic moduli."""

from .errors import ConfBlocksError, InputError, InvariantError
from .fusion import FusionTable, LevelContext, WeightPartition, dual, fuse, lr_coefficient
from .curves import StableGraph, Vertex, WeightAssignment, enumerate_stable_graphs
from .ranks import genus0_rank, graph_rank, rank
from .weights import ParabolicWeight, enumerate_walls, is_dominant
from .picard import DivisorClass, hilbert_function

__all__ = [
    "ConfBlocksError", "InputError", "InvariantError",
    "FusionTable", "LevelContext", "WeightPartition", "dual", "fuse", "lr_coefficient",
    "StableGraph", "Vertex", "WeightAssignment", "enumerate_stable_graphs",
    "genus0_rank", "graph_rank", "rank",
    "ParabolicWeight", "enumerate_walls", "is_dominant",
    "DivisorClass", "hilbert_function",
]
