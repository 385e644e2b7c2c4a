"""tenspec: exact decomposition of dense real tensors.

Spectral decomposition of self-adjoint non-negative definite tensor
operators, singular-value style decomposition of linear tensor
transformations, and a two-stage decomposition of three-group tensors,
with full reconstruction and oracle-based verification.
"""

from .core import (
    DenseTensor,
    IndexMap,
    Shape,
    build_index_map,
    contract,
    fold,
    inner,
    norm,
    outer,
    random_tensor,
    unfold,
)
from .decompose import (
    GroupedTensor,
    OperatorDecomposition,
    RawTriple,
    TransformDecomposition,
    TripleDecomposition,
    apply_operator,
    component_count,
    decompose_sa_nnd,
    decompose_transform,
    decompose_triple,
    gram_operator,
    is_self_adjoint,
    reconstruct,
    residual_curve,
)
from .jacobi import EigenResult, numerical_rank, sym_eig
from .oracle import (
    OracleReport,
    matricized_singulars,
    naive_contract,
    verify_decomposition,
)
from .tz1 import read_tensor, write_tensor

__version__ = "0.1.0"

__all__ = [
    "DenseTensor",
    "EigenResult",
    "GroupedTensor",
    "IndexMap",
    "OperatorDecomposition",
    "OracleReport",
    "RawTriple",
    "Shape",
    "TransformDecomposition",
    "TripleDecomposition",
    "apply_operator",
    "build_index_map",
    "component_count",
    "contract",
    "decompose_sa_nnd",
    "decompose_transform",
    "decompose_triple",
    "fold",
    "gram_operator",
    "inner",
    "is_self_adjoint",
    "matricized_singulars",
    "naive_contract",
    "norm",
    "numerical_rank",
    "outer",
    "random_tensor",
    "read_tensor",
    "reconstruct",
    "residual_curve",
    "sym_eig",
    "unfold",
    "verify_decomposition",
    "write_tensor",
]
