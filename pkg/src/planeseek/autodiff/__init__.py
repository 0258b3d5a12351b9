"""Dense-tensor arithmetic with reverse-mode gradient accumulation.

Everything trainable in the toolkit runs on this module: a Tensor wraps a
float64 numpy array, operations record themselves on an implicit tape when
any input requires gradients, and ``backward`` replays the tape once to
accumulate analytic partial derivatives into every leaf.
"""

from .tensor import (
    Tensor,
    ShapeError,
    GradientError,
    no_grad,
    add,
    sub,
    mul,
    div,
    neg,
    matmul,
    sigmoid,
    tanh,
    relu,
    softplus,
    exp,
    log,
    mean,
    tsum,
    concat,
    reshape,
    gather_rows,
    log_mean_exp,
    OP_REGISTRY,
)
from .optim import SGD, Adam
from .checkpoint import save_tensors, load_tensors, CHECKPOINT_MAGIC

__all__ = [
    "Tensor",
    "ShapeError",
    "GradientError",
    "no_grad",
    "add",
    "sub",
    "mul",
    "div",
    "neg",
    "matmul",
    "sigmoid",
    "tanh",
    "relu",
    "softplus",
    "exp",
    "log",
    "mean",
    "tsum",
    "concat",
    "reshape",
    "gather_rows",
    "log_mean_exp",
    "OP_REGISTRY",
    "SGD",
    "Adam",
    "save_tensors",
    "load_tensors",
    "CHECKPOINT_MAGIC",
]
