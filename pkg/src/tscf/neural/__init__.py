from .autodiff import Tensor, concat, no_grad, tensor
from .bundle import ModelBundle, load_network, save_network
from .gradcheck import grad_check
from .layers import BiRnnEncoder, Dense, DiffHead, DualReluHead, LstmCell, TanhHead, birnn_apply
from .networks import (
    PROB_EPS,
    Classifier,
    Discriminator,
    Generator,
    NetworkSpec,
    bce,
    build_network,
)
from .optim import Adam

__all__ = [
    "Tensor",
    "tensor",
    "concat",
    "no_grad",
    "Dense",
    "LstmCell",
    "BiRnnEncoder",
    "DualReluHead",
    "DiffHead",
    "TanhHead",
    "birnn_apply",
    "NetworkSpec",
    "Generator",
    "Discriminator",
    "Classifier",
    "build_network",
    "bce",
    "PROB_EPS",
    "Adam",
    "grad_check",
    "ModelBundle",
    "save_network",
    "load_network",
]
