from .autograd import Tensor
from .backend import active_backend
from .checkpoint import CHECKPOINT_FORMAT, load_checkpoint, read_header, save_checkpoint
from .gradcheck import grad_check
from .layers import (BatchNorm, Conv, Dropout, Flatten, LeakyReLU, Linear,
                     LSTM, MaxPool, ReLU, ToSequence)
from .losses import LOSSES, cross_entropy, hinge_binary, hinge_multiclass, softmax
from .model import Model
from .optim import Adam, SGDMomentum, make_optimizer
from .train import History, TrainConfig, dataset_loss, train_loop

__all__ = [
    "Tensor", "active_backend", "grad_check",
    "BatchNorm", "Conv", "Dropout", "Flatten", "LeakyReLU", "Linear",
    "LSTM", "MaxPool", "ReLU", "ToSequence",
    "LOSSES", "cross_entropy", "hinge_binary", "hinge_multiclass", "softmax",
    "Model", "Adam", "SGDMomentum", "make_optimizer",
    "History", "TrainConfig", "dataset_loss", "train_loop",
    "CHECKPOINT_FORMAT", "save_checkpoint", "load_checkpoint", "read_header",
]
