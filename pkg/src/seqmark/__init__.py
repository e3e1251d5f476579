"""seqmark: soft-attention global/local 1D CNN marker picking for
depth-indexed sequences, with MC-dropout uncertainty and tolerance-based
evaluation."""

from .autodiff import GradientTape, Tensor, finite_difference_gradient
from .data_io import MarkerPick, NormStats, SynthConfig, WellLog, synthesize_wells
from .evaluation import EvalReport, evaluate_dataset
from .inference import Detection, detect, mc_dropout_detect, validate_detection
from .network import (
    GlobalViewConfig,
    LocalViewConfig,
    MarkerNet,
    MarkerNetConfig,
    attention_fuse,
    attention_scores,
)
from .supervision import bce_loss, gaussian_smooth_label, one_hot_label
from .training import TrainConfig, TrainHistory, split_dataset, train_marker_model

__version__ = "0.1.0"
