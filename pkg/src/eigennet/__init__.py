"""Eigenface feature extraction with nearest-neighbor and neural-network identification."""

from .dataset_io import FaceImage, load_pgm, make_split, scan_orl_layout, vectorize
from .eigenfaces import FaceSubspace, FeatureVector, build_subspace, project
from .mlp import MlpNetwork, TrainConfig, init_network, train, train_multistart
from .nearest import Gallery, enroll, identify

__version__ = "0.1.0"
