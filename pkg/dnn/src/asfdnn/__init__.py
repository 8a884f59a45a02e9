"""Neural estimator for group-sparse angular spread functions.

Generates labeled (noisy moment vector, grid density) pairs, trains a
five-layer fully connected network with soft-max output under the l1 loss,
and serves batch inference through the shared CSV file formats.
"""

from .data import Dataset, encode_features, generate_dataset, load_dataset, save_dataset
from .infer import infer_to_csv, predict
from .metrics import connected_components, normalized_l1
from .model import NetworkSpec, build_network, l1_loss, load_model, save_model
from .train import TrainConfig, train

__version__ = "0.1.0"
