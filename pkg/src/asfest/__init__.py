"""ASF estimation for uniform linear arrays.

Estimates the angular spread function (the angular power density seen by
the array) from noisy channel snapshots: nonnegative least squares on a
rectangular-pulse grid, a group-sparsity-promoting generalized NNLS over a
multiscale pulse dictionary, and classical spectral baselines, wrapped in a
reproducible experiment harness.
"""

from .core import (
    AngularGrid,
    Cluster,
    GroupSparseASF,
    ToeplitzCovariance,
    asf_to_covariance,
    atom_first_column,
    atom_matrix,
    grid_sample_asf,
    load_asf_json,
    save_asf_json,
    steering_vector,
)
from .covariance import (
    NnlsProblem,
    SnapshotSet,
    build_nnls_problem,
    sample_covariance,
    sample_snapshots,
    toeplitzify,
    weight_matrix,
)
from .nnls import NnlsSolution, kkt_residual, solve_nnls
from .estimators import (
    AsfEstimate,
    PulseDictionary,
    atomic_l1_norm,
    build_pulse_dictionary,
    default_p0,
    estimate_gnnls,
    estimate_nnls,
    prop1_crosscheck,
)
from .baselines import estimate_burg, estimate_l2_projection, estimate_spice
from .harness import (
    ExperimentConfig,
    MetricsRow,
    connected_components,
    random_asf,
    run_experiment,
)

__version__ = "0.1.0"
