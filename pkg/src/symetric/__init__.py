"""Ground-truth Hamiltonian trajectory generation and evaluation of learned
latent dynamics via R^2, Sym, SyMetric, VPT and normalized MSE."""

__version__ = "0.1.0"

from .container import LatentTrajectorySet, filter_informative_dims, load_container, save_container
from .integrators import IntegratorSpec, rollout
from .mapio import load_map, save_map
from .metrics import (
    EvaluationReport,
    SymConfig,
    evaluate,
    normalized_mse,
    r_squared,
    sym_score,
    symetric,
    vpt,
)
from .phasespace import (
    CanonicalMatrix,
    PhaseState,
    Trajectory,
    canonical_block_matrix,
    hamiltonian_vector_field,
    symplecticity_defect,
)
from .regression import (
    MlpConfig,
    MlpMap,
    PolynomialMap,
    lasso_fit,
    mlp_fit,
    polynomial_features,
    progressive_polynomial_fit,
)
from .synth import SyntheticTransform, apply_transform, random_linear_symplectic
from .systems import (
    DoublePendulum,
    LennardJones,
    MassSpring,
    NBody,
    Pendulum,
    ReplicatorGame,
    replicator_field,
    sample_initial_state,
    sample_system,
)
