"""Few-photon simulation of lossy beam-splitter networks.

Lossy elements are dilated onto orthonormal environment modes so that
absorption becomes ordinary photon bookkeeping: detection and absorption
probabilities are read off one pure state.
"""

from .analysis import (
    OutcomeDistribution,
    absorption_probability,
    any_absorption_probability,
    conservation_residual,
    detection_probability,
    joint_distribution,
    pair_absorption_scan,
)
from .elements import (
    DilationIsometry,
    LossyBeamSplitter,
    PhaseShifter,
    dilate,
    gram_overlap,
    new_lossy_bs,
    phase_map,
)
from .errors import (
    ConfigError,
    InvariantViolation,
    LossyNetError,
    NoAbsorberError,
    NormalizationError,
    PhysicalityError,
    UnphysicalAbsorberError,
)
from .fock import (
    FockState,
    ModeId,
    ModeMap,
    ModeRegistry,
    apply_creation,
    apply_mode_map,
    inner_product,
    marginal_counts,
    prune,
    single_photon,
    vacuum,
)
from .network import InputSpec, Network, build_network, evolve, make_input
from .oracle import oracle_evolve_dense

__version__ = "0.1.0"
