"""Two-excitation routing through a uniform quantum wire.

Free-fermion networks are simulated through Slater determinants of
single-particle amplitudes, spin-1/2 XX networks in the two-excitation sector.
"""

from .errors import (
    ConvergenceFailure,
    ExrouterError,
    IndexOutOfRange,
    LengthMismatch,
    NoActiveReceiver,
    NoPeak,
    NoResonance,
    NotSymmetric,
    OutOfBand,
    TooLarge,
    UnsortedSites,
    ValidationError,
    WrongWireFamily,
)
from .fermion import (
    FidelitySeries,
    PeakReport,
    first_peak,
    fock_oracle_amplitude,
    many_body_amplitude,
    transfer_fidelity,
)
from .network import (
    Mode,
    NetworkSpec,
    ReceiverSpec,
    SiteIndexMap,
    active_subnetwork,
    site_map,
    to_adjacency,
    validate,
)
from .planner import (
    RoutingEntry,
    RoutingPlan,
    allowed_contacts,
    forbidden_contacts,
    receiver_count,
    resonant_k,
    resonant_mode_support,
    routing_table,
)
from .spectral import (
    AmplitudeBlock,
    SpectralDecomposition,
    amplitude_block,
    eigendecompose,
    single_amplitude,
    wire_mode,
)
from .spin import (
    SectorHamiltonian,
    TwoExcitationBasis,
    assemble,
    build_basis,
    dense_oracle_evolve,
    evolve,
    spin_transfer_probability,
)

__version__ = "0.1.0"
