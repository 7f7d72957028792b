"""Pointer-induced decoherence and the weak-to-strong measurement transition
for a Gaussian pointer coupled through ``-g x A`` (natural units, ``hbar = 1``)."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BoundaryContaminationError,
    ConfigurationError,
    ConvergenceError,
    DegeneratePostSelectionError,
    DegenerateTransitionError,
    IncompatibleBranchError,
    NumericalFailure,
    OrthogonalSelectionError,
    PointerDecoherenceError,
    PostSelectionAnnihilationError,
)
from .spectral import (  # noqa: E402
    SelectionState,
    SpectralObservable,
    conditional_expectation,
    expectation_value,
    weak_value,
)
from .pointer import (  # noqa: E402
    GaussianBranch,
    MeasurementConfig,
    ReducedDensityMatrix,
    asymptotic_factor,
    branch_cross_moment,
    decoherence_factor,
    evolve_branch,
    log_decoherence_factor,
    printed_factor,
    reduced_density_matrix,
    wei_norman_coeffs,
    zeno_rate,
)
from .transition import (  # noqa: E402
    TransitionResult,
    analyze,
    limit_shifts,
    postselected_pointer_shifts,
    shifts_from_transition_value,
    transition_value,
    unconditioned_pointer_shifts,
)
from .stern_gerlach import SgScenario, sg_branches, sg_decoherence, sg_shifts  # noqa: E402
