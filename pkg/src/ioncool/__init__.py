"""Lindblad simulations of standing-wave sideband and EIT cooling of a trapped ion.

Frequencies are in units of the trap frequency ``nu`` and times in ``1/nu``.
"""

__version__ = "0.1.0"

from .hilbert import (  # noqa: E402
    DensityMatrix,
    HilbertSpec,
    Operator,
    TruncationError,
    annihilation,
    expectation,
    internal_transition,
    sine_of_position,
    thermal_state,
)
from .liouville import (  # noqa: E402
    IntegrationError,
    LeakageError,
    LindbladModel,
    SingularSteadyStateError,
    SteadyStateResult,
    TraceDriftError,
    Trajectory,
    evolve,
    lindblad_rhs,
    steady_state,
)
from .models import (  # noqa: E402
    EITParams,
    RecoilQuadrature,
    SWParams,
    eit_model,
    eit_resonant_detuning,
    recoil_quadrature,
    sw_model,
)
from .fitting import ExpFitResult, FitError, fit_exponential, rate_sweep  # noqa: E402
from .scenarios import simulate  # noqa: E402
