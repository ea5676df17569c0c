"""Critical sets of the Dirichlet operator u -> -u'' + f(u) on [0, pi]."""

__version__ = "0.1.0"

from .errors import (CritsetError, EmptyScanRange, GridMismatch, InvalidGrid,  # noqa: E402
                     InvalidParameter, NonFiniteState, NonFiniteValue, NotApplicable,
                     NotPositive, RangeUnattainable)
from .grid import Grid, GridFunction  # noqa: E402
from .manifold import (asymptotic_arguments, chart_point, comparison_identity,  # noqa: E402
                       comparison_identity_residual, decompose, find_lambda,
                       is_Ck_nonempty)
from .nonlinearity import classify, make_family  # noqa: E402
from .pruefer import free_argument, integrate_argument, reconstruct_kernel  # noqa: E402
from .shooting import count_solutions, shoot  # noqa: E402
from .variational import dW_pairing, fd_dW, is_critical  # noqa: E402
