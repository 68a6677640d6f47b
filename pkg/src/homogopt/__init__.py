"""Global minimization by box-kernel smoothing at a shrinking scale.

The average gradient T(h, x) = (f(x + h/2) - f(x - h/2)) / h and the
homogenization F(h, x), the mean of f over the cube of side h centred at x,
flatten non-global wells as h grows. This package counts the surviving zeros
of T, finds the critical scale, and descends on F while shrinking h.
"""

from .errors import (
    ConfigError,
    DomainError,
    EmptyDomainError,
    HomogoptError,
    InsetError,
    ParseError,
    QuadratureError,
)
from .expr import compile_expression, differentiate, evaluate, parse
from .funcmodel import ScalarField, brute_force_extrema, corpus, get_entry, restrict_to_line
from .homog import (
    AdaptivePolicy,
    GaussPolicy,
    HomogenizationOperator,
    MonteCarloPolicy,
    avg_gradient_1d,
    avg_gradient_field,
    homogenize,
    kernel_convolution_check,
)
from .analysis import containment_check, scan_zeros, sign_profile_check, zero_count_curve
from .scale import ContinuationSchedule, find_h0, make_schedule
from .solver import line_decomposition_solve, plain_descent, smoothed_descent

__version__ = "0.1.0"
