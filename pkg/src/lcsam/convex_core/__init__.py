"""Convex potentials, log-concave functions and the operations on them."""

from .potentials import *  # noqa: F401,F403
from .potentials import __all__ as _pot_all
from .logconcave import (EnvelopeBound, IntegrabilityError, LogConcaveFn, dilate,
                         envelope_holds, evaluate, exponential_envelope, potential_gradient)

__all__ = list(_pot_all) + [
    "EnvelopeBound", "IntegrabilityError", "LogConcaveFn", "dilate", "envelope_holds",
    "evaluate", "exponential_envelope", "potential_gradient",
]

from .conjugate import (SupportFn, grid_legendre, legendre_transform,  # noqa: E402
                        support_function_of_function)
from .integration import NodeSet, integrate, quadrature_nodes  # noqa: E402

__all__ += ["SupportFn", "grid_legendre", "legendre_transform", "support_function_of_function",
            "NodeSet", "integrate", "quadrature_nodes"]
from .supconv import infimal_convolution, sup_convolve  # noqa: E402

__all__ += ["infimal_convolution", "sup_convolve"]
