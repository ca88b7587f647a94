"""Solvers for Caputo fractional systems of order 0 < alpha <= 1.

Grünwald-Letnikov and positivity-preserving nonstandard finite difference
(NSFD) schemes, Matignon stability analysis and self-convergence studies.
"""

from .glkernel import GLWeights, SampledPath, check_order, discrete_caputo_gl, gl_weights
from .models import (
    DecomposedSystem, PredatorPreyParams, ToyModelParams, ValidationReport, check_quasi_monotone,
    jacobian_fd, make_system, predator_prey_system, toy_system, validate_decomposition,
)
from .schemes import (
    Grid, NegativityEvent, Scheme, SolverError, SolverOptions, Trajectory, gl_step, integrate,
    memory_term, nsfd_step,
)
from .analysis import (
    EquilibriumReport, classify_stability, eig2, predator_prey_equilibria, stability_report,
)
from .convergence import RateTable, error_against_reference, rate_table, reference_solution

__version__ = "0.1.0"
