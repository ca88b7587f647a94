"""Grünwald-Letnikov and positivity-preserving NSFD time stepping.

Both schemes share the memory term of the discrete Caputo-GL operator::

    M_n = x_0 * cumsum[n] - sum_{j=1}^{n} w[j] * x_{n-j}
        = x_0 + sum_{j=1}^{n-1} (-w[j]) * (x_{n-j} - x_0)

The second form is the one evaluated. It returns ``x_0`` bit-exactly on a
constant history, so equilibria are kept exactly. For a nonnegative history
it is bounded below by ``x_0 * cumsum[n-1] > 0``. Rounding can only push it
negative once ``cumsum[n-1]`` falls to the order of ``n * eps``, which
needs far more steps than any practical run.

NSFD:  x_n = (h^a * f_plus(x_{n-1}) + M_n) / (1 + h^a * f_minus(x_{n-1}))
GL:    x_n = M_n + h^a * f(x_{n-1})           (explicit, default)
       x_n - h^a * f(x_n) = M_n               (implicit, damped Newton)
"""

import enum
import warnings
from dataclasses import dataclass, field
from typing import List, NamedTuple

import numpy as np

from .glkernel import check_order, gl_weights
from .models import jacobian_fd


class Scheme(str, enum.Enum):
    GL = "GL"
    NSFD = "NSFD"


class SolverError(RuntimeError):
    """A step could not be completed. ``step`` holds the failing index."""

    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"step {step}: {message}")
        self.step = step


class NewtonFailure(SolverError):
    pass


class DecompositionError(SolverError):
    """``1 + h^a f_minus`` was not positive: ``f_minus`` broke its sign contract."""


class NegativityHalt(SolverError):
    pass


@dataclass(frozen=True)
class Grid:
    t0: float
    h: float
    n_steps: int

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"step h must be positive, got {self.h!r}")
        if self.n_steps < 0:
            raise ValueError(f"n_steps must be >= 0, got {self.n_steps!r}")

    @classmethod
    def from_span(cls, t0, T, h):
        """Grid covering [t0, T]; ``(T - t0) / h`` must be a whole number."""
        span = T - t0
        if span < 0:
            raise ValueError(f"end time T={T} precedes t0={t0}")
        n = int(round(span / h))
        if abs(n * h - span) > 1e-9 * max(1.0, abs(span)):
            raise ValueError(f"step h={h} does not divide the interval length {span}")
        return cls(float(t0), float(h), n)

    @property
    def T(self):
        return self.t0 + self.n_steps * self.h

    @property
    def times(self):
        return self.t0 + self.h * np.arange(self.n_steps + 1)


@dataclass(frozen=True)
class SolverOptions:
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    negativity_policy: str = "record"
    gl_variant: str = "explicit"

    def __post_init__(self):
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be > 0")
        if self.newton_max_iter < 1:
            raise ValueError("newton_max_iter must be >= 1")
        if self.negativity_policy not in ("record", "halt"):
            raise ValueError(f"negativity_policy must be 'record' or 'halt', "
                             f"got {self.negativity_policy!r}")
        if self.gl_variant not in ("explicit", "implicit"):
            raise ValueError(f"gl_variant must be 'explicit' or 'implicit', "
                             f"got {self.gl_variant!r}")


class NegativityEvent(NamedTuple):
    step: int
    component: int
    value: float


@dataclass(eq=False)
class Trajectory:
    grid: Grid
    states: np.ndarray
    scheme: Scheme
    alpha: float
    negativity_events: List[NegativityEvent] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def times(self):
        return self.grid.times

    @property
    def final(self):
        return self.states[-1]


def memory_term(weights, history, n):
    """``x_0*cumsum[n] - sum_{j=1}^n w[j] x_{n-j}`` from states ``history[0..n-1]``."""
    if n < 1:
        raise ValueError("step index n must be >= 1")
    if weights.n_max < n:
        raise ValueError(f"weight table covers 0..{weights.n_max}, need {n}")
    history = np.asarray(history, dtype=float)
    x0 = history[0]
    if n == 1:
        return x0.copy()
    return x0 + (-weights.weights[1:n]) @ (history[n - 1:0:-1] - x0)


def _nsfd_update(sys, x_prev, memory, ha, step=None):
    denom = 1.0 + ha * sys.eval_minus(x_prev)
    if np.any(denom <= 0):
        raise DecompositionError(
            f"nonpositive NSFD denominator {denom.tolist()}; f_minus must be >= 0 "
            f"on the nonnegative orthant", step)
    return (ha * sys.eval_plus(x_prev) + memory) / denom


def _newton(sys, memory, ha, guess, opts, step=None):
    """Solve ``x - ha*f(x) = memory`` by damped Newton from ``guess``."""
    jac = sys.jacobian or (lambda v: jacobian_fd(sys, v, 1e-6 * (1 + np.abs(v).max())))
    eye = np.eye(len(guess))
    x = np.array(guess, dtype=float)
    g = x - ha * sys.rhs(x) - memory
    res = np.abs(g).max()
    for _ in range(opts.newton_max_iter):
        # residual is absolute for O(1) states, relative for large ones
        if res <= opts.newton_tol * max(1.0, np.abs(x).max()):
            return x
        try:
            dx = np.linalg.solve(eye - ha * jac(x), g)
        except np.linalg.LinAlgError as exc:
            raise NewtonFailure(f"singular Newton matrix at x={x.tolist()}", step) from exc
        t = 1.0
        while True:
            trial = x - t * dx
            g_trial = trial - ha * sys.rhs(trial) - memory
            r_trial = np.abs(g_trial).max()
            if r_trial < res or t < 1e-4:
                break
            t *= 0.5
        x, g, res = trial, g_trial, r_trial
    if res <= opts.newton_tol * max(1.0, np.abs(x).max()):
        return x
    raise NewtonFailure(f"no convergence after {opts.newton_max_iter} iterations "
                        f"(residual {res:.3e}, last iterate {x.tolist()})", step)


def nsfd_step(sys, weights, history, h, n):
    """One NSFD step: ``x_n`` from states ``history[0..n-1]``.

    Growth terms are taken at the previous level and the loss term is
    linear in ``x_n``. Given a nonnegative history the result is nonnegative
    for every ``h > 0``.
    """
    history = np.asarray(history, dtype=float)
    ha = h**weights.alpha
    return _nsfd_update(sys, history[n - 1], memory_term(weights, history, n), ha, n)


def gl_step(sys, weights, history, h, n, opts=None):
    """One Grünwald-Letnikov step.

    The explicit variant evaluates ``f`` at ``x_{n-1}`` and reduces to
    forward Euler at alpha = 1. The implicit variant solves for ``f(x_n)``
    with damped Newton, starting from ``x_{n-1}``.
    """
    opts = opts or SolverOptions()
    sys.require_full()
    history = np.asarray(history, dtype=float)
    ha = h**weights.alpha
    memory = memory_term(weights, history, n)
    if opts.gl_variant == "explicit":
        return memory + ha * sys.rhs(history[n - 1])
    return _newton(sys, memory, ha, history[n - 1], opts, n)


def integrate(sys, scheme, alpha, x0, grid, opts=None, weights=None):
    """Advance ``sys`` from ``x0`` across ``grid`` with the chosen scheme.

    The weight table is built once (or passed in and shared). Negative
    components are logged per step. With ``negativity_policy="halt"`` the
    first one raises :class:`NegativityHalt` instead.
    """
    scheme = Scheme(scheme)
    alpha = check_order(alpha)
    opts = opts or SolverOptions()
    x0 = np.array(x0, dtype=float).reshape(-1)
    if len(x0) != sys.dim:
        raise ValueError(f"x0 has {len(x0)} components, system {sys.name!r} has {sys.dim}")
    if scheme is Scheme.GL:
        sys.require_full()
    N = grid.n_steps
    if weights is None:
        weights = gl_weights(alpha, N)
    elif weights.alpha != alpha or weights.n_max < N:
        raise ValueError("supplied weight table does not match alpha / grid length")

    traj = Trajectory(grid, np.empty((N + 1, sys.dim)), scheme, alpha)
    if np.any(x0 < 0):
        msg = f"negative initial condition {x0.tolist()}; positivity guarantees do not apply"
        warnings.warn(msg, stacklevel=2)
        traj.warnings.append(msg)

    X = traj.states
    X[0] = x0
    dev = np.zeros_like(X)  # dev[j] = x_j - x_0
    nw = -weights.weights
    ha = grid.h**alpha
    for n in range(1, N + 1):
        memory = x0 + nw[1:n] @ dev[n - 1:0:-1] if n > 1 else x0.copy()
        prev = X[n - 1]
        if scheme is Scheme.NSFD:
            xn = _nsfd_update(sys, prev, memory, ha, n)
        elif opts.gl_variant == "explicit":
            xn = memory + ha * sys.rhs(prev)
        else:
            xn = _newton(sys, memory, ha, prev, opts, n)
        if not np.all(np.isfinite(xn)):
            raise SolverError(f"non-finite state {xn.tolist()}", n)
        X[n] = xn
        dev[n] = xn - x0
        neg = np.flatnonzero(xn < 0)
        if len(neg):
            if opts.negativity_policy == "halt":
                raise NegativityHalt(f"component {neg[0]} became {xn[neg[0]]!r}", n)
            traj.negativity_events.extend(NegativityEvent(n, int(i), float(xn[i])) for i in neg)
    return traj
