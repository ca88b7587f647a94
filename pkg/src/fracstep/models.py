"""Systems written as ``f(x) = f_plus(x) - x * f_minus(x)``.

Every model exposes the two nonnegative parts used by the NSFD scheme, the
full right-hand side, and (when cheap) an analytic Jacobian. Two models are
built in and registered by name: the harvested Holling type-II
predator-prey system and the two-parameter toy model used to show where the
plain GL scheme goes wrong.
"""

from dataclasses import dataclass, field, fields
from typing import Callable, Mapping, Optional

import numpy as np


@dataclass(frozen=True)
class DecomposedSystem:
    name: str
    dim: int
    params: Mapping[str, float]
    eval_plus: Callable[[np.ndarray], np.ndarray]
    eval_minus: Callable[[np.ndarray], np.ndarray]
    eval_full: Optional[Callable[[np.ndarray], np.ndarray]] = None
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def rhs(self, x):
        """Full right-hand side, rebuilt from the parts if not supplied."""
        x = np.asarray(x, dtype=float)
        if self.eval_full is not None:
            return self.eval_full(x)
        return self.eval_plus(x) - x * self.eval_minus(x)

    def require_full(self):
        if self.eval_full is None:
            raise ValueError(f"system {self.name!r} has no full right-hand side")


@dataclass(frozen=True)
class PredatorPreyParams:
    """Harvested predator-prey model with Holling type-II response.

    s: prey growth rate, K: carrying capacity, q: maximal consumption rate,
    q1: handling time, beta: conversion factor, s0: predator death rate,
    E: harvesting effort.
    """

    s: float = 0.1
    K: float = 5.0
    q: float = 1.0
    q1: float = 2.0
    beta: float = 5.0
    s0: float = 0.7
    E: float = 0.3

    def __post_init__(self):
        for name in ("s", "K", "q", "beta", "s0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)!r}")
        for name in ("q1", "E"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)!r}")

    @property
    def R0(self):
        return self.beta * self.K / ((1 + self.q1 * self.K) * (self.s0 + self.E))


@dataclass(frozen=True)
class ToyModelParams:
    a: float = 2.0
    b: float = 1.0
    c: float = 6.0

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) >= 0:
                raise ValueError(f"{f.name} must be >= 0, got {getattr(self, f.name)!r}")


def predator_prey_system(p):
    """Predator-prey model split into growth and loss parts.

    ``f_plus = (s*x, beta*x*y/(1+q1*x))`` and
    ``f_minus = (s*x/K + q*y/(1+q1*x), s0 + E)``.
    """
    s, K, q, q1, beta, s0, E = p.s, p.K, p.q, p.q1, p.beta, p.s0, p.E
    if K <= 0:
        raise ValueError("carrying capacity K must be positive")
    death = s0 + E

    def plus(v):
        x, y = v
        return np.array([s * x, beta * x * y / (1 + q1 * x)])

    def minus(v):
        x, y = v
        return np.array([s * x / K + q * y / (1 + q1 * x), death])

    def full(v):
        x, y = v
        u = 1 + q1 * x
        return np.array([s * x * (1 - x / K) - q * x * y / u, beta * x * y / u - death * y])

    def jac(v):
        x, y = v
        u = 1 + q1 * x
        return np.array([
            [s - 2 * s * x / K - q * y / u**2, -q * x / u],
            [beta * y / u**2, beta * x / u - death],
        ])

    params = {f.name: getattr(p, f.name) for f in fields(p)}
    return DecomposedSystem("predator_prey", 2, params, plus, minus, full, jac)


def toy_system(p):
    """Toy model ``x' = b x (1 - x) - a x y/(1+x)``, ``y' = x y/(1+x) - c y``."""
    a, b, c = p.a, p.b, p.c

    def plus(v):
        x, y = v
        return np.array([b * x, x * y / (1 + x)])

    def minus(v):
        x, y = v
        return np.array([b * x + a * y / (1 + x), c])

    def full(v):
        x, y = v
        return np.array([b * x * (1 - x) - a * x * y / (1 + x), x * y / (1 + x) - c * y])

    def jac(v):
        x, y = v
        u = 1 + x
        return np.array([
            [b - 2 * b * x - a * y / u**2, -a * x / u],
            [y / u**2, x / u - c],
        ])

    params = {f.name: getattr(p, f.name) for f in fields(p)}
    return DecomposedSystem("toy", 2, params, plus, minus, full, jac)


@dataclass(frozen=True)
class ModelEntry:
    params_cls: type
    build: Callable
    default_x0: tuple


MODELS = {
    "predator_prey": ModelEntry(PredatorPreyParams, predator_prey_system, (0.5, 0.4)),
    "toy": ModelEntry(ToyModelParams, toy_system, (6.0, 2.0)),
}


def make_params(name, overrides=None):
    """Parameter object for a registered model, defaults overridden by name."""
    try:
        entry = MODELS[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; known: {', '.join(sorted(MODELS))}") from None
    overrides = dict(overrides or {})
    known = {f.name for f in fields(entry.params_cls)}
    unknown = set(overrides) - known
    if unknown:
        raise ValueError(f"unknown parameter(s) for {name}: {', '.join(sorted(unknown))}")
    return entry.params_cls(**{k: float(v) for k, v in overrides.items()})


def make_system(name, overrides=None):
    params = make_params(name, overrides)
    return MODELS[name].build(params)


# ---------------------------------------------------------------------------
# Sampling validators

@dataclass
class ValidationReport:
    check: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    findings: list = field(default_factory=list)

    def lines(self):
        out = [f"{self.check}: {'PASS' if self.passed else 'FAIL'}"]
        out += [f"  {k} = {v!r}" for k, v in self.metrics.items()]
        out += [f"  ! {msg}" for msg in self.findings]
        return out


def _evaluate(func, pts):
    return np.array([func(p) for p in pts], dtype=float)


def validate_decomposition(sys, n_samples=1000, box_max=10.0, seed=0):
    """Audit the split ``f = f_plus - x * f_minus`` by sampling the box [0, box_max]^m.

    Checks three things. The parts must reproduce the full right-hand side
    to 1e-10 relative. Both parts must be nonnegative. On each face
    ``x_i = 0`` the component ``f_i`` must be nonnegative, since that is what
    keeps solutions inside the nonnegative orthant.
    """
    sys.require_full()
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, box_max, size=(n_samples, sys.dim))
    fp = _evaluate(sys.eval_plus, pts)
    fm = _evaluate(sys.eval_minus, pts)
    ff = _evaluate(sys.eval_full, pts)
    rel = np.abs(ff - (fp - pts * fm)) / (1.0 + np.abs(ff))
    consistency = float(rel.max())

    face_min = []
    for i in range(sys.dim):
        face = rng.uniform(0.0, box_max, size=(n_samples, sys.dim))
        face[:, i] = 0.0
        face_min.append(float(_evaluate(sys.eval_full, face)[:, i].min()))

    report = ValidationReport("decomposition", True, {
        "max_consistency_error": consistency,
        "min_f_plus": fp.min(axis=0).tolist(),
        "min_f_minus": fm.min(axis=0).tolist(),
        "min_f_on_faces": face_min,
    })
    if consistency > 1e-10:
        report.findings.append(f"f differs from f_plus - x*f_minus by {consistency:.3e} (relative)")
    for label, arr in (("f_plus", fp), ("f_minus", fm)):
        for i, v in enumerate(arr.min(axis=0)):
            if v < -1e-12:
                report.findings.append(f"negative {label}[{i}] = {v:.6g}")
    for i, v in enumerate(face_min):
        if v < -1e-12:
            report.findings.append(f"f[{i}] = {v:.6g} < 0 on face x[{i}] = 0")
    report.passed = not report.findings
    return report


def check_quasi_monotone(sys, n_samples=1000, box_max=10.0, seed=0):
    """Sample the quasi-monotone condition.

    For pairs ``x >= y`` with ``x_i == y_i`` the component ``f_i(x) - f_i(y)``
    must be nonnegative. The coordinate ``i`` cycles through all components.
    """
    sys.require_full()
    rng = np.random.default_rng(seed)
    y = rng.uniform(0.0, box_max, size=(n_samples, sys.dim))
    x = y + rng.uniform(0.0, box_max, size=(n_samples, sys.dim))
    idx = np.arange(n_samples) % sys.dim
    x[np.arange(n_samples), idx] = y[np.arange(n_samples), idx]
    fx = _evaluate(sys.eval_full, x)
    fy = _evaluate(sys.eval_full, y)
    gaps = fx[np.arange(n_samples), idx] - fy[np.arange(n_samples), idx]
    worst = int(np.argmin(gaps))
    report = ValidationReport("quasi_monotone", True, {"min_gap": float(gaps[worst])})
    if gaps[worst] < -1e-12:
        report.passed = False
        report.findings.append(
            f"f[{idx[worst]}] decreases from y={y[worst].tolist()} to x={x[worst].tolist()} "
            f"by {-gaps[worst]:.6g}")
    return report


def jacobian_fd(sys, x, step=1e-6):
    """Central-difference Jacobian of the full right-hand side at ``x``."""
    sys.require_full()
    if not step > 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float)
    m = len(x)
    J = np.empty((m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = step
        J[:, j] = (sys.eval_full(x + e) - sys.eval_full(x - e)) / (2 * step)
    return J
