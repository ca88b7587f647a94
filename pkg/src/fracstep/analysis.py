"""Equilibria, linearisation and Matignon stability of fractional systems.

A linear system of order alpha is asymptotically stable iff every
eigenvalue of its matrix satisfies ``|arg(lambda)| > alpha*pi/2``. An
equilibrium whose smallest eigenvalue argument lies below ``pi/2`` (so it is
unstable for the classical ODE) is therefore still stable for orders below
``(2/pi) * min|arg(lambda)|``, the marginal order reported here.
"""

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .glkernel import check_order
from .models import jacobian_fd, predator_prey_system


def eig2(A):
    """Eigenvalues of a real 2x2 matrix from its characteristic polynomial.

    The real-root branch uses the cancellation-free form ``q = tr/2 +
    sign(tr) sqrt(disc)``, ``roots = (q, det/q)``.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (2, 2):
        raise ValueError(f"eig2 needs a 2x2 matrix, got shape {A.shape}")
    tr = A[0, 0] + A[1, 1]
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    half = tr / 2.0
    disc = half * half - det
    if disc < 0:
        im = math.sqrt(-disc)
        return complex(half, im), complex(half, -im)
    q = half + math.copysign(math.sqrt(disc), half)
    if q == 0.0:
        return 0j, 0j
    return complex(q), complex(det / q)


@dataclass
class EquilibriumReport:
    """Linear stability data for one equilibrium point."""

    point: np.ndarray
    kind: str
    exists: bool = True
    reason: str = ""
    jacobian: Optional[np.ndarray] = None
    eigenvalues: tuple = ()
    args: tuple = ()
    marginal_alpha: Optional[float] = None
    real_kind: Optional[str] = None
    notes: list = field(default_factory=list)

    def classification_at(self, alpha):
        alpha = check_order(alpha)
        if not self.exists:
            raise ValueError(f"{self.kind} equilibrium does not exist: {self.reason}")
        if any(ev == 0 for ev in self.eigenvalues):
            return "marginal"
        bound = alpha * math.pi / 2
        smallest = min(self.args)
        if smallest > bound:
            return "stable"
        if smallest < bound:
            return "unstable"
        return "marginal"


def _real_kind(eigs):
    if any(abs(ev.imag) > 0 for ev in eigs):
        return None
    re = [ev.real for ev in eigs]
    if any(r == 0 for r in re):
        return "degenerate"
    if all(r < 0 for r in re):
        return "sink"
    if all(r > 0 for r in re):
        return "source"
    return "saddle"


def classify_stability(jacobian, alpha=None, eigenvalues=None, point=None, kind="point"):
    """Matignon analysis of a Jacobian.

    Eigenvalues are computed in closed form for 2x2 matrices. Larger
    systems must pass ``eigenvalues`` explicitly. With ``alpha`` given, the
    verdict is stored in ``notes`` as well as being available from
    :meth:`EquilibriumReport.classification_at`.
    """
    J = np.asarray(jacobian, dtype=float)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise ValueError("jacobian must be square")
    if eigenvalues is None:
        if J.shape != (2, 2):
            raise ValueError("eigenvalues must be supplied for systems larger than 2x2")
        eigenvalues = eig2(J)
    eigs = tuple(complex(ev) for ev in eigenvalues)
    args = tuple(abs(cmath.phase(ev)) for ev in eigs)
    report = EquilibriumReport(
        point=None if point is None else np.asarray(point, dtype=float),
        kind=kind, jacobian=J, eigenvalues=eigs, args=args, real_kind=_real_kind(eigs))
    if any(ev == 0 for ev in eigs):
        report.notes.append("zero eigenvalue: linearisation is degenerate")
    else:
        smallest = min(args)
        if 0 < smallest < math.pi / 2:
            report.marginal_alpha = 2 * smallest / math.pi
    if alpha is not None:
        report.notes.append(f"alpha={alpha}: {report.classification_at(alpha)}")
    return report


@dataclass
class PredatorPreyEquilibria:
    P0: np.ndarray
    P1: np.ndarray
    P2: Optional[np.ndarray]
    R0: float
    P2_reason: str
    P2_residual: Optional[float] = None


def predator_prey_equilibria(p):
    """Trivial, prey-only and (when it exists) coexistence equilibria."""
    R0 = p.R0
    P0 = np.zeros(2)
    P1 = np.array([p.K, 0.0])
    denom = R0 + p.q1 * p.K * (R0 - 1)
    if not R0 > 1:
        return PredatorPreyEquilibria(P0, P1, None, R0, f"P2 does not exist (R0={R0:.4f} \u2264 1)")
    x = p.K / denom
    if x > p.K:
        return PredatorPreyEquilibria(P0, P1, None, R0,
                                      f"P2 does not exist (x*={x:.4f} > K={p.K})")
    y = p.s * R0 * (1 + p.q1 * p.K) ** 2 * (R0 - 1) / (p.q * denom**2)
    P2 = np.array([x, y])
    residual = float(np.abs(predator_prey_system(p).rhs(P2)).max())
    return PredatorPreyEquilibria(P0, P1, P2, R0, f"P2 exists (R0={R0:.4f} > 1)", residual)


def jacobian_at(sys, x):
    """Analytic Jacobian if the system has one, otherwise central differences."""
    x = np.asarray(x, dtype=float)
    if sys.jacobian is not None:
        return np.asarray(sys.jacobian(x), dtype=float)
    return jacobian_fd(sys, x, 1e-6 * (1 + np.abs(x).max()))


@dataclass
class StabilityReport:
    params: object
    R0: float
    alphas: tuple
    points: list

    def verdicts(self):
        """``{kind: {alpha: verdict}}`` for every existing equilibrium."""
        return {r.kind: {a: r.classification_at(a) for a in self.alphas}
                for r in self.points if r.exists}

    def point(self, kind):
        return next(r for r in self.points if r.kind == kind)


def stability_report(p, alphas=()):
    """Full linear-stability report for the predator-prey model."""
    alphas = tuple(check_order(a) for a in alphas)
    sys = predator_prey_system(p)
    eq = predator_prey_equilibria(p)
    points = []
    for kind, pt in (("P0", eq.P0), ("P1", eq.P1)):
        points.append(classify_stability(jacobian_at(sys, pt), point=pt, kind=kind))
    if eq.P2 is not None:
        r = classify_stability(jacobian_at(sys, eq.P2), point=eq.P2, kind="P2")
        r.reason = eq.P2_reason
        r.notes.append(f"residual |f(P2)| = {eq.P2_residual:.3e}")
        points.append(r)
    else:
        points.append(EquilibriumReport(point=None, kind="P2", exists=False, reason=eq.P2_reason))
    p1 = points[1]
    if eq.R0 != 1:
        expected = "stable" if eq.R0 < 1 else "unstable"
        p1.notes.append(f"R0={eq.R0:.4f}: P1 {expected} for every alpha")
    return StabilityReport(p, eq.R0, alphas, points)
