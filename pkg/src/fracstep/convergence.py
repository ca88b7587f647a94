"""Self-convergence study on dyadic step ladders.

The fine-step run of the same scheme stands in for the exact solution.
Coarse runs are compared with it at the coarse nodes only, and the observed
order between two neighbouring steps is ``log2(xi(2h) / xi(h))``.
"""

from dataclasses import dataclass

import numpy as np

from .glkernel import check_order
from .schemes import Grid, Scheme, integrate


def _ratio(coarse_h, fine_h):
    r = int(round(coarse_h / fine_h))
    if r < 1 or r * fine_h != coarse_h:
        raise ValueError(f"step {coarse_h!r} is not an integer multiple of {fine_h!r}")
    return r


def check_ladder(ladder, h_star):
    """Validate a dyadic ladder against the reference step; returns floats."""
    steps = [float(h) for h in ladder]
    if not steps:
        raise ValueError("ladder is empty")
    for prev, h in zip(steps, steps[1:]):
        if h * 2 != prev:
            raise ValueError(f"ladder step {h!r} is not half of {prev!r}")
    for h in steps:
        try:
            r = _ratio(h, h_star)
        except ValueError:
            raise ValueError(f"ladder step {h!r} is not a dyadic multiple of h*={h_star!r}") from None
        if r & (r - 1):
            raise ValueError(f"ladder step {h!r} is not a dyadic multiple of h*={h_star!r}")
    return steps


@dataclass
class ErrorMetrics:
    eps: np.ndarray
    xi: float


def reference_solution(sys, scheme, alpha, x0, T, h_star, t0=0.0, opts=None):
    """Fine-step trajectory used as surrogate truth on [t0, T]."""
    return integrate(sys, scheme, alpha, x0, Grid.from_span(t0, T, h_star), opts)


def error_against_reference(coarse, reference):
    """Per-component max deviation at the coarse nodes, and their maximum."""
    if coarse.grid.t0 != reference.grid.t0:
        raise ValueError("trajectories start at different times")
    r = _ratio(coarse.grid.h, reference.grid.h)
    if coarse.grid.n_steps * r > reference.grid.n_steps:
        raise ValueError("coarse trajectory extends past the reference")
    sub = reference.states[: coarse.grid.n_steps * r + 1 : r]
    eps = np.abs(coarse.states - sub).max(axis=0)
    return ErrorMetrics(eps, float(eps.max()))


def observed_rates(xi):
    xi = np.asarray(xi, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log2(xi[:-1] / xi[1:])


@dataclass
class RateTable:
    alpha: float
    steps: list
    xi: np.ndarray
    rho: np.ndarray
    reference_h: float
    eps: np.ndarray  # shape (len(steps), m)

    def rows(self):
        """CSV rows ``alpha, h, xi, rho, eps_1..eps_m`` (rho empty on the first)."""
        out = []
        for i, h in enumerate(self.steps):
            rho = "" if i == 0 else repr(float(self.rho[i - 1]))
            out.append([repr(self.alpha), repr(h), repr(float(self.xi[i])), rho]
                       + [repr(float(e)) for e in self.eps[i]])
        return out


def rate_table(sys, alpha, x0, T, ladder, h_star, scheme=Scheme.NSFD, opts=None):
    alpha = check_order(alpha)
    steps = check_ladder(ladder, h_star)
    ref = reference_solution(sys, scheme, alpha, x0, T, h_star, opts=opts)
    metrics = [error_against_reference(integrate(sys, scheme, alpha, x0,
                                                 Grid.from_span(0.0, T, h), opts), ref)
               for h in steps]
    xi = np.array([m.xi for m in metrics])
    return RateTable(alpha, steps, xi, observed_rates(xi), float(h_star),
                     np.array([m.eps for m in metrics]))


def _h_label(h):
    k = np.log2(h)
    return f"2^{int(k)}" if k == int(k) else f"{h:g}"


def format_rate_tables(tables):
    """Aligned text table: one block per alpha with a xi row and a rho row."""
    steps = tables[0].steps
    head = f"{'alpha':>6} {'':>4} " + " ".join(f"{_h_label(h):>10}" for h in steps)
    lines = [head, "-" * len(head)]
    for t in tables:
        lines.append(f"{t.alpha:>6.2f} {'xi':>4} " + " ".join(f"{x:>10.3e}" for x in t.xi))
        lines.append(f"{'':>6} {'rho':>4} {'':>10} " + " ".join(f"{r:>10.4f}" for r in t.rho))
    lines.append(f"rho = log2(xi(2h)/xi(h)); reference step h* = {_h_label(tables[0].reference_h)}")
    return "\n".join(lines)
