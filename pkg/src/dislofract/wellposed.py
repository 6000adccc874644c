"""Well-posedness of the common-attractor problem.

The problem is well-posed when every sequence of sets whose operator
residuals H(T(A_n), A_n) and H(S(A_n), A_n) vanish must converge to the
attractor.  That universal statement is untestable, so the check exercises a
parameterized family: the attractor is jittered by shrinking seeded
perturbations and, generation by generation, the distance back to the
attractor is compared against the quantitative envelope

    H(A_n, A*) <= residual_T(A_n) / (1 - alpha_star) + slack,

which is what the contraction estimate yields after rearrangement.  The
slack covers discretization only (iteration tolerance and lattice snapping);
an operator pair that does not actually contract leaves the perturbations
unrepaired and fails the envelope at every scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InputError
from .hausdorff import FiniteCompact, as_compact, hausdorff_auto
from .gifs import GifsSystem, hutchinson_S, hutchinson_T, iterate_to_attractor


def default_seed_set(sys: GifsSystem) -> FiniteCompact:
    """Deterministic iteration seed: the fixed point of the first f map.

    Falls back to the domain-box center when I - M is singular (e.g. the
    identity map, which has no isolated fixed point).
    """
    m = sys.f_maps[0]
    d = sys.dimension
    try:
        x = np.linalg.solve(np.eye(d) - m.matrix, m.translation)
    except np.linalg.LinAlgError:
        x = 0.5 * (sys.domain_lo + sys.domain_hi)
    if not np.all(np.isfinite(x)):
        x = 0.5 * (sys.domain_lo + sys.domain_hi)
    x = np.minimum(np.maximum(x, sys.domain_lo), sys.domain_hi)
    return FiniteCompact(x.reshape(1, -1))


@dataclass(frozen=True)
class WellposednessReport:
    """Residuals and attractor distances for a family of jittered sets."""

    scales: tuple[float, ...]
    seeds: tuple[int, ...]
    residuals_T: tuple[float, ...]
    residuals_S: tuple[float, ...]
    distances_to_attractor: tuple[float, ...]
    bounds: tuple[float, ...]
    slack: float
    alpha_star: float
    constant: float
    verdict: bool
    attractor: FiniteCompact

    def table(self) -> str:
        """Delimited table (scale, residual_T, residual_S, distance, bound)."""
        lines = ["scale\tresidual_T\tresidual_S\tdistance\tbound"]
        for s, rt, rs, d, b in zip(self.scales, self.residuals_T, self.residuals_S,
                                   self.distances_to_attractor, self.bounds):
            lines.append(f"{s!r}\t{rt!r}\t{rs!r}\t{d!r}\t{b!r}")
        return "\n".join(lines) + "\n"


def wellposedness_check(sys: GifsSystem, perturbations, tol: float,
                        snap: float | None = ..., b0=None, max_iter: int = 512,
                        slack: float | None = None) -> WellposednessReport:
    """Jitter the attractor at the given (scale, seed) pairs and test the envelope.

    Each perturbed set A_n moves every attractor point by a seeded uniform
    offset of magnitude <= scale per coordinate, clipped to the system
    domain.  Residuals are measured with the exact (unsnapped) operators.
    The verdict is true iff every generation satisfies
    distance <= residual_T / (1 - alpha_star) + slack; the implied constant
    max((distance - slack) * (1 - alpha_star) / residual_T) is reported so a
    near-miss is visible even when the verdict holds.

    Raises ConvergenceError when the attractor itself cannot be certified
    (report withheld).
    """
    perturbations = [(float(s), int(seed)) for s, seed in perturbations]
    if not perturbations:
        raise InputError("need at least one perturbation generation")
    if any(s < 0 for s, _ in perturbations):
        raise InputError("perturbation scales must be >= 0")
    if snap is ...:
        snap = sys.snap

    seed_set = default_seed_set(sys) if b0 is None else as_compact(b0, sys.dimension)
    base = iterate_to_attractor(sys, seed_set, tol=tol, max_iter=max_iter, snap=snap)
    if not base.converged:
        raise ConvergenceError(
            f"attractor not certified (tail bound {base.tail_bound!r} > tol {tol!r}); "
            "well-posedness report withheld"
        )
    A = base.attractor
    alpha = sys.alpha_star
    if slack is None:
        slack = 2.0 * tol + 4.0 * (snap or 0.0)

    res_t, res_s, dists, bounds = [], [], [], []
    constant = 0.0
    verdict = True
    for scale, seed in perturbations:
        if scale == 0.0:
            An = A
        else:
            rng = np.random.default_rng(seed)
            offsets = rng.uniform(-scale, scale, A.points.shape)
            pts = np.minimum(np.maximum(A.points + offsets, sys.domain_lo), sys.domain_hi)
            An = FiniteCompact(pts)
        rt = hausdorff_auto(sys.metric, hutchinson_T(sys, An, snap=None), An)
        rs = hausdorff_auto(sys.metric, hutchinson_S(sys, An, snap=None), An)
        d = hausdorff_auto(sys.metric, An, A)
        bound = rt / (1.0 - alpha) + slack
        res_t.append(rt)
        res_s.append(rs)
        dists.append(d)
        bounds.append(bound)
        if d > bound:
            verdict = False
        if rt > 0:
            constant = max(constant, max(0.0, d - slack) * (1.0 - alpha) / rt)
        elif d > slack:
            constant = np.inf
            verdict = False

    return WellposednessReport(
        scales=tuple(s for s, _ in perturbations),
        seeds=tuple(seed for _, seed in perturbations),
        residuals_T=tuple(res_t),
        residuals_S=tuple(res_s),
        distances_to_attractor=tuple(dists),
        bounds=tuple(bounds),
        slack=float(slack),
        alpha_star=float(alpha),
        constant=float(constant),
        verdict=verdict,
        attractor=A,
    )


def halving_scales(start: float, generations: int, seed: int = 0):
    """Perturbation schedule: scales halving from ``start``, seeded per generation."""
    if start <= 0 or generations < 1:
        raise InputError("need start > 0 and generations >= 1")
    return [(start * 0.5 ** k, seed + k) for k in range(generations)]
