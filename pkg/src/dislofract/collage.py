"""Collage bound certificates and collage-distance parameter fitting.

For a target set A and an operator pair with factor alpha < 1, a collage
distance eps >= min(H(A, T(A)), H(A, S(A))) certifies

    H(A, attractor) <= eps / (1 - alpha).

``collage_certificate`` evaluates both sides: it measures eps with the exact
(unsnapped) operators, iterates to the attractor, and reports the measured
error together with the slack left under the bound.  The bound can only be
violated by discretization (snapping and the iteration tolerance), never
structurally, and the allowance 2*tol + 2*snap makes that explicit.

``collage_fit`` searches a declared parameter family for the system whose
collage distance against a fixed target is smallest.  Only eps is evaluated
during the search (no attractor is ever iterated), which is what makes the
inverse problem cheap; the bound then quantifies reconstruction quality for
the winning candidate.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import CertificateError, ConvergenceError, InputError
from . import metric as _m
from .hausdorff import FiniteCompact, as_compact, default_snap, hausdorff_auto
from .gifs import (
    AffineMapSpec,
    GifsSystem,
    hutchinson_S,
    hutchinson_T,
    iterate_to_attractor,
)


@dataclass(frozen=True)
class CollageCertificate:
    """eps, alpha, the certified bound eps/(1-alpha), and the measured error."""

    epsilon: float
    alpha: float
    bound: float
    measured_error: float
    slack: float
    allowance: float
    attractor_size: int

    def to_text(self) -> str:
        return (
            f"epsilon        = {self.epsilon!r}\n"
            f"alpha          = {self.alpha!r}\n"
            f"bound          = {self.bound!r}\n"
            f"measured_error = {self.measured_error!r}\n"
            f"slack          = {self.slack!r}\n"
            f"allowance      = {self.allowance!r}\n"
            f"attractor_size = {self.attractor_size}\n"
        )


def collage_distance(sys: GifsSystem, A) -> float:
    """eps = min(H(A, T(A)), H(A, S(A))) with exact (unsnapped) operators.

    The theory needs only one of the two distances to be small; taking the
    min instantiates that disjunction as strongly as the data allows.
    """
    A = as_compact(A, sys.dimension)
    met = sys.metric
    e_t = hausdorff_auto(met, A, hutchinson_T(sys, A, snap=None))
    e_s = hausdorff_auto(met, A, hutchinson_S(sys, A, snap=None))
    return float(min(e_t, e_s))


def collage_certificate(sys: GifsSystem, A, tol: float, snap: float | None = ...,
                        max_iter: int = 512) -> CollageCertificate:
    """Certify H(A, attractor) <= eps/(1 - alpha) and measure the actual error.

    The attractor is iterated from A itself (any seed works; the target is
    already close when eps is small).  Raises ConvergenceError when the
    iteration does not certify ``tol`` (certificate withheld) and
    CertificateError if the measured error exceeds the bound by more than the
    discretization allowance 2*tol + 2*snap.
    """
    A = as_compact(A, sys.dimension)
    if sys.alpha_star >= 1:
        raise InputError("alpha_star must be < 1")
    if snap is ...:
        snap = sys.snap
    eps = collage_distance(sys, A)
    alpha = sys.alpha_star
    bound = eps / (1.0 - alpha)

    trace = iterate_to_attractor(sys, A, tol=tol, max_iter=max_iter, snap=snap)
    if not trace.converged:
        raise ConvergenceError(
            f"attractor iteration stopped at tail bound {trace.tail_bound!r} > tol {tol!r}; "
            "certificate withheld"
        )
    measured = hausdorff_auto(sys.metric, A, trace.attractor)
    allowance = 2.0 * tol + 2.0 * (snap or 0.0)
    if measured > bound + allowance:
        raise CertificateError(
            f"measured error {measured!r} exceeds bound {bound!r} "
            f"beyond the allowance {allowance!r}"
        )
    return CollageCertificate(
        epsilon=eps,
        alpha=alpha,
        bound=bound,
        measured_error=float(measured),
        slack=float(bound - measured),
        allowance=float(allowance),
        attractor_size=len(trace.attractor),
    )


# -- parameter family --------------------------------------------------------


def _entries(spec, what):
    """Normalize a template row: floats stay fixed, (lo, hi) pairs are free."""
    out = []
    for v in spec:
        if np.isscalar(v):
            out.append(float(v))
        else:
            pair = tuple(float(x) for x in v)
            if len(pair) != 2 or pair[0] > pair[1]:
                raise InputError(f"{what}: a searched entry must be (lo, hi) with lo <= hi")
            out.append(pair)
    return tuple(out)


@dataclass(frozen=True)
class MapTemplate:
    """Affine map with entries that are either fixed floats or (lo, hi) ranges."""

    matrix: tuple
    translation: tuple

    def __post_init__(self):
        rows = tuple(_entries(row, "matrix row") for row in self.matrix)
        object.__setattr__(self, "matrix", rows)
        object.__setattr__(self, "translation", _entries(self.translation, "translation"))
        d = len(rows)
        if d == 0 or any(len(r) != d for r in rows) or len(self.translation) != d:
            raise InputError("template must describe a square matrix and matching translation")


@dataclass(frozen=True)
class CollageFamily:
    """Search space for collage_fit: metric, map templates, and an alpha cap.

    ``alphas`` may fix the per-pair factors; otherwise the metric must have
    b = 0, in which case the factor of each candidate map is its spectral
    norm.  ``g_templates`` default to the f templates (an f = g system).
    """

    metric: _m.DislocatedMetricSpec
    f_templates: tuple[MapTemplate, ...]
    g_templates: tuple[MapTemplate, ...] | None = None
    alphas: tuple[float, ...] | None = None
    alpha_max: float = 0.95
    domain_lo: np.ndarray | None = None
    domain_hi: np.ndarray | None = None

    def __post_init__(self):
        f = tuple(self.f_templates)
        if not f:
            raise InputError("family needs at least one map template")
        g = tuple(self.g_templates) if self.g_templates is not None else None
        if g is not None and len(g) != len(f):
            raise InputError("f and g template lists must have equal length")
        if not (0.0 <= self.alpha_max < 1.0):
            raise InputError("alpha_max must lie in [0, 1)")
        if self.alphas is None and self.metric.b != 0:
            raise InputError(
                "family must fix alphas explicitly unless the metric has b = 0"
            )
        if self.alphas is not None and len(self.alphas) != len(f):
            raise InputError("one alpha per template pair")
        object.__setattr__(self, "f_templates", f)
        object.__setattr__(self, "g_templates", g)
        if self.alphas is not None:
            object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))

    def _free_slots(self):
        slots = []
        temps = list(enumerate(self.f_templates))
        if self.g_templates is not None:
            temps += [(len(self.f_templates) + i, t) for i, t in enumerate(self.g_templates)]
        for t_idx, t in temps:
            for i, row in enumerate(t.matrix):
                for j, v in enumerate(row):
                    if isinstance(v, tuple):
                        slots.append((t_idx, "matrix", i, j, v))
            for i, v in enumerate(t.translation):
                if isinstance(v, tuple):
                    slots.append((t_idx, "translation", i, None, v))
        return slots

    def assemble(self, values) -> tuple[tuple[AffineMapSpec, ...], tuple[AffineMapSpec, ...]]:
        """Instantiate the templates with a vector of free-parameter values."""
        slots = self._free_slots()
        if len(values) != len(slots):
            raise InputError(f"expected {len(slots)} free values, got {len(values)}")
        n_f = len(self.f_templates)
        temps = list(self.f_templates) + list(self.g_templates or ())
        mats = [np.array([[v if not isinstance(v, tuple) else np.nan for v in row]
                          for row in t.matrix]) for t in temps]
        vecs = [np.array([v if not isinstance(v, tuple) else np.nan for v in t.translation])
                for t in temps]
        for (t_idx, where, i, j, _), val in zip(slots, values):
            if where == "matrix":
                mats[t_idx][i, j] = val
            else:
                vecs[t_idx][i] = val
        maps = tuple(AffineMapSpec(m, v) for m, v in zip(mats, vecs))
        f_maps = maps[:n_f]
        g_maps = maps[n_f:] if self.g_templates is not None else f_maps
        return f_maps, g_maps

    def candidate_alphas(self, f_maps, g_maps):
        """Per-pair factors: declared ones, or spectral norms when b = 0."""
        if self.alphas is not None:
            return self.alphas
        return tuple(max(f.operator_norm, g.operator_norm)
                     for f, g in zip(f_maps, g_maps))


def _worker_count() -> int:
    raw = os.environ.get("DISLOFRACT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class _Candidate:
    values: tuple[float, ...]
    epsilon: float
    feasible: bool


def collage_fit(target, family: CollageFamily, budget: int, tol: float = 1e-6,
                snap: float | None = None, seed: int = 0, starts: int = 4,
                passes: int = 5, grid: int = 9):
    """Search the family for the smallest collage distance against ``target``.

    Multi-start coordinate descent with a deterministic seed: each free
    parameter is scanned on an evenly spaced grid over a bracket that halves
    around the incumbent every pass.  Every epsilon evaluation (feasible or
    not) counts against ``budget``; candidates whose derived alpha_star
    exceeds the family cap are discarded as infeasible and can never be
    returned.  Ties break lexicographically on the parameter vector.

    Returns (best GifsSystem, its CollageCertificate).
    """
    target = as_compact(target, family.metric.dimension)
    if budget < 1:
        raise InputError("budget must be >= 1")
    slots = family._free_slots()
    rng = np.random.default_rng(seed)
    spent = 0
    evaluated_any_feasible = False
    best: _Candidate | None = None

    def evaluate(values) -> _Candidate:
        f_maps, g_maps = family.assemble(values)
        alphas = family.candidate_alphas(f_maps, g_maps)
        if max(alphas) > family.alpha_max:
            return _Candidate(tuple(values), np.inf, False)
        sys = GifsSystem(metric=family.metric, f_maps=f_maps, g_maps=g_maps,
                         alphas=alphas, snap=None,
                         domain_lo=family.domain_lo, domain_hi=family.domain_hi)
        eps = hausdorff_auto(family.metric, target, hutchinson_T(sys, target, snap=None))
        return _Candidate(tuple(values), float(eps), True)

    def evaluate_batch(batch):
        nonlocal spent, evaluated_any_feasible, best
        batch = batch[: budget - spent]
        if not batch:
            return
        workers = _worker_count()
        if workers > 1 and len(batch) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(evaluate, batch))
        else:
            results = [evaluate(v) for v in batch]
        spent += len(batch)
        for cand in results:
            if not cand.feasible:
                continue
            evaluated_any_feasible = True
            if best is None or (cand.epsilon, cand.values) < (best.epsilon, best.values):
                best = cand

    if not slots:
        evaluate_batch([()])
    else:
        lo = np.array([s[-1][0] for s in slots])
        hi = np.array([s[-1][1] for s in slots])
        mid = 0.5 * (lo + hi)
        start_points = [mid] + [lo + (hi - lo) * rng.random(len(slots))
                                for _ in range(max(0, starts - 1))]
        for start in start_points:
            if spent >= budget:
                break
            evaluate_batch([tuple(start)])
            incumbent = best.values if best is not None else tuple(start)
            width = hi - lo
            for p in range(passes):
                shrink = 0.5 ** p
                for k in range(len(slots)):
                    if spent >= budget:
                        break
                    half = 0.5 * width[k] * shrink
                    a = max(lo[k], incumbent[k] - half)
                    b = min(hi[k], incumbent[k] + half)
                    probes = np.linspace(a, b, grid)
                    batch = []
                    for val in probes:
                        v = list(incumbent)
                        v[k] = float(val)
                        batch.append(tuple(v))
                    evaluate_batch(batch)
                    if best is not None:
                        incumbent = best.values
                if spent >= budget:
                    break

    if best is None:
        if evaluated_any_feasible:
            raise ConvergenceError("search spent its budget without a usable candidate")
        raise InputError("no feasible candidate in the family (alpha cap too small?)")

    f_maps, g_maps = family.assemble(best.values)
    alphas = family.candidate_alphas(f_maps, g_maps)
    if snap is None:
        snap = default_snap(target.points)
    fitted = GifsSystem.create(
        metric=family.metric, f_maps=f_maps, g_maps=g_maps, alphas=alphas,
        snap=snap, domain_lo=family.domain_lo, domain_hi=family.domain_hi,
        validate=True, seed=seed)
    cert = collage_certificate(fitted, target, tol=tol, snap=snap)
    return fitted, cert
