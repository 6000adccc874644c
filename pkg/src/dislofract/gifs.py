"""Hutchinson operator pairs and alternating iteration to a common attractor.

A system holds two parallel families of affine contractions (f_n) and (g_n)
with declared per-pair factors alpha_n.  The induced set maps

    T(B) = union of f_n(B),    S(B) = union of g_n(B)

then satisfy H(T(U), S(V)) <= alpha_star * H(U, V) with
alpha_star = max(alpha_n), which drives everything downstream:

* ``check_pair_contraction`` validates the declared factors by sampling, both
  pointwise (delta(f_n x, g_n y) / delta(x, y)) and lifted to set level;
* ``rational_functional`` evaluates the eight-term majorant whose max bounds
  H(T(U), S(V)) for rational-contractive pairs;
* ``iterate_to_attractor`` runs B -> T(B) -> S(T(B)) -> ... and certifies
  convergence through the geometric tail alpha^n/(1-alpha) * H(B0, B1);
* ``uniqueness_probe`` reruns the iteration from a second seed and measures
  the gap between the two limits.

Point clouds are grid-snapped after every operator application so their size
stays bounded; the stopping rule therefore combines the geometric tail with
a successive-distance floor (snapping breaks exact geometric decay once the
steps reach lattice resolution).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractionError, ConvergenceError, InputError
from . import metric as _m
from .hausdorff import FiniteCompact, as_compact, hausdorff_auto, hausdorff_distance, snap_points


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class AffineMapSpec:
    """x -> matrix @ x + translation, with a recorded operator-norm estimate."""

    matrix: np.ndarray
    translation: np.ndarray
    operator_norm: float = field(init=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.ndim == 0:
            mat = mat.reshape(1, 1)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InputError("matrix must be square")
        vec = np.atleast_1d(np.asarray(self.translation, dtype=float))
        if vec.shape != (mat.shape[0],):
            raise InputError("translation length must match the matrix size")
        if not (np.all(np.isfinite(mat)) and np.all(np.isfinite(vec))):
            raise InputError("map coefficients must be finite")
        object.__setattr__(self, "matrix", _frozen(mat))
        object.__setattr__(self, "translation", _frozen(vec))
        object.__setattr__(self, "operator_norm", _power_iteration_norm(mat))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return points @ self.matrix.T + self.translation


def _power_iteration_norm(mat: np.ndarray, steps: int = 64) -> float:
    """Spectral norm estimate by power iteration on M^T M (fixed 64 steps)."""
    d = mat.shape[0]
    gram = mat.T @ mat
    v = np.full(d, 1.0 / np.sqrt(d))
    for _ in range(steps):
        w = gram @ v
        norm = np.sqrt(float(w @ w))
        if norm == 0.0:
            return 0.0
        v = w / norm
    return float(np.sqrt(v @ (gram @ v)))


def apply_map(mapping: AffineMapSpec, B, snap: float | None) -> FiniteCompact:
    """Pointwise image {Mx + t : x in B}, snapped and deduplicated."""
    B = as_compact(B, mapping.dimension)
    img = mapping(B.points)
    if snap is not None:
        img = snap_points(img, snap)
    return FiniteCompact(img, grid_resolution=snap)


@dataclass(frozen=True)
class GifsSystem:
    """A pair of map families over a dislocated metric.

    ``alphas`` are the declared per-pair contraction factors; they are taken
    on trust by the constructor and validated by sampling in ``create`` /
    ``check_pair_contraction``, so a false declaration fails loudly rather
    than silently.  ``domain_lo``/``domain_hi`` bound the region used for
    validation sampling and perturbation clipping (default unit box).
    """

    metric: _m.DislocatedMetricSpec
    f_maps: tuple[AffineMapSpec, ...]
    g_maps: tuple[AffineMapSpec, ...]
    alphas: tuple[float, ...]
    alpha_star: float = field(init=False)
    snap: float | None = None
    domain_lo: np.ndarray | None = None
    domain_hi: np.ndarray | None = None

    def __post_init__(self):
        if self.metric.kind == _m.TABLE:
            raise InputError("affine map systems need a continuous metric kind")
        f = tuple(self.f_maps)
        g = tuple(self.g_maps)
        if len(f) == 0 or len(f) != len(g):
            raise InputError("f and g families must have equal positive length")
        d = self.metric.dimension
        for m in (*f, *g):
            if m.dimension != d:
                raise InputError(f"map dimension {m.dimension} != metric dimension {d}")
        alphas = tuple(float(a) for a in self.alphas)
        if len(alphas) != len(f):
            raise InputError("one alpha per map pair")
        if any(a < 0 or a >= 1 for a in alphas):
            raise InputError("alphas must lie in [0, 1)")
        if self.snap is not None and self.snap <= 0:
            raise InputError("snap must be positive")
        lo = np.zeros(d) if self.domain_lo is None else np.atleast_1d(np.asarray(self.domain_lo, float))
        hi = np.ones(d) if self.domain_hi is None else np.atleast_1d(np.asarray(self.domain_hi, float))
        if lo.shape != (d,) or hi.shape != (d,) or np.any(lo >= hi):
            raise InputError("domain bounds must be d-vectors with lo < hi")
        object.__setattr__(self, "f_maps", f)
        object.__setattr__(self, "g_maps", g)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "alpha_star", max(alphas))
        object.__setattr__(self, "domain_lo", _frozen(lo))
        object.__setattr__(self, "domain_hi", _frozen(hi))

    @property
    def n_pairs(self) -> int:
        return len(self.f_maps)

    @property
    def dimension(self) -> int:
        return self.metric.dimension

    @classmethod
    def create(cls, metric, f_maps, g_maps=None, alphas=None, snap=None,
               domain_lo=None, domain_hi=None, validate: bool = True,
               seed: int = 0, tol: float = 1e-9) -> "GifsSystem":
        """Build a system and (by default) run the sampled contraction check."""
        f_maps = tuple(f_maps)
        g_maps = f_maps if g_maps is None else tuple(g_maps)
        if alphas is None:
            raise InputError("alphas must be declared")
        sys = cls(metric=metric, f_maps=f_maps, g_maps=g_maps,
                  alphas=tuple(alphas), snap=snap,
                  domain_lo=domain_lo, domain_hi=domain_hi)
        if validate:
            report = check_pair_contraction(
                sys, default_point_pairs(sys, seed=seed),
                set_pairs=default_set_pairs(sys, seed=seed), tol=tol)
            if report.verdict is False:
                raise ContractionError(report.describe_failure())
        return sys


def default_point_pairs(sys: GifsSystem, seed: int = 0, count: int = 256):
    """Deterministic validation sample of point pairs in the system domain."""
    rng = np.random.default_rng(seed)
    d = sys.dimension
    lo, hi = sys.domain_lo, sys.domain_hi
    pts = lo + (hi - lo) * rng.random((2 * count, d))
    return [(pts[2 * i], pts[2 * i + 1]) for i in range(count)]


def default_set_pairs(sys: GifsSystem, seed: int = 0, count: int = 16, max_size: int = 24):
    """Deterministic validation sample of compact-set pairs in the domain."""
    rng = np.random.default_rng(seed + 1)
    d = sys.dimension
    lo, hi = sys.domain_lo, sys.domain_hi
    out = []
    for _ in range(count):
        nu = int(rng.integers(1, max_size + 1))
        nv = int(rng.integers(1, max_size + 1))
        U = FiniteCompact(lo + (hi - lo) * rng.random((nu, d)))
        V = FiniteCompact(lo + (hi - lo) * rng.random((nv, d)))
        out.append((U, V))
    return out


# -- Hutchinson operators ----------------------------------------------------


def _hutchinson(maps, B: FiniteCompact, snap):
    imgs = [m(B.points) for m in maps]
    pts = np.vstack(imgs)
    if snap is not None:
        pts = snap_points(pts, snap)
    return FiniteCompact(pts, grid_resolution=snap)


def hutchinson_T(sys: GifsSystem, B, snap: float | None = None) -> FiniteCompact:
    """T(B): union of the f-family images, snapped and deduplicated."""
    B = as_compact(B, sys.dimension)
    return _hutchinson(sys.f_maps, B, snap)


def hutchinson_S(sys: GifsSystem, B, snap: float | None = None) -> FiniteCompact:
    """S(B): union of the g-family images, snapped and deduplicated."""
    B = as_compact(B, sys.dimension)
    return _hutchinson(sys.g_maps, B, snap)


# -- contraction checking ----------------------------------------------------


@dataclass(frozen=True)
class ContractionReport:
    """Sampled evidence for the declared contraction factors."""

    declared_alphas: tuple[float, ...]
    observed_ratios: tuple[float, ...]
    usable_pairs: tuple[int, ...]
    pointwise_ok: bool
    set_violation: float | None
    set_ratio: float | None
    lifted_ok: bool | None
    tol: float
    degenerate: bool
    verdict: bool | None

    def describe_failure(self) -> str:
        if self.degenerate:
            return "all sampled point pairs had delta = 0; no verdict possible"
        bad = [
            f"pair {i}: observed ratio {r!r} > declared alpha {a!r}"
            for i, (r, a) in enumerate(zip(self.observed_ratios, self.declared_alphas))
            if r > a + self.tol
        ]
        if self.lifted_ok is False:
            bad.append(
                f"set level: H(T(U),S(V)) exceeds alpha_star*H(U,V) by {self.set_violation!r}"
            )
        return "contraction check failed: " + "; ".join(bad) if bad else "contraction check failed"


def check_pair_contraction(sys: GifsSystem, sample_pairs, set_pairs=None,
                           tol: float = 1e-9) -> ContractionReport:
    """Validate delta(f_n x, g_n y) <= alpha_n * delta(x, y) on a sample.

    Pairs with delta(x, y) = 0 are skipped (the inequality forces
    delta(f x, g y) = 0 there, which the ratio cannot express).  When
    ``set_pairs`` is given, the lifted inequality
    H(T(U), S(V)) <= alpha_star * H(U, V) + tol is checked as well, with the
    operators applied unsnapped so discretization cannot mask a violation.
    If every sampled pair is degenerate the report carries no verdict.
    """
    if not sample_pairs:
        raise InputError("sample_pairs must be nonempty")
    X = _m.as_points(sys.metric, np.array([np.atleast_1d(np.asarray(p, float)) for p, _ in sample_pairs]))
    Y = _m.as_points(sys.metric, np.array([np.atleast_1d(np.asarray(q, float)) for _, q in sample_pairs]))
    base = _m._delta_pairs_raw(sys.metric, X, Y)
    usable = base > 0

    ratios = []
    counts = []
    for f, g in zip(sys.f_maps, sys.g_maps):
        fx = f(X)
        gy = g(Y)
        _m.as_points(sys.metric, fx)
        _m.as_points(sys.metric, gy)
        num = _m._delta_pairs_raw(sys.metric, fx, gy)
        if np.any(usable):
            ratios.append(float((num[usable] / base[usable]).max()))
        else:
            ratios.append(float("nan"))
        counts.append(int(usable.sum()))

    degenerate = not bool(np.any(usable))
    pointwise_ok = (not degenerate) and all(
        r <= a + tol for r, a in zip(ratios, sys.alphas)
    )

    set_violation = None
    set_ratio = None
    lifted_ok = None
    if set_pairs:
        worst = -np.inf
        worst_ratio = 0.0
        for U, V in set_pairs:
            U = as_compact(U, sys.dimension)
            V = as_compact(V, sys.dimension)
            huv = hausdorff_distance(sys.metric, U, V)
            hts = hausdorff_distance(
                sys.metric, hutchinson_T(sys, U, snap=None), hutchinson_S(sys, V, snap=None))
            worst = max(worst, hts - sys.alpha_star * huv)
            if huv > 0:
                worst_ratio = max(worst_ratio, hts / huv)
        set_violation = float(worst)
        set_ratio = float(worst_ratio)
        lifted_ok = set_violation <= tol

    if degenerate:
        verdict = None
    else:
        verdict = pointwise_ok and (lifted_ok is not False)
    return ContractionReport(
        declared_alphas=sys.alphas,
        observed_ratios=tuple(ratios),
        usable_pairs=tuple(counts),
        pointwise_ok=pointwise_ok,
        set_violation=set_violation,
        set_ratio=set_ratio,
        lifted_ok=lifted_ok,
        tol=float(tol),
        degenerate=degenerate,
        verdict=verdict,
    )


def check_rational_contraction(sys: GifsSystem, set_pairs, alpha: float,
                               tol: float = 1e-9):
    """Check H(T(U), S(V)) <= alpha * M(U, V) + tol on sampled set pairs.

    Returns (ok, worst_violation).  This is the hypothesis the convergence
    theory actually needs; a plain generalized contraction satisfies it with
    the same alpha because M majorizes H(U, V).
    """
    worst = -np.inf
    for U, V in set_pairs:
        U = as_compact(U, sys.dimension)
        V = as_compact(V, sys.dimension)
        lhs = hausdorff_distance(
            sys.metric, hutchinson_T(sys, U, snap=None), hutchinson_S(sys, V, snap=None))
        worst = max(worst, lhs - alpha * rational_functional(sys, U, V, snap=None))
    return bool(worst <= tol), float(worst)


# -- rational functional -----------------------------------------------------


def rational_functional(sys: GifsSystem, U, V, snap: float | None = ...) -> float:
    """Eight-term majorant M(U, V) for the operator pair.

    The terms are, writing H for the Hausdorff dislocated distance:

        H(U, V),  H(U, T(U)),  H(V, S(V)),
        [H(U, S(V)) + H(V, T(U))] / 2,
        H(V, S(V)) * [1 + H(V, T(U))] / (1 + H(U, V)),
        H(V, S(V)) * [1 + H(U, T(U))] / (1 + H(U, V)),
        H(V, T(U)) * [1 + H(V, T(U))] / (1 + H(U, V)),
        H(V, T(U)) * [1 + H(U, T(U))] / (1 + H(U, V)),

    and the result is their maximum.  Denominators are >= 1, so the value is
    always finite.  T(U) and S(V) use the system snap unless overridden.
    """
    U = as_compact(U, sys.dimension)
    V = as_compact(V, sys.dimension)
    if snap is ...:
        snap = sys.snap
    TU = hutchinson_T(sys, U, snap=snap)
    SV = hutchinson_S(sys, V, snap=snap)
    met = sys.metric
    h_uv = hausdorff_auto(met, U, V)
    h_utu = hausdorff_auto(met, U, TU)
    h_vsv = hausdorff_auto(met, V, SV)
    h_usv = hausdorff_auto(met, U, SV)
    h_vtu = hausdorff_auto(met, V, TU)
    den = 1.0 + h_uv
    terms = (
        h_uv,
        h_utu,
        h_vsv,
        0.5 * (h_usv + h_vtu),
        h_vsv * (1.0 + h_vtu) / den,
        h_vsv * (1.0 + h_utu) / den,
        h_vtu * (1.0 + h_vtu) / den,
        h_vtu * (1.0 + h_utu) / den,
    )
    return float(max(terms))


# -- alternating iteration ---------------------------------------------------


@dataclass(frozen=True)
class IterationStep:
    n: int
    operator_applied: str
    set_size: int
    successive_distance: float
    bound: float


@dataclass(frozen=True)
class IterationTrace:
    """Record of the alternating iteration B0 -> T -> S -> T -> ...

    ``steps[n]`` describes producing B_{n+1}: the operator used (T on even n,
    S on odd), the size of B_{n+1}, the successive distance H(B_n, B_{n+1}),
    and the geometric budget alpha^n * H(B0, B1) it must respect.

    ``tail_bound`` bounds the distance from ``attractor`` to the true limit:
    the minimum of the geometric tail alpha^n/(1-alpha) * H(B0, B1) and the
    restarted tail alpha/(1-alpha) * (last successive distance); converged
    implies tail_bound <= the requested tolerance.  The fixed-set residuals
    H(A, T(A)) and H(A, S(A)) and the self-distance H(A, A) are measured on
    the returned set after the run.
    """

    steps: tuple[IterationStep, ...]
    attractor: FiniteCompact
    converged: bool
    tail_bound: float
    tol: float
    fixed_residual_T: float
    fixed_residual_S: float
    self_distance: float
    fixed_set_ok: bool

    def table(self) -> str:
        """Delimited trace (n, operator, set_size, successive_distance, bound)."""
        lines = ["n\toperator\tset_size\tsuccessive_distance\tbound"]
        for s in self.steps:
            lines.append(
                f"{s.n}\t{s.operator_applied}\t{s.set_size}\t"
                f"{s.successive_distance!r}\t{s.bound!r}"
            )
        return "\n".join(lines) + "\n"


def iterate_to_attractor(sys: GifsSystem, B0, tol: float, max_iter: int,
                         snap: float | None = ...) -> IterationTrace:
    """Alternate T and S from B0 until the geometric tail certifies tol.

    Stops when alpha^n/(1-alpha) * H(B0, B1) <= tol or the successive
    distance drops to tol*(1-alpha), whichever happens first; returns
    converged=False (no exception) with the partial trace when max_iter runs
    out.  On return, the fixed-set residuals are evaluated with the same
    snap, so a converged trace certifies H(A, T(A)) and H(A, S(A)) <= 2*tol
    up to lattice effects.
    """
    if tol <= 0:
        raise InputError("tol must be positive")
    if max_iter < 1:
        raise InputError("max_iter must be >= 1")
    if snap is ...:
        snap = sys.snap
    met = sys.metric
    current = as_compact(B0, sys.dimension)
    if snap is not None:
        current = current.snapped(snap)
    alpha = sys.alpha_star

    steps: list[IterationStep] = []
    d0 = None
    last = np.inf
    converged = False
    tail = np.inf
    for n in range(max_iter):
        op = "T" if n % 2 == 0 else "S"
        nxt = (hutchinson_T if op == "T" else hutchinson_S)(sys, current, snap=snap)
        dist = hausdorff_auto(met, current, nxt)
        if d0 is None:
            d0 = dist
        steps.append(IterationStep(
            n=n, operator_applied=op, set_size=len(nxt),
            successive_distance=dist, bound=(alpha ** n) * d0,
        ))
        current = nxt
        last = dist
        geometric = (alpha ** (n + 1)) / (1.0 - alpha) * d0
        restarted = alpha / (1.0 - alpha) * last
        tail = min(geometric, restarted)
        if geometric <= tol or last <= tol * (1.0 - alpha):
            converged = True
            break

    res_t = hausdorff_auto(met, current, hutchinson_T(sys, current, snap=snap))
    res_s = hausdorff_auto(met, current, hutchinson_S(sys, current, snap=snap))
    self_d = hausdorff_auto(met, current, current)
    return IterationTrace(
        steps=tuple(steps),
        attractor=current,
        converged=converged,
        tail_bound=float(tail),
        tol=float(tol),
        fixed_residual_T=float(res_t),
        fixed_residual_S=float(res_s),
        self_distance=float(self_d),
        fixed_set_ok=bool(res_t <= 2.0 * tol and res_s <= 2.0 * tol),
    )


def uniqueness_probe(sys: GifsSystem, B0, C0, tol: float, max_iter: int = 256,
                     snap: float | None = ...) -> float:
    """Distance between the attractors reached from two different seeds.

    A value within 2*tol plus snap-induced slack certifies that the computed
    attractor does not depend on the seed.  Non-convergence of either run is
    raised, not returned.
    """
    ta = iterate_to_attractor(sys, B0, tol, max_iter, snap=snap)
    tb = iterate_to_attractor(sys, C0, tol, max_iter, snap=snap)
    if not ta.converged or not tb.converged:
        raise ConvergenceError(
            f"probe runs did not both converge within {max_iter} steps "
            f"(tails {ta.tail_bound!r}, {tb.tail_bound!r})"
        )
    return hausdorff_auto(sys.metric, ta.attractor, tb.attractor)
