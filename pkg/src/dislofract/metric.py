"""Dislocated metrics as evaluable objects, with sampled axiom checking.

A dislocated metric keeps symmetry and the triangle inequality but drops the
requirement that self-distance vanish: delta(x, x) > 0 is allowed, while
delta(x, y) = 0 still forces x = y.  Three concrete families are supported:

* ``absmax``    -- delta(x, y) = a*|x - y| + b*max(x, y) on the nonnegative
                   half-line.  a=1, b=0 is the usual metric; a=0, b=1 is a
                   partial metric; a=2, b=4 is properly dislocated.
* ``table``     -- an explicit symmetric nonnegative matrix over a finite
                   label set (points are single label indices).
* ``euclidean`` -- delta(x, y) = a*||x - y||_2 + b*max(||x||_2, ||y||_2)
                   on R^d, the d-dimensional extension of the absmax family.

Points are plain 1-D float arrays of length ``spec.dimension``; scalars are
accepted for one-dimensional spaces.  Axioms are checked on samples, not
symbolically: ``verify_axioms`` reports the worst observed violation of
identity-of-indiscernibles, symmetry, and the triangle inequality.  Because
the identity axiom is one-directional, a positive self-distance is never
flagged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError

ABS_MAX = "absmax"
TABLE = "table"
EUCLIDEAN = "euclidean"

_KINDS = (ABS_MAX, TABLE, EUCLIDEAN)


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class DislocatedMetricSpec:
    """Declarative description of a dislocated metric.

    ``a`` weighs the difference term and ``b`` the max term for the absmax
    and euclidean kinds; ``labels``/``table`` define the finite kind.
    """

    kind: str
    a: float = 0.0
    b: float = 0.0
    dimension: int = 1
    labels: tuple[str, ...] | None = None
    table: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InputError(f"unknown metric kind {self.kind!r}; expected one of {_KINDS}")
        if self.dimension < 1:
            raise InputError("dimension must be >= 1")
        if self.kind in (ABS_MAX, EUCLIDEAN):
            if self.a < 0 or self.b < 0 or self.a + self.b <= 0:
                raise InputError("need a >= 0, b >= 0 and a + b > 0")
            if self.kind == ABS_MAX and self.dimension != 1:
                raise InputError("absmax metric is one-dimensional")
            if self.table is not None or self.labels is not None:
                raise InputError("table/labels only apply to the table kind")
        else:
            if self.table is None:
                raise InputError("table kind requires a distance matrix")
            if self.dimension != 1:
                raise InputError("table points are single label indices; dimension must be 1")

    # -- constructors ------------------------------------------------------

    @classmethod
    def absmax(cls, a: float, b: float) -> "DislocatedMetricSpec":
        return cls(kind=ABS_MAX, a=float(a), b=float(b), dimension=1)

    @classmethod
    def euclidean(cls, a: float, b: float, dimension: int) -> "DislocatedMetricSpec":
        return cls(kind=EUCLIDEAN, a=float(a), b=float(b), dimension=int(dimension))

    @classmethod
    def from_table(cls, labels: Sequence[str], table, check: bool = True) -> "DislocatedMetricSpec":
        """Build a finite metric from a square symmetric matrix.

        With ``check=True`` (the default, and what document loading uses) the
        matrix is validated: nonnegative entries, exact symmetry, zeros only
        on the diagonal, and the triangle inequality over all index triples.
        ``check=False`` skips validation so that a deliberately broken table
        can still be fed to ``verify_axioms``.
        """
        labels = tuple(str(s) for s in labels)
        arr = np.asarray(table, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InputError("table must be a square matrix")
        if arr.shape[0] != len(labels):
            raise InputError(f"table is {arr.shape[0]}x{arr.shape[0]} but {len(labels)} labels given")
        if not np.all(np.isfinite(arr)):
            raise InputError("table entries must be finite")
        if check:
            _check_table(labels, arr)
        return cls(kind=TABLE, dimension=1, labels=labels, table=_frozen(arr))

    @property
    def size(self) -> int:
        """Number of labels (table kind only)."""
        if self.table is None:
            raise InputError("size is only defined for the table kind")
        return self.table.shape[0]


def _check_table(labels, arr):
    n = arr.shape[0]
    if np.any(arr < 0):
        i, j = np.unravel_index(int(np.argmin(arr)), arr.shape)
        raise InputError(f"negative entry delta({labels[i]},{labels[j]}) = {arr[i, j]}")
    asym = np.abs(arr - arr.T)
    if asym.max() > 0:
        i, j = np.unravel_index(int(np.argmax(asym)), arr.shape)
        raise InputError(f"asymmetric entries delta({labels[i]},{labels[j]}) != delta({labels[j]},{labels[i]})")
    off = arr + np.diag(np.full(n, np.inf))
    if np.any(off == 0):
        i, j = np.unravel_index(int(np.argmin(off)), arr.shape)
        raise InputError(f"delta({labels[i]},{labels[j]}) = 0 on distinct labels violates identity")
    # delta(i,k) <= delta(i,j) + delta(j,k) for every triple
    through = (arr[:, :, None] + arr[None, :, :]).min(axis=1)
    excess = arr - through
    worst = float(excess.max())
    if worst > 0:
        i, k = np.unravel_index(int(np.argmax(excess)), excess.shape)
        j = int(np.argmin(arr[i, :] + arr[:, k]))
        raise InputError(
            f"triangle inequality fails on ({labels[i]},{labels[j]},{labels[k]}): "
            f"delta({labels[i]},{labels[k]}) exceeds the detour by {worst}"
        )


# -- point handling ---------------------------------------------------------


def as_point(spec: DislocatedMetricSpec, x) -> np.ndarray:
    """Validate and coerce ``x`` to a 1-D float array of spec.dimension."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1 or arr.shape[0] != spec.dimension:
        raise InputError(f"point has shape {arr.shape}, expected ({spec.dimension},)")
    if not np.all(np.isfinite(arr)):
        raise InputError("point coordinates must be finite")
    _check_domain(spec, arr.reshape(1, -1))
    return arr


def as_points(spec: DislocatedMetricSpec, pts) -> np.ndarray:
    """Validate and coerce a batch of points to shape (n, spec.dimension)."""
    arr = np.asarray(pts, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[1] != spec.dimension:
        raise InputError(f"points have shape {arr.shape}, expected (n, {spec.dimension})")
    if arr.shape[0] == 0:
        raise InputError("empty point batch")
    if not np.all(np.isfinite(arr)):
        raise InputError("point coordinates must be finite")
    _check_domain(spec, arr)
    return arr


def _check_domain(spec, arr):
    if spec.kind == ABS_MAX:
        if arr.min() < 0:
            raise InputError("absmax metric is defined on nonnegative reals only")
    elif spec.kind == TABLE:
        idx = arr[:, 0]
        if np.any(idx != np.round(idx)):
            raise InputError("table points must be integer label indices")
        n = spec.size
        if idx.min() < 0 or idx.max() >= n:
            raise InputError(f"table index out of range [0, {n})")


# -- evaluation -------------------------------------------------------------


def _norms(spec, arr):
    if spec.kind == ABS_MAX:
        return arr[:, 0]
    return np.sqrt(np.einsum("ij,ij->i", arr, arr))


def delta_pairs(spec: DislocatedMetricSpec, X, Y) -> np.ndarray:
    """Elementwise delta over two equally shaped point batches."""
    X = as_points(spec, X)
    Y = as_points(spec, Y)
    if X.shape != Y.shape:
        raise InputError("batches must have equal shape")
    return _delta_pairs_raw(spec, X, Y)


def _delta_pairs_raw(spec, X, Y):
    if spec.kind == ABS_MAX:
        x, y = X[:, 0], Y[:, 0]
        return spec.a * np.abs(x - y) + spec.b * np.maximum(x, y)
    if spec.kind == EUCLIDEAN:
        diff = np.sqrt(np.einsum("ij,ij->i", X - Y, X - Y))
        return spec.a * diff + spec.b * np.maximum(_norms(spec, X), _norms(spec, Y))
    ix = X[:, 0].astype(np.intp)
    iy = Y[:, 0].astype(np.intp)
    return spec.table[ix, iy]


def delta_matrix(spec: DislocatedMetricSpec, X, Y) -> np.ndarray:
    """Full (m, n) matrix of delta values between two point batches."""
    X = as_points(spec, X)
    Y = as_points(spec, Y)
    return _delta_matrix_raw(spec, X, Y)


def _delta_matrix_raw(spec, X, Y, norms_x=None, norms_y=None):
    if spec.kind == ABS_MAX:
        x = X[:, 0][:, None]
        y = Y[:, 0][None, :]
        return spec.a * np.abs(x - y) + spec.b * np.maximum(x, y)
    if spec.kind == EUCLIDEAN:
        # broadcast differences, not the expanded |x|^2 - 2xy + |y|^2 form:
        # the latter loses digits near zero and breaks bit-exact symmetry
        diff = X[:, None, :] - Y[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        nx = _norms(spec, X) if norms_x is None else norms_x
        ny = _norms(spec, Y) if norms_y is None else norms_y
        return spec.a * dist + spec.b * np.maximum(nx[:, None], ny[None, :])
    ix = X[:, 0].astype(np.intp)
    iy = Y[:, 0].astype(np.intp)
    return spec.table[np.ix_(ix, iy)]


def delta(spec: DislocatedMetricSpec, x, y) -> float:
    """Evaluate delta(x, y).

    The argument pair is put in lexicographic order before evaluation, so
    delta(x, y) and delta(y, x) run the identical floating-point expression
    and symmetry holds bit-exactly.
    """
    xp = as_point(spec, x)
    yp = as_point(spec, y)
    if tuple(yp) < tuple(xp):
        xp, yp = yp, xp
    return float(_delta_pairs_raw(spec, xp.reshape(1, -1), yp.reshape(1, -1))[0])


def default_tolerance(magnitude: float) -> float:
    """Default sampling tolerance: 1e-12 scaled by (1 + magnitude)."""
    return 1e-12 * (1.0 + abs(magnitude))


# -- axiom verification ------------------------------------------------------


@dataclass(frozen=True)
class AxiomReport:
    """Worst observed violations of the three dislocated-metric axioms."""

    n_points: int
    n_pairs: int
    n_triples: int
    identity_violation: float
    symmetry_violation: float
    triangle_violation: float
    identity_witness: tuple | None
    symmetry_witness: tuple | None
    triangle_witness: tuple | None
    tol: float
    passed: bool

    def to_text(self) -> str:
        lines = [
            f"points   = {self.n_points}",
            f"pairs    = {self.n_pairs}",
            f"triples  = {self.n_triples}",
            f"identity violation = {self.identity_violation!r}",
            f"symmetry violation = {self.symmetry_violation!r}",
            f"triangle violation = {self.triangle_violation!r}",
        ]
        if self.triangle_violation > self.tol and self.triangle_witness is not None:
            lines.append("worst triple = " + ", ".join(str(w) for w in self.triangle_witness))
        if self.identity_violation > self.tol and self.identity_witness is not None:
            lines.append("identity witness = " + ", ".join(str(w) for w in self.identity_witness))
        lines.append(f"tolerance = {self.tol!r}")
        lines.append("passed" if self.passed else "FAILED")
        return "\n".join(lines)


def _index_pairs(n, max_pairs, rng):
    if n * n <= max_pairs:
        i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        return i.ravel(), j.ravel()
    i = rng.integers(0, n, size=max_pairs)
    j = rng.integers(0, n, size=max_pairs)
    return i, j


def _index_triples(n, max_triples, rng):
    if n ** 3 <= max_triples:
        i, j, k = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
        return i.ravel(), j.ravel(), k.ravel()
    i = rng.integers(0, n, size=max_triples)
    j = rng.integers(0, n, size=max_triples)
    k = rng.integers(0, n, size=max_triples)
    return i, j, k


def _witness(spec, pts, *idx):
    if spec.kind == TABLE and spec.labels is not None:
        return tuple(spec.labels[int(pts[i, 0])] for i in idx)
    return tuple(tuple(pts[i]) for i in idx)


def verify_axioms(
    spec: DislocatedMetricSpec,
    sample,
    tol: float,
    max_pairs: int = 20000,
    max_triples: int = 10000,
    seed: int = 0,
) -> AxiomReport:
    """Check the three axioms on all (or subsampled) pairs/triples of ``sample``.

    Reported violations:

    * identity  -- largest coordinate disagreement among pairs whose distance
      is <= tol (distance zero must imply equal points; a positive
      self-distance is *not* a violation),
    * symmetry  -- max |delta(x, y) - delta(y, x)| with both orders evaluated
      as written,
    * triangle  -- max positive excess delta(x, z) - delta(x, y) - delta(y, z).

    ``passed`` is true iff all three are <= tol.  When the pair/triple count
    exceeds the caps, a seeded subsample is drawn instead.
    """
    if tol < 0:
        raise InputError("tol must be >= 0")
    pts = as_points(spec, sample)
    n = pts.shape[0]
    rng = np.random.default_rng(seed)

    pi, pj = _index_pairs(n, max_pairs, rng)
    d_ij = _delta_pairs_raw(spec, pts[pi], pts[pj])
    d_ji = _delta_pairs_raw(spec, pts[pj], pts[pi])

    sym = np.abs(d_ij - d_ji)
    symmetry_violation = float(sym.max()) if sym.size else 0.0
    symmetry_witness = None
    if symmetry_violation > tol:
        w = int(np.argmax(sym))
        symmetry_witness = _witness(spec, pts, pi[w], pj[w])

    close = d_ij <= tol
    identity_violation = 0.0
    identity_witness = None
    if np.any(close):
        coord_gap = np.abs(pts[pi[close]] - pts[pj[close]]).max(axis=1)
        identity_violation = float(coord_gap.max())
        if identity_violation > tol:
            w = int(np.argmax(coord_gap))
            sel = np.flatnonzero(close)[w]
            identity_witness = _witness(spec, pts, pi[sel], pj[sel])
        else:
            identity_violation = 0.0

    ti, tj, tk = _index_triples(n, max_triples, rng)
    excess = (
        _delta_pairs_raw(spec, pts[ti], pts[tk])
        - _delta_pairs_raw(spec, pts[ti], pts[tj])
        - _delta_pairs_raw(spec, pts[tj], pts[tk])
    )
    triangle_violation = float(max(excess.max(), 0.0)) if excess.size else 0.0
    triangle_witness = None
    if triangle_violation > tol:
        w = int(np.argmax(excess))
        triangle_witness = _witness(spec, pts, ti[w], tj[w], tk[w])

    passed = (
        identity_violation <= tol
        and symmetry_violation <= tol
        and triangle_violation <= tol
    )
    return AxiomReport(
        n_points=n,
        n_pairs=int(pi.shape[0]),
        n_triples=int(ti.shape[0]),
        identity_violation=identity_violation,
        symmetry_violation=symmetry_violation,
        triangle_violation=triangle_violation,
        identity_witness=identity_witness,
        symmetry_witness=symmetry_witness,
        triangle_witness=triangle_witness,
        tol=float(tol),
        passed=passed,
    )
