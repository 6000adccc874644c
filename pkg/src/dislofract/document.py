"""System documents: the declarative TOML format the CLI consumes.

A document has up to three sections.  ``[metric]`` is always required;
``[maps]`` and ``[run]`` are needed only by commands that iterate a system.

    [metric]
    kind = "absmax"            # absmax | euclidean | table
    a = 1.0
    b = 0.0
    # dimension = 2            # euclidean only (absmax/table are 1-D)
    # labels = ["a", "b"]      # table only
    # table = [[0.0, 1.0], [1.0, 0.5]]

    [maps]
    alphas = [0.3333333333333333, 0.3333333333333333]

    [[maps.f]]
    matrix = [[0.3333333333333333]]
    translation = [0.0]
    [[maps.f]]
    matrix = [[0.3333333333333333]]
    translation = [0.6666666666666666]
    # optional [[maps.g]] blocks; g defaults to f

    [run]
    tol = 1e-6
    max_iter = 200
    # snap = 0.00015241579027587258   # default: 2^-9 of the seed bbox diameter
    seed_points = [[0.0]]             # or seed_file = "b0.txt"
    # domain_lo = [0.0]
    # domain_hi = [1.0]
    # sample_seed = 0

    [fit]                      # only used by `collage --fit`
    budget = 1200
    alpha_max = 0.9
    [[fit.maps]]
    matrix = [[0.3333333333333333]]
    translation = [{range = [0.0, 1.0]}]

Parse failures raise DocumentError with the source file, section and key.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

try:
    import tomllib as _toml
except ModuleNotFoundError:  # Python 3.10
    import tomli as _toml

from .errors import DocumentError, InputError
from . import metric as _m
from .cloudio import read_cloud
from .collage import CollageFamily, MapTemplate
from .hausdorff import FiniteCompact, default_snap
from .gifs import AffineMapSpec, GifsSystem


@dataclass(frozen=True)
class SystemDocument:
    """Parsed document: metric spec, optional system, and run parameters."""

    source: str
    metric: _m.DislocatedMetricSpec
    system: GifsSystem | None
    tol: float
    max_iter: int
    snap: float | None
    seed_points: np.ndarray | None
    sample_seed: int
    fit_family: CollageFamily | None
    fit_budget: int | None

    def require_system(self) -> GifsSystem:
        if self.system is None:
            raise DocumentError("document has no [maps] section", source=self.source)
        return self.system

    def seed_set(self) -> FiniteCompact | None:
        if self.seed_points is None:
            return None
        return FiniteCompact(self.seed_points)

    def effective_snap(self, seed: FiniteCompact) -> float:
        """Document snap, or the default lattice derived from the seed region."""
        if self.snap is not None:
            return self.snap
        sys = self.system
        if sys is not None:
            box = np.vstack([sys.domain_lo, sys.domain_hi])
            return default_snap(np.vstack([box, seed.points]))
        return default_snap(seed.points)


def _want(table, key, types, source, section, required=False, default=None):
    if key not in table:
        if required:
            raise DocumentError("missing required key", source, section, key)
        return default
    val = table[key]
    # bool is an int subclass; never accept it where a number is wanted
    if not isinstance(val, types) or (isinstance(val, bool) and bool not in types):
        names = "/".join(t.__name__ for t in types)
        raise DocumentError(f"expected {names}, got {type(val).__name__}", source, section, key)
    return val


def _number(table, key, source, section, required=False, default=None):
    val = _want(table, key, (int, float), source, section, required, default)
    return None if val is None else float(val)


def _matrix(raw, source, section, key):
    if not isinstance(raw, list) or not raw or not all(isinstance(r, list) for r in raw):
        raise DocumentError("expected a list of rows", source, section, key)
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise DocumentError("matrix entries must be numbers", source, section, key) from None
    if arr.ndim != 2:
        raise DocumentError("rows must have equal length", source, section, key)
    return arr


def _vector(raw, source, section, key):
    if not isinstance(raw, list) or not raw:
        raise DocumentError("expected a list of numbers", source, section, key)
    try:
        return np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise DocumentError("entries must be numbers", source, section, key) from None


def _parse_metric(doc, source) -> _m.DislocatedMetricSpec:
    sec = doc.get("metric")
    if not isinstance(sec, dict):
        raise DocumentError("missing [metric] section", source=source)
    kind = _want(sec, "kind", (str,), source, "metric", required=True)
    try:
        if kind == _m.ABS_MAX:
            return _m.DislocatedMetricSpec.absmax(
                _number(sec, "a", source, "metric", required=True),
                _number(sec, "b", source, "metric", required=True))
        if kind == _m.EUCLIDEAN:
            dim = _want(sec, "dimension", (int,), source, "metric", required=True)
            return _m.DislocatedMetricSpec.euclidean(
                _number(sec, "a", source, "metric", required=True),
                _number(sec, "b", source, "metric", required=True), dim)
        if kind == _m.TABLE:
            labels = _want(sec, "labels", (list,), source, "metric", required=True)
            table = _matrix(_want(sec, "table", (list,), source, "metric", required=True),
                            source, "metric", "table")
            return _m.DislocatedMetricSpec.from_table(labels, table)
    except InputError as exc:
        raise DocumentError(str(exc), source, "metric") from exc
    raise DocumentError(f"unknown kind {kind!r}", source, "metric", "kind")


def _parse_map_list(entries, source, section) -> tuple[AffineMapSpec, ...]:
    if not isinstance(entries, list) or not entries:
        raise DocumentError("expected a nonempty array of map tables", source, section)
    maps = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise DocumentError(f"map {i} must be a table", source, section)
        mat = _matrix(entry.get("matrix"), source, section, f"map {i} matrix")
        vec = _vector(entry.get("translation"), source, section, f"map {i} translation")
        try:
            maps.append(AffineMapSpec(mat, vec))
        except InputError as exc:
            raise DocumentError(str(exc), source, section, f"map {i}") from exc
    return tuple(maps)


def _parse_system(doc, source, metric, run):
    sec = doc.get("maps")
    if sec is None:
        return None
    if not isinstance(sec, dict):
        raise DocumentError("[maps] must be a section", source=source)
    f_maps = _parse_map_list(sec.get("f"), source, "maps")
    g_raw = sec.get("g")
    g_maps = _parse_map_list(g_raw, source, "maps") if g_raw is not None else None
    alphas = _want(sec, "alphas", (list,), source, "maps", required=True)
    try:
        alphas = tuple(float(a) for a in alphas)
    except (TypeError, ValueError):
        raise DocumentError("alphas must be numbers", source, "maps", "alphas") from None
    if g_maps is not None and len(g_maps) != len(f_maps):
        raise DocumentError(
            f"f has {len(f_maps)} maps but g has {len(g_maps)}", source, "maps", "g")
    if len(alphas) != len(f_maps):
        raise DocumentError(
            f"{len(f_maps)} map pairs but {len(alphas)} alphas", source, "maps", "alphas")
    bad = [a for a in alphas if not (0.0 <= a < 1.0)]
    if bad:
        raise DocumentError(f"alpha {bad[0]!r} outside [0, 1)", source, "maps", "alphas")
    lo = run.get("domain_lo")
    hi = run.get("domain_hi")
    try:
        return GifsSystem(
            metric=metric, f_maps=f_maps,
            g_maps=g_maps if g_maps is not None else f_maps,
            alphas=alphas, snap=run.get("snap"),
            domain_lo=lo, domain_hi=hi)
    except InputError as exc:
        raise DocumentError(str(exc), source, "maps") from exc


def _parse_run(doc, source, base_dir):
    sec = doc.get("run", {})
    if not isinstance(sec, dict):
        raise DocumentError("[run] must be a section", source=source)
    out = {
        "tol": _number(sec, "tol", source, "run", default=1e-6),
        "max_iter": _want(sec, "max_iter", (int,), source, "run", default=200),
        "snap": _number(sec, "snap", source, "run"),
        "sample_seed": _want(sec, "sample_seed", (int,), source, "run", default=0),
    }
    if out["tol"] <= 0:
        raise DocumentError("tol must be positive", source, "run", "tol")
    if out["max_iter"] < 1:
        raise DocumentError("max_iter must be >= 1", source, "run", "max_iter")
    if out["snap"] is not None and out["snap"] <= 0:
        raise DocumentError("snap must be positive", source, "run", "snap")

    pts = None
    if "seed_points" in sec and "seed_file" in sec:
        raise DocumentError("give seed_points or seed_file, not both", source, "run")
    if "seed_points" in sec:
        pts = _matrix(sec["seed_points"], source, "run", "seed_points")
    elif "seed_file" in sec:
        rel = _want(sec, "seed_file", (str,), source, "run")
        pts = read_cloud(os.path.join(base_dir, rel))
    out["seed_points"] = pts
    for key in ("domain_lo", "domain_hi"):
        out[key] = _vector(sec[key], source, "run", key) if key in sec else None
    return out


def _template_entries(raw, source, section, key):
    if not isinstance(raw, list) or not raw:
        raise DocumentError("expected a list", source, section, key)
    out = []
    for v in raw:
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            out.append(float(v))
        elif isinstance(v, dict) and set(v) == {"range"}:
            rng = v["range"]
            if (not isinstance(rng, list) or len(rng) != 2
                    or not all(isinstance(x, (int, float)) for x in rng)):
                raise DocumentError("range must be [lo, hi]", source, section, key)
            out.append((float(rng[0]), float(rng[1])))
        else:
            raise DocumentError(
                "entries must be numbers or {range = [lo, hi]}", source, section, key)
    return out


def _parse_fit(doc, source, metric, run):
    sec = doc.get("fit")
    if sec is None:
        return None, None
    if not isinstance(sec, dict):
        raise DocumentError("[fit] must be a section", source=source)
    budget = _want(sec, "budget", (int,), source, "fit", default=1000)
    if budget < 1:
        raise DocumentError("budget must be >= 1", source, "fit", "budget")
    alpha_max = _number(sec, "alpha_max", source, "fit", default=0.95)
    entries = sec.get("maps")
    if not isinstance(entries, list) or not entries:
        raise DocumentError("need a nonempty [[fit.maps]] array", source, "fit", "maps")
    templates = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise DocumentError(f"template {i} must be a table", source, "fit")
        raw_m = entry.get("matrix")
        if not isinstance(raw_m, list) or not all(isinstance(r, list) for r in raw_m):
            raise DocumentError(f"template {i} matrix must be a list of rows", source, "fit")
        rows = tuple(tuple(_template_entries(r, source, "fit", f"template {i} matrix"))
                     for r in raw_m)
        trans = tuple(_template_entries(entry.get("translation"), source, "fit",
                                        f"template {i} translation"))
        try:
            templates.append(MapTemplate(matrix=rows, translation=trans))
        except InputError as exc:
            raise DocumentError(str(exc), source, "fit", f"template {i}") from exc
    alphas = sec.get("alphas")
    if alphas is not None:
        alphas = tuple(float(a) for a in alphas)
    try:
        family = CollageFamily(
            metric=metric, f_templates=tuple(templates), alphas=alphas,
            alpha_max=alpha_max,
            domain_lo=run.get("domain_lo"), domain_hi=run.get("domain_hi"))
    except InputError as exc:
        raise DocumentError(str(exc), source, "fit") from exc
    return family, budget


def parse_document(text: str, source: str = "<document>",
                   base_dir: str = ".") -> SystemDocument:
    try:
        doc = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise DocumentError(f"TOML parse error: {exc}", source=source) from exc
    metric = _parse_metric(doc, source)
    run = _parse_run(doc, source, base_dir)
    system = _parse_system(doc, source, metric, run)
    fit_family, fit_budget = _parse_fit(doc, source, metric, run)
    return SystemDocument(
        source=source,
        metric=metric,
        system=system,
        tol=run["tol"],
        max_iter=run["max_iter"],
        snap=run["snap"],
        seed_points=run["seed_points"],
        sample_seed=run["sample_seed"],
        fit_family=fit_family,
        fit_budget=fit_budget,
    )


def load_document(path) -> SystemDocument:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DocumentError(f"cannot read document: {exc}", source=str(path)) from exc
    return parse_document(text, source=str(path), base_dir=os.path.dirname(os.path.abspath(path)))
