"""Acceptance suite: one test per criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings.  Tolerances are fixed here, not tuned at runtime.
"""

import time

import numpy as np

import dislofract as df
from conftest import (
    CANTOR_SNAP,
    SIERPINSKI_SNAP,
    SIN60,
    THIRD,
    make_absmax_halving,
    make_cantor,
    make_sierpinski,
    random_compact,
)
from test_gifs import brute_rational_terms


def fc(pts):
    return df.FiniteCompact(pts)


class _Timer:
    def __init__(self, number, name, limit):
        self.number, self.name, self.limit = number, name, limit

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        status = "PASS" if exc_type is None else "FAIL"
        print(f"criterion {self.number} [{self.name}]: {status} ({elapsed:.2f}s, limit {self.limit:.0f}s)")
        if exc_type is None:
            assert elapsed < self.limit, f"criterion {self.number} exceeded {self.limit}s"


def test_criterion_1_metric_axioms(paper_table):
    with _Timer(1, "metric axioms", 1.0):
        report = df.verify_axioms(paper_table, [[0], [1], [2]], tol=0.0)
        assert report.passed

        rng = np.random.default_rng(1001)
        sample = rng.random((300, 1))
        for a, b in ((1.0, 0.0), (0.0, 1.0), (2.0, 4.0)):
            spec = df.DislocatedMetricSpec.absmax(a, b)
            rep = df.verify_axioms(spec, sample, tol=1e-12, max_triples=10**4)
            assert rep.n_triples == 10**4
            assert rep.passed, (a, b, rep)


def test_criterion_2_hausdorff_laws():
    with _Timer(2, "Hausdorff laws + accelerated oracle", 10.0):
        specs = (
            df.DislocatedMetricSpec.absmax(2.0, 4.0),
            df.DislocatedMetricSpec.euclidean(1.0, 0.5, 2),
        )
        rng = np.random.default_rng(1002)
        for spec in specs:
            d = spec.dimension
            for _ in range(250):
                r = random_compact(rng, 64, d)
                s = random_compact(rng, 64, d)
                t = random_compact(rng, 64, d)
                h_rs = df.hausdorff_distance(spec, r, s)
                assert h_rs == df.hausdorff_distance(spec, s, r)
                assert df.hausdorff_distance(spec, r, t) <= (
                    h_rs + df.hausdorff_distance(spec, s, t) + 1e-9)
                assert df.sigma(spec, r, s.union(t)) <= df.sigma(spec, r, s)
                assert df.sigma(spec, r.union(s), t) == max(
                    df.sigma(spec, r, t), df.sigma(spec, s, t))
                u, v = random_compact(rng, 64, d), random_compact(rng, 64, d)
                assert df.hausdorff_distance(spec, r.union(s), u.union(v)) <= max(
                    df.hausdorff_distance(spec, r, u),
                    df.hausdorff_distance(spec, s, v)) + 1e-9

        pair_specs = (
            df.DislocatedMetricSpec.absmax(2.0, 4.0),
            df.DislocatedMetricSpec.euclidean(1.0, 0.3, 2),
        )
        for spec in pair_specs:
            d = spec.dimension
            for _ in range(100):
                r = random_compact(rng, 512, d)
                s = random_compact(rng, 512, d)
                assert abs(df.hausdorff_accelerated(spec, r, s)
                           - df.hausdorff_distance(spec, r, s)) <= 1e-9


def test_criterion_3_contraction_lift():
    with _Timer(3, "contraction lift", 10.0):
        systems = (make_cantor(), make_sierpinski(), make_absmax_halving())
        rng = np.random.default_rng(1003)
        for sys in systems:
            d = sys.dimension
            for _ in range(200):
                u = random_compact(rng, 64, d)
                v = random_compact(rng, 64, d)
                lhs = df.hausdorff_distance(
                    sys.metric,
                    df.hutchinson_T(sys, u, snap=None),
                    df.hutchinson_S(sys, v, snap=None))
                assert lhs <= sys.alpha_star * df.hausdorff_distance(
                    sys.metric, u, v) + 1e-9


def _cantor_run():
    sys = make_cantor(snap=CANTOR_SNAP)
    trace = df.iterate_to_attractor(sys, fc([0.0]), tol=1e-6, max_iter=64)
    return sys, trace


def test_criterion_4_geometric_convergence():
    with _Timer(4, "geometric convergence", 30.0):
        sys, trace = _cantor_run()
        assert trace.converged
        succ = [s.successive_distance for s in trace.steps]
        d0 = succ[0]
        checked = 0
        for n, s in enumerate(succ):
            if s <= 2 * CANTOR_SNAP:
                break  # the lattice floor; geometric decay ends here
            assert s <= THIRD ** n * d0 + 1e-6, (n, s)
            checked += 1
        assert checked >= 5
        assert trace.fixed_residual_T <= 2 * CANTOR_SNAP
        assert trace.fixed_residual_S <= 2 * CANTOR_SNAP
        gap = df.uniqueness_probe(sys, fc([0.0]), fc([1.0]), tol=1e-6)
        assert gap <= 4 * CANTOR_SNAP


def test_criterion_5_dislocated_fixed_set():
    with _Timer(5, "dislocated fixed set", 5.0):
        sys = make_absmax_halving(snap=1e-5)
        trace = df.iterate_to_attractor(sys, fc([1.0]), tol=1e-5, max_iter=64)
        assert trace.converged
        assert df.hausdorff_distance(sys.metric, trace.attractor, fc([0.0])) <= 1e-4
        assert trace.self_distance <= 1e-4


def _collage_targets(attractor):
    rng = np.random.default_rng(1006)
    jitter1 = np.clip(attractor.points + rng.uniform(-0.01, 0.01, attractor.points.shape), 0, 1)
    jitter2 = np.clip(attractor.points + rng.uniform(-0.002, 0.002, attractor.points.shape), 0, 1)
    return (
        attractor,
        fc([0.0, 1.0]),
        fc(np.linspace(0.0, 1.0, 1025)),
        fc(jitter1),
        fc(jitter2),
    )


def _fit_cantor(budget, seed=0):
    family = df.CollageFamily(
        metric=df.DislocatedMetricSpec.absmax(1.0, 0.0),
        f_templates=(
            df.MapTemplate(matrix=((THIRD,),), translation=((0.0, 1.0),)),
            df.MapTemplate(matrix=((THIRD,),), translation=((0.0, 1.0),)),
        ),
        alpha_max=0.9)
    sys = make_cantor()
    target = df.iterate_to_attractor(sys, fc([0.0]), tol=1e-6, max_iter=64).attractor
    return df.collage_fit(target, family, budget=budget, tol=1e-6,
                          snap=CANTOR_SNAP, seed=seed)


def test_criterion_6_collage_certificates():
    with _Timer(6, "collage certificates + fit", 60.0):
        sys, trace = _cantor_run()
        tol = 1e-6
        for target in _collage_targets(trace.attractor):
            cert = df.collage_certificate(sys, target, tol=tol, snap=CANTOR_SNAP)
            assert cert.measured_error <= cert.epsilon / (1 - cert.alpha) + 2 * tol + 2 * CANTOR_SNAP

        fitted, cert = _fit_cantor(budget=2000)
        ts = sorted(float(m.translation[0]) for m in fitted.f_maps)
        assert abs(ts[0] - 0.0) <= 0.02
        assert abs(ts[1] - 2.0 / 3.0) <= 0.02


def test_criterion_7_wellposedness():
    with _Timer(7, "well-posedness", 30.0):
        for sys, snap in ((make_cantor(), CANTOR_SNAP),
                          (make_sierpinski(), SIERPINSKI_SNAP)):
            report = df.wellposedness_check(
                sys, df.halving_scales(0.1, 5, seed=21), tol=1e-6, snap=snap)
            assert report.verdict
            for rt, dist in zip(report.residuals_T, report.distances_to_attractor):
                assert dist <= rt / (1.0 - sys.alpha_star) + 4 * snap


def test_criterion_8_rational_functional():
    with _Timer(8, "rational functional oracle", 10.0):
        sys = make_cantor()
        rng = np.random.default_rng(1008)
        for _ in range(100):
            u = random_compact(rng, 12, 1)
            v = random_compact(rng, 12, 1)
            oracle = max(brute_rational_terms(sys, u, v, snap=CANTOR_SNAP))
            assert abs(df.rational_functional(sys, u, v) - oracle) <= 1e-9

        trace = df.iterate_to_attractor(sys, fc([0.0]), tol=1e-6, max_iter=64)
        assert df.rational_functional(sys, trace.attractor, trace.attractor) <= 2 * CANTOR_SNAP


def test_criterion_9_determinism():
    with _Timer(9, "determinism", 120.0):
        from dislofract.cloudio import format_cloud

        def run4():
            sys, trace = _cantor_run()
            gap = df.uniqueness_probe(sys, fc([0.0]), fc([1.0]), tol=1e-6)
            return (format_cloud(trace.attractor.points)
                    + trace.table() + repr(gap)).encode()

        def run6():
            sys, trace = _cantor_run()
            parts = []
            for target in _collage_targets(trace.attractor):
                parts.append(df.collage_certificate(
                    sys, target, tol=1e-6, snap=CANTOR_SNAP).to_text())
            fitted, cert = _fit_cantor(budget=2000)
            parts.append(cert.to_text())
            parts.append(repr([m.translation.tolist() for m in fitted.f_maps]))
            return "".join(parts).encode()

        assert run4() == run4()
        assert run6() == run6()
