"""Parsing and validation of system documents."""

import numpy as np
import pytest

import dislofract as df
from dislofract.cloudio import write_cloud


MINIMAL = """
[metric]
kind = "euclidean"
a = 1.0
b = 0.5
dimension = 2
"""


def test_metric_only_document():
    doc = df.parse_document(MINIMAL)
    assert doc.metric.kind == "euclidean"
    assert doc.metric.dimension == 2
    assert doc.system is None
    with pytest.raises(df.DocumentError):
        doc.require_system()


def test_full_document_with_g_maps():
    text = """
[metric]
kind = "absmax"
a = 2.0
b = 4.0

[maps]
alphas = [0.625]

[[maps.f]]
matrix = [[0.25]]
translation = [0.0]

[[maps.g]]
matrix = [[0.5]]
translation = [0.0]

[run]
tol = 1e-5
max_iter = 40
snap = 1e-5
seed_points = [[1.0]]
"""
    doc = df.parse_document(text)
    sys = doc.require_system()
    assert sys.f_maps[0].matrix[0, 0] == 0.25
    assert sys.g_maps[0].matrix[0, 0] == 0.5
    assert sys.alpha_star == 0.625
    assert doc.tol == 1e-5 and doc.max_iter == 40 and doc.snap == 1e-5
    assert np.array_equal(doc.seed_set().points, [[1.0]])


def test_g_defaults_to_f():
    text = """
[metric]
kind = "absmax"
a = 1.0
b = 0.0

[maps]
alphas = [0.5]

[[maps.f]]
matrix = [[0.5]]
translation = [0.0]
"""
    sys = df.parse_document(text).require_system()
    assert sys.f_maps == sys.g_maps


def test_seed_file_resolves_relative_to_document(tmp_path):
    write_cloud(tmp_path / "b0.cloud", np.array([[0.25], [0.5]]))
    p = tmp_path / "doc.toml"
    p.write_text("""
[metric]
kind = "absmax"
a = 1.0
b = 0.0

[maps]
alphas = [0.5]

[[maps.f]]
matrix = [[0.5]]
translation = [0.0]

[run]
seed_file = "b0.cloud"
""")
    doc = df.load_document(p)
    assert len(doc.seed_set()) == 2


@pytest.mark.parametrize("mutation, fragment", [
    ("missing-kind", "[metric]\na = 1.0\nb = 0.0"),
    ("bad-kind", "[metric]\nkind = \"banana\"\na = 1.0\nb = 0.0"),
    ("bad-alpha", None),
    ("alpha-count", None),
    ("g-count", None),
])
def test_located_errors(mutation, fragment):
    if fragment is not None:
        with pytest.raises(df.DocumentError) as info:
            df.parse_document(fragment, source="doc.toml")
        assert "doc.toml" in str(info.value)
        assert "metric" in str(info.value)
        return
    base = """
[metric]
kind = "absmax"
a = 1.0
b = 0.0

[maps]
alphas = {alphas}

[[maps.f]]
matrix = [[0.5]]
translation = [0.0]
{extra}
"""
    if mutation == "bad-alpha":
        text = base.format(alphas="[1.5]", extra="")
    elif mutation == "alpha-count":
        text = base.format(alphas="[0.5, 0.5]", extra="")
    else:
        text = base.format(
            alphas="[0.5]",
            extra="\n[[maps.g]]\nmatrix = [[0.5]]\ntranslation = [0.0]\n"
                  "\n[[maps.g]]\nmatrix = [[0.5]]\ntranslation = [0.0]\n")
    with pytest.raises(df.DocumentError) as info:
        df.parse_document(text, source="doc.toml")
    assert "maps" in str(info.value)


def test_run_section_validation():
    bad_tol = MINIMAL + "\n[run]\ntol = -1.0\n"
    with pytest.raises(df.DocumentError, match="tol"):
        df.parse_document(bad_tol)
    bad_snap = MINIMAL + "\n[run]\nsnap = 0.0\n"
    with pytest.raises(df.DocumentError, match="snap"):
        df.parse_document(bad_snap)


def test_fit_section():
    text = """
[metric]
kind = "absmax"
a = 1.0
b = 0.0

[fit]
budget = 50
alpha_max = 0.8

[[fit.maps]]
matrix = [[0.5]]
translation = [{range = [0.0, 1.0]}]
"""
    doc = df.parse_document(text)
    assert doc.fit_budget == 50
    assert doc.fit_family.alpha_max == 0.8
    assert doc.fit_family.f_templates[0].translation[0] == (0.0, 1.0)
    with pytest.raises(df.DocumentError, match="range"):
        df.parse_document(text.replace("[0.0, 1.0]", "[0.0]"))


def test_effective_snap_defaults_to_box_fraction():
    text = """
[metric]
kind = "absmax"
a = 1.0
b = 0.0

[maps]
alphas = [0.5]

[[maps.f]]
matrix = [[0.5]]
translation = [0.0]
"""
    doc = df.parse_document(text)
    seed = df.FiniteCompact([0.0])
    assert doc.effective_snap(seed) == pytest.approx(1.0 / 512.0)
