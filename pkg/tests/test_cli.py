"""End-to-end command-line behavior: exit codes, files, determinism."""

import numpy as np
import pytest

import dislofract as df
from dislofract.cli import main
from dislofract.cloudio import read_pgm, write_cloud
from conftest import CANTOR_SNAP, THIRD, make_sierpinski

CANTOR_DOC = f"""
[metric]
kind = "absmax"
a = 1.0
b = 0.0

[maps]
alphas = [{THIRD!r}, {THIRD!r}]

[[maps.f]]
matrix = [[{THIRD!r}]]
translation = [0.0]

[[maps.f]]
matrix = [[{THIRD!r}]]
translation = [{2 / 3!r}]

[run]
tol = 1e-6
max_iter = 64
snap = {CANTOR_SNAP!r}
seed_points = [[0.0]]

[fit]
budget = 800
alpha_max = 0.9

[[fit.maps]]
matrix = [[{THIRD!r}]]
translation = [{{range = [0.0, 1.0]}}]

[[fit.maps]]
matrix = [[{THIRD!r}]]
translation = [{{range = [0.0, 1.0]}}]
"""

ABSMAX24_DOC = """
[metric]
kind = "absmax"
a = 2.0
b = 4.0
"""

TABLE_DOC = """
[metric]
kind = "table"
labels = ["a", "b", "c"]
table = [
  [0.0, 0.9, 0.7],
  [0.9, 1.0, 0.8],
  [0.7, 0.8, 0.6666666666666666],
]
"""

BROKEN_TABLE_DOC = """
[metric]
kind = "table"
labels = ["a", "b", "c"]
table = [
  [0.0, 5.0, 1.0],
  [5.0, 0.0, 1.0],
  [1.0, 1.0, 0.0],
]
"""

IDENTITY_DOC = """
[metric]
kind = "absmax"
a = 1.0
b = 0.0

[maps]
alphas = [0.9]

[[maps.f]]
matrix = [[1.0]]
translation = [0.0]

[run]
tol = 1e-6
max_iter = 16
seed_points = [[0.5]]
"""


@pytest.fixture
def docs(tmp_path):
    paths = {}
    for name, text in (
        ("cantor", CANTOR_DOC),
        ("absmax24", ABSMAX24_DOC),
        ("table", TABLE_DOC),
        ("broken", BROKEN_TABLE_DOC),
        ("identity", IDENTITY_DOC),
    ):
        p = tmp_path / f"{name}.toml"
        p.write_text(text)
        paths[name] = str(p)
    return paths


def test_check_metric_passes(docs, capsys):
    assert main(["check-metric", docs["table"]]) == 0
    assert "passed" in capsys.readouterr().out
    assert main(["check-metric", docs["cantor"]]) == 0


def test_check_metric_broken_table_exits_2(docs, capsys):
    assert main(["check-metric", docs["broken"]]) == 2
    err = capsys.readouterr().err
    assert "triangle" in err
    assert "a" in err and "b" in err and "c" in err


def test_parse_error_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[metric\nkind =")
    assert main(["check-metric", str(bad)]) == 2
    assert "input error" in capsys.readouterr().err
    assert main(["check-metric", str(tmp_path / "missing.toml")]) == 2


def test_attractor_pipeline(docs, tmp_path, capsys):
    out = tmp_path / "cantor.cloud"
    trace = tmp_path / "cantor.trace"
    assert main(["attractor", docs["cantor"], "-o", str(out), "--trace", str(trace)]) == 0
    printed = capsys.readouterr().out
    assert "converged = True" in printed

    pts = df.FiniteCompact(np.loadtxt(out, skiprows=1, ndmin=2))
    assert pts.points.min() >= 0.0 and pts.points.max() <= 1.0
    header = out.read_text().splitlines()[0].split()
    assert header[0] == "1" and int(header[1]) == len(pts)

    rows = trace.read_text().strip().splitlines()
    assert rows[0].startswith("n\toperator")
    # decay ratio ~ 1/3 between recorded steps above the lattice floor
    succ = [float(r.split("\t")[3]) for r in rows[1:]]
    for prev, cur in zip(succ, succ[1:]):
        if cur > 2 * CANTOR_SNAP:
            assert cur <= prev / 3 + 1e-9


def test_attractor_identity_doc_fails_contraction(docs, tmp_path, capsys):
    out = tmp_path / "x.cloud"
    assert main(["attractor", docs["identity"], "-o", str(out)]) == 1
    assert "contraction" in capsys.readouterr().err


def test_attractor_trace_format(docs, tmp_path):
    out = tmp_path / "trace.tsv"
    assert main(["attractor", docs["cantor"], "-o", str(out), "--format", "trace"]) == 0
    assert out.read_text().startswith("n\toperator")


def test_attractor_reruns_are_byte_identical(docs, tmp_path):
    a1, t1 = tmp_path / "a1", tmp_path / "t1"
    a2, t2 = tmp_path / "a2", tmp_path / "t2"
    assert main(["attractor", docs["cantor"], "-o", str(a1), "--trace", str(t1)]) == 0
    assert main(["attractor", docs["cantor"], "-o", str(a2), "--trace", str(t2)]) == 0
    assert a1.read_bytes() == a2.read_bytes()
    assert t1.read_bytes() == t2.read_bytes()


def test_distance_command(docs, tmp_path, capsys):
    za = tmp_path / "a.cloud"
    zb = tmp_path / "b.cloud"
    write_cloud(za, np.array([[0.0]]))
    write_cloud(zb, np.array([[1.0]]))
    assert main(["distance", docs["absmax24"], str(za), str(zb)]) == 0
    assert capsys.readouterr().out.strip() == "6.0"

    # identical files under a plain metric
    write_cloud(zb, np.array([[0.0]]))
    assert main(["distance", docs["cantor"], str(za), str(zb)]) == 0
    assert capsys.readouterr().out.strip() == "0.0"


def test_distance_exhaustive_flag_matches(docs, tmp_path, capsys):
    rng = np.random.default_rng(60)
    za = tmp_path / "ra.cloud"
    zb = tmp_path / "rb.cloud"
    write_cloud(za, rng.random((120, 1)))
    write_cloud(zb, rng.random((90, 1)))
    assert main(["distance", docs["absmax24"], str(za), str(zb)]) == 0
    fast = capsys.readouterr().out.strip()
    assert main(["distance", docs["absmax24"], str(za), str(zb), "--exhaustive"]) == 0
    slow = capsys.readouterr().out.strip()
    assert fast == slow


def test_collage_certificate_command(docs, tmp_path, capsys):
    cloud = tmp_path / "attr.cloud"
    cert_out = tmp_path / "cert.txt"
    assert main(["attractor", docs["cantor"], "-o", str(cloud)]) == 0
    capsys.readouterr()
    assert main(["collage", docs["cantor"], "--target", str(cloud),
                 "-o", str(cert_out)]) == 0
    text = cert_out.read_text()
    assert "epsilon" in text
    eps = float(text.splitlines()[0].split("=")[1])
    assert eps <= 2e-6 + 2 * CANTOR_SNAP


def test_collage_fit_command(docs, tmp_path, capsys):
    cloud = tmp_path / "attr.cloud"
    assert main(["attractor", docs["cantor"], "-o", str(cloud)]) == 0
    capsys.readouterr()
    assert main(["collage", docs["cantor"], "--target", str(cloud), "--fit"]) == 0
    out = capsys.readouterr().out
    trans = sorted(
        float(line.split("[")[1].rstrip("]\n ").strip())
        for line in out.splitlines() if "f_translation" in line)
    assert abs(trans[0] - 0.0) <= 0.02
    assert abs(trans[1] - 2 / 3) <= 0.02


def test_wellposed_command(docs, tmp_path, capsys):
    table_out = tmp_path / "wp.tsv"
    assert main(["wellposed", docs["cantor"], "-o", str(table_out)]) == 0
    out = capsys.readouterr().out
    assert "verdict = True" in out
    rows = table_out.read_text().strip().splitlines()
    assert rows[0] == "scale\tresidual_T\tresidual_S\tdistance\tbound"
    assert len(rows) == 6  # default five halving generations


def test_wellposed_identity_doc_reports_upstream_failure(docs, capsys):
    assert main(["wellposed", docs["identity"]]) == 1
    assert "contraction" in capsys.readouterr().err


def test_render_singleton(tmp_path, capsys):
    cloud = tmp_path / "one.cloud"
    out = tmp_path / "one.pgm"
    write_cloud(cloud, np.array([[0.3, 0.4]]))
    assert main(["render", str(cloud), str(out), "--width", "64", "--height", "32"]) == 0
    img = read_pgm(out)
    assert img.shape == (32, 64)
    assert (img > 0).sum() == 1
    row, col = map(int, np.argwhere(img > 0)[0])
    assert abs(row - 16) <= 1 and abs(col - 31) <= 1  # centered block


def test_render_sierpinski_structure(tmp_path):
    sys = make_sierpinski()
    trace = df.iterate_to_attractor(
        sys, df.FiniteCompact([[0.0, 0.0]]), tol=1e-4, max_iter=64)
    cloud = tmp_path / "tri.cloud"
    out = tmp_path / "tri.pgm"
    write_cloud(cloud, trace.attractor.points)
    assert main(["render", str(cloud), str(out), "--width", "512", "--height", "512"]) == 0
    img = read_pgm(out)

    # the two base copies hold twice the mass of the apex copy
    bottom = int((img[256:, :] > 0).sum())
    top = int((img[:256, :] > 0).sum())
    assert 1.5 <= bottom / top <= 2.8

    # the central inverted void contains no points at all
    rows = slice(int(512 * 0.54), int(512 * 0.70))
    cols = slice(int(512 * 0.43), int(512 * 0.57))
    assert (img[rows, cols] > 0).sum() == 0


def test_render_empty_cloud_exits_2(tmp_path, capsys):
    empty = tmp_path / "empty.cloud"
    empty.write_text("")
    out = tmp_path / "img.pgm"
    assert main(["render", str(empty), str(out), "--width", "8", "--height", "8"]) == 2
    assert "input error" in capsys.readouterr().err


def test_attractor_raster_format(docs, tmp_path):
    out = tmp_path / "c.pgm"
    assert main(["attractor", docs["cantor"], "-o", str(out),
                 "--format", "raster", "--width", "128", "--height", "16"]) == 0
    img = read_pgm(out)
    assert img.shape == (16, 128)
    assert (img > 0).any()
