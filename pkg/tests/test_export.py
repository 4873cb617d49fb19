import csv
import io
import json
import re

import numpy as np
import pytest

from kloostpath.export import (SVG_DECIMATE_ABOVE, export_path, stream_csv,
                               vertices_from_json, write_svg)
from kloostpath.modring import PrimePowerModulus
from kloostpath.paths import path_vertices, rearranged_vertices


@pytest.fixture(scope="module")
def path():
    return path_vertices(PrimePowerModulus(3, 5), 1, 1)


def test_csv_rows(path):
    rows = list(csv.reader(io.StringIO(export_path(path, "csv").decode())))
    assert rows[0] == ["index", "re", "im"]
    assert len(rows) - 1 == path.modulus.phi
    assert [int(r[0]) for r in rows[1:]] == list(range(path.modulus.phi))
    back = np.array([float(r[1]) + 1j * float(r[2]) for r in rows[1:]])
    assert np.abs(back - path.vertices).max() < 1e-11


def test_stream_csv_matches(path):
    buf = io.StringIO()
    chunks = np.array_split(path.vertices, 7)
    assert stream_csv(chunks, buf) == len(path)
    assert buf.getvalue().encode() == export_path(path, "csv")


def test_json_round_trip(path):
    doc = json.loads(export_path(path, "json"))
    assert (doc["p"], doc["n"], doc["a"], doc["b"], doc["variant"]) == (3, 5, 1, 1, "standard")
    assert np.array_equal(vertices_from_json(doc), path.vertices)


def test_json_rearranged_variant():
    r = rearranged_vertices(PrimePowerModulus(5, 3), 1, 1)
    doc = json.loads(export_path(r, "json"))
    assert doc["variant"] == "rearranged" and len(doc["vertices"]) == 20


def _points(svg: str) -> np.ndarray:
    pts = re.search(r'points="([^"]*)"', svg).group(1).split()
    return np.array([[float(v) for v in p.split(",")] for p in pts])


def test_svg_structure(path):
    svg = export_path(path, "svg").decode()
    assert svg.count("<polyline") == 1
    assert 'viewBox="' in svg and "<svg" in svg and svg.rstrip().endswith("</svg>")
    pts = _points(svg)
    assert len(pts) == len(path)
    # the y axis is flipped so that the imaginary part points up
    assert np.allclose(pts[:, 0], path.vertices.real, atol=1e-11)
    assert np.allclose(pts[:, 1], -path.vertices.imag, atol=1e-11)
    vb = [float(v) for v in re.search(r'viewBox="([^"]*)"', svg).group(1).split()]
    assert vb[0] <= pts[:, 0].min() and vb[0] + vb[2] >= pts[:, 0].max()
    assert vb[1] <= pts[:, 1].min() and vb[1] + vb[3] >= pts[:, 1].max()


def test_svg_decimation():
    big = path_vertices(PrimePowerModulus(3, 12), 1, 1)
    assert len(big) > SVG_DECIMATE_ABOVE
    pts = _points(export_path(big, "svg").decode())
    assert len(pts) <= SVG_DECIMATE_ABOVE
    assert np.allclose(pts[-1], [big.endpoint.real, -big.endpoint.imag], atol=1e-11)
    buf = io.StringIO()
    write_svg(big, buf, decimate=False)
    assert len(_points(buf.getvalue())) == len(big)


def test_unknown_format(path):
    with pytest.raises(ValueError):
        export_path(path, "png")
