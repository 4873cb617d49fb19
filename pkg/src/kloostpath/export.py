"""Writers for Kloosterman paths: CSV, JSON and SVG."""

from __future__ import annotations

import io
import json
from typing import IO, Iterable

import numpy as np

from .paths import KloostermanPath

SVG_DECIMATE_ABOVE = 100_000
FORMATS = ("csv", "json", "svg")


def _num(x: float) -> str:
    return f"{x:.12g}"


def write_csv(path: KloostermanPath, fh: IO[str]) -> None:
    fh.write("index,re,im\n")
    for j, z in enumerate(path.vertices):
        fh.write(f"{j},{_num(z.real)},{_num(z.imag)}\n")


def stream_csv(vertices: Iterable[np.ndarray], fh: IO[str]) -> int:
    """CSV writer for paths too long to hold in memory; ``vertices`` yields
    consecutive chunks of partial sums.  Returns the number of rows."""
    fh.write("index,re,im\n")
    j = 0
    for chunk in vertices:
        for z in chunk:
            fh.write(f"{j},{_num(z.real)},{_num(z.imag)}\n")
            j += 1
    return j


def path_to_json(path: KloostermanPath) -> dict:
    return {
        "p": path.modulus.p,
        "n": path.modulus.n,
        "a": int(path.a),
        "b": int(path.b),
        "variant": path.variant,
        "vertices": [[float(z.real), float(z.imag)] for z in path.vertices],
    }


def write_json(path: KloostermanPath, fh: IO[str]) -> None:
    json.dump(path_to_json(path), fh)


def vertices_from_json(doc: dict) -> np.ndarray:
    v = np.asarray(doc["vertices"], dtype=float).reshape(-1, 2)
    return v[:, 0] + 1j * v[:, 1]


def write_svg(path: KloostermanPath, fh: IO[str], decimate: bool = True,
              size: int = 800) -> None:
    """Single-polyline SVG with a viewBox fitted to the path.

    The y axis is flipped so the imaginary part points up.  Paths with more
    than ``SVG_DECIMATE_ABOVE`` vertices are thinned uniformly unless
    ``decimate=False``; the first and last vertices are always kept.
    """
    v = np.asarray(path.vertices)
    if decimate and len(v) > SVG_DECIMATE_ABOVE:
        keep = np.unique(np.linspace(0, len(v) - 1, SVG_DECIMATE_ABOVE).astype(np.int64))
        v = v[keep]
    x, y = v.real, -v.imag
    xmin, xmax, ymin, ymax = x.min(), x.max(), y.min(), y.max()
    span = max(xmax - xmin, ymax - ymin, 1e-9)
    pad = 0.05 * span
    vb = (xmin - pad, ymin - pad, xmax - xmin + 2 * pad, ymax - ymin + 2 * pad)
    stroke = span / 400
    pts = " ".join(f"{_num(a)},{_num(b)}" for a, b in zip(x, y))
    title = f"Kloosterman path p={path.modulus.p} n={path.modulus.n} a={path.a} b={path.b} ({path.variant})"
    fh.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    fh.write(f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" '
             f'height="{int(size * vb[3] / vb[2])}" viewBox="{" ".join(_num(c) for c in vb)}">\n')
    fh.write(f"<title>{title}</title>\n")
    fh.write(f'<polyline fill="none" stroke="black" stroke-width="{_num(stroke)}" '
             f'stroke-linejoin="round" points="{pts}"/>\n')
    fh.write("</svg>\n")


def export_path(path: KloostermanPath, fmt: str, **kw) -> bytes:
    """Serialize ``path`` in ``fmt`` (csv, json or svg) to UTF-8 bytes."""
    buf = io.StringIO()
    fmt = fmt.lower()
    if fmt == "csv":
        write_csv(path, buf)
    elif fmt == "json":
        write_json(path, buf)
    elif fmt == "svg":
        write_svg(path, buf, **kw)
    else:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    return buf.getvalue().encode()
