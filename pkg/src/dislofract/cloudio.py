"""Point-cloud text files, portable graymap rasters, and atomic writes.

Cloud format: a header line ``dimension count`` followed by one point per
line, whitespace-separated coordinates.  Floats are written with repr (the
shortest round-tripping form), so identical inputs always produce identical
bytes.

Rasters are plain PGM: binary P5 is written (maxval 255, lit pixels 255);
both P2 and P5 are read back.  A raster turns into a cloud by taking every
pixel above a threshold as a lattice point on the image grid, with the y
axis flipped so the geometry reads upward.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np

from .errors import InputError


def atomic_write_bytes(path, data: bytes) -> None:
    """Write via a temp file in the same directory, then rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


# -- cloud text ---------------------------------------------------------------


def format_cloud(points) -> str:
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise InputError("cloud must be a nonempty (n, d) array")
    lines = [f"{arr.shape[1]} {arr.shape[0]}"]
    for row in arr:
        lines.append(" ".join(repr(float(c)) for c in row))
    return "\n".join(lines) + "\n"


def write_cloud(path, points) -> None:
    atomic_write_text(path, format_cloud(points))


def parse_cloud(text: str, source: str = "<cloud>") -> np.ndarray:
    lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
    if not lines:
        raise InputError(f"{source}: empty cloud file")
    head = lines[0].split()
    if len(head) != 2:
        raise InputError(f"{source}: header must be 'dimension count'")
    try:
        dim, count = int(head[0]), int(head[1])
    except ValueError:
        raise InputError(f"{source}: header must be two integers") from None
    if dim < 1 or count < 1:
        raise InputError(f"{source}: dimension and count must be positive")
    if len(lines) - 1 != count:
        raise InputError(f"{source}: header promises {count} points, found {len(lines) - 1}")
    try:
        arr = np.array([[float(tok) for tok in ln.split()] for ln in lines[1:]])
    except ValueError:
        raise InputError(f"{source}: malformed coordinate") from None
    if arr.shape != (count, dim):
        raise InputError(f"{source}: rows do not all have {dim} coordinates")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{source}: coordinates must be finite")
    return arr


def read_cloud(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_cloud(fh.read(), source=str(path))


# -- rasters ------------------------------------------------------------------


def render_cloud(points, width: int, height: int) -> np.ndarray:
    """Rasterize a 1-D or 2-D cloud to a (height, width) uint8 image.

    Points are scaled to the pixel grid from their bounding box; a
    degenerate extent collapses to the center row/column.  Lit pixels
    are 255 on a 0 background.
    """
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.shape[0] == 0:
        raise InputError("cannot render an empty cloud")
    if arr.shape[1] == 1:
        arr = np.column_stack([arr[:, 0], np.zeros(arr.shape[0])])
    if arr.shape[1] != 2:
        raise InputError("rendering supports 1-D and 2-D clouds only")
    if width < 1 or height < 1:
        raise InputError("raster size must be positive")

    img = np.zeros((height, width), dtype=np.uint8)
    mins = arr.min(axis=0)
    extent = arr.max(axis=0) - mins
    cols = (
        np.round((arr[:, 0] - mins[0]) / extent[0] * (width - 1)).astype(int)
        if extent[0] > 0 else np.full(arr.shape[0], (width - 1) // 2)
    )
    rows_up = (
        np.round((arr[:, 1] - mins[1]) / extent[1] * (height - 1)).astype(int)
        if extent[1] > 0 else np.full(arr.shape[0], (height - 1) // 2)
    )
    img[(height - 1) - rows_up, cols] = 255
    return img


def format_pgm(img: np.ndarray) -> bytes:
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise InputError("raster must be a 2-D array")
    arr = arr.astype(np.uint8)
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    return header + arr.tobytes()


def write_pgm(path, img: np.ndarray) -> None:
    atomic_write_bytes(path, format_pgm(img))


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_pgm(data, source=str(path))


def _pgm_tokens(data: bytes, need: int):
    """First ``need`` whitespace-separated header tokens, skipping # comments."""
    tokens = []
    i = 0
    while len(tokens) < need and i < len(data):
        c = data[i:i + 1]
        if c.isspace():
            i += 1
            continue
        if c == b"#":
            while i < len(data) and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < len(data) and not data[j:j + 1].isspace():
            j += 1
        tokens.append(data[i:j])
        i = j
    return tokens, i


def parse_pgm(data: bytes, source: str = "<pgm>") -> np.ndarray:
    if len(data) < 2 or data[:2] not in (b"P2", b"P5"):
        raise InputError(f"{source}: not a P2/P5 portable graymap")
    kind = data[:2]
    tokens, pos = _pgm_tokens(data[2:], 3)
    if len(tokens) < 3:
        raise InputError(f"{source}: truncated PGM header")
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise InputError(f"{source}: malformed PGM header") from None
    if width < 1 or height < 1 or not (0 < maxval < 65536):
        raise InputError(f"{source}: bad PGM dimensions")
    if kind == b"P5":
        payload = data[2 + pos + 1:]  # single whitespace byte after maxval
        if maxval > 255:
            raise InputError(f"{source}: 16-bit P5 not supported")
        if len(payload) < width * height:
            raise InputError(f"{source}: truncated P5 payload")
        arr = np.frombuffer(payload[: width * height], dtype=np.uint8)
    else:
        try:
            vals = [int(t) for t in data[2:].split()[3:]]
        except ValueError:
            raise InputError(f"{source}: malformed P2 payload") from None
        if len(vals) != width * height:
            raise InputError(f"{source}: P2 payload has {len(vals)} values, "
                             f"expected {width * height}")
        arr = np.asarray(vals)
    return arr.reshape(height, width)


def cloud_from_raster(img: np.ndarray, threshold: int = 0) -> np.ndarray:
    """Pixels above ``threshold`` as 2-D lattice points (x right, y up)."""
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise InputError("raster must be a 2-D array")
    rows, cols = np.nonzero(arr > threshold)
    if rows.size == 0:
        raise InputError("raster has no lit pixels above the threshold")
    height = arr.shape[0]
    return np.column_stack([cols.astype(float), (height - 1 - rows).astype(float)])
