"""Per-row linear measurement of images, plus all file formats.

Images live on the unit scale: loading a PGM divides by maxval, writing
multiplies back, rounds to nearest and clamps. Measurements travel in a
small binary container (magic ``LSCS``) that stores the ensemble header
and the raw float64 payload; the sensing matrices themselves are never
stored, they are regenerated from the seed.
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass

import numpy as np

from .ensemble import SensingEnsemble, gaussian_row_matrix


class FormatError(ValueError):
    """Malformed or unsupported input file."""


@dataclass(frozen=True)
class Image:
    """A grayscale image as a row-major float64 array."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels, dtype=np.float64)
        if p.ndim != 2 or p.size == 0:
            raise ValueError("pixels must be a non-empty 2D array")
        object.__setattr__(self, "pixels", p)

    @property
    def n_row(self) -> int:
        return self.pixels.shape[0]

    @property
    def n_col(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class MeasurementSet:
    """Everything the decoder receives: the ensemble and the measurements."""

    ensemble: SensingEnsemble
    y: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        if y.shape != (self.ensemble.n_row, self.ensemble.m):
            raise ValueError(
                f"measurements must have shape ({self.ensemble.n_row}, {self.ensemble.m}), got {y.shape}"
            )
        object.__setattr__(self, "y", y)


def acquire(x: Image, m: int, master_seed: int) -> MeasurementSet:
    """Measure every row of ``x`` with its own seeded Gaussian matrix.

    Row i of the result is ``phi_i @ x_row_i`` with ``phi_i`` regenerable
    from (master_seed, i). Requires ``0 < m < n_col``.
    """
    ensemble = SensingEnsemble(master_seed, m, x.n_col, x.n_row)
    y = np.empty((x.n_row, m))
    for i in range(x.n_row):
        y[i] = gaussian_row_matrix(ensemble, i) @ x.pixels[i]
    return MeasurementSet(ensemble, y)


def _atomic_write(path: str, data: bytes) -> None:
    """Write via a temp file in the same directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


# ---------------------------------------------------------------------------
# PGM (portable graymap), P2 ascii / P5 binary, 8-bit


def _pgm_tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping # comments."""
    i = 0
    n = len(data)
    while i < n:
        c = data[i : i + 1]
        if c in b" \t\r\n\x0b\x0c":
            i += 1
        elif c == b"#":
            while i < n and data[i : i + 1] != b"\n":
                i += 1
        else:
            j = i
            while j < n and data[j : j + 1] not in b" \t\r\n\x0b\x0c#":
                j += 1
            yield i, data[i:j]
            i = j
    yield n, None


def load_pgm(path: str) -> Image:
    """Load an 8-bit P2 or P5 PGM and normalize pixels to [0, 1]."""
    with open(path, "rb") as f:
        data = f.read()

    toks = _pgm_tokens(data)
    try:
        _, magic = next(toks)
    except StopIteration:
        raise FormatError(f"{path}: empty file")
    if magic in (b"P3", b"P6"):
        raise FormatError(f"{path}: color images are not supported (grayscale PGM only)")
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"{path}: malformed header, expected P2 or P5 magic")

    header = []
    pos_after = None
    for pos, tok in toks:
        if tok is None:
            break
        header.append(tok)
        if len(header) == 3:
            pos_after = pos + len(tok)
            break
    if len(header) < 3:
        raise FormatError(f"{path}: malformed header, missing dimensions or maxval")
    try:
        width, height, maxval = (int(t) for t in header)
    except ValueError:
        raise FormatError(f"{path}: malformed header, non-numeric field")
    if width < 1 or height < 1:
        raise FormatError(f"{path}: malformed header, non-positive dimensions")
    if maxval > 255:
        raise FormatError(f"{path}: unsupported maxval {maxval} (only 8-bit, maxval <= 255)")
    if maxval < 1:
        raise FormatError(f"{path}: malformed header, maxval must be >= 1")

    if magic == b"P5":
        # exactly one whitespace byte separates maxval from the raster
        body = data[pos_after + 1 :]
        expected = width * height
        if len(body) < expected:
            raise FormatError(f"{path}: truncated data ({len(body)} of {expected} bytes)")
        if len(body) > expected:
            raise FormatError(f"{path}: trailing data after pixel raster")
        raster = np.frombuffer(body, dtype=np.uint8).astype(np.float64)
    else:
        values = []
        for _, tok in _pgm_tokens(data[pos_after:]):
            if tok is None:
                break
            try:
                values.append(int(tok))
            except ValueError:
                raise FormatError(f"{path}: non-numeric pixel value {tok!r}")
        expected = width * height
        if len(values) < expected:
            raise FormatError(f"{path}: truncated data ({len(values)} of {expected} values)")
        if len(values) > expected:
            raise FormatError(f"{path}: trailing data after pixel raster")
        raster = np.asarray(values, dtype=np.float64)
        if raster.min() < 0 or raster.max() > maxval:
            raise FormatError(f"{path}: pixel value out of range [0, {maxval}]")

    pixels = raster.reshape(height, width) / maxval
    return Image(pixels)


def write_pgm(image: Image, path: str, binary: bool = True, maxval: int = 255) -> None:
    """Write an image as P5 (default) or P2, scaling [0,1] to [0, maxval].

    Values are rounded to nearest and clamped, so out-of-range estimates
    saturate rather than wrap. The file is written atomically.
    """
    if not 1 <= maxval <= 255:
        raise ValueError("maxval must be in [1, 255]")
    q = np.clip(np.rint(image.pixels * maxval), 0, maxval).astype(np.uint8)
    if binary:
        head = f"P5\n{image.n_col} {image.n_row}\n{maxval}\n".encode()
        _atomic_write(path, head + q.tobytes())
    else:
        lines = "\n".join(" ".join(str(v) for v in row) for row in q)
        _atomic_write(path, f"P2\n{image.n_col} {image.n_row}\n{maxval}\n{lines}\n".encode())


# ---------------------------------------------------------------------------
# Measurement container, little-endian:
#   magic "LSCS" | version u16 | reserved u16 | master_seed u64
#   | n_row u32 | n_col u32 | m u32 | n_row*m float64 row-major

_MAGIC = b"LSCS"
_VERSION = 1
_HEADER = struct.Struct("<4sHHQIII")


def write_measurements(ms: MeasurementSet, path: str) -> None:
    """Serialize to the LSCS container; the round trip is bit-identical."""
    e = ms.ensemble
    head = _HEADER.pack(_MAGIC, _VERSION, 0, e.master_seed, e.n_row, e.n_col, e.m)
    payload = np.ascontiguousarray(ms.y, dtype="<f8").tobytes()
    _atomic_write(path, head + payload)


def read_measurements(path: str) -> MeasurementSet:
    """Parse an LSCS container, validating header and payload."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, _reserved, seed, n_row, n_col, m = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != _VERSION:
        raise FormatError(f"{path}: version mismatch (got {version}, expected {_VERSION})")
    try:
        ensemble = SensingEnsemble(seed, m, n_col, n_row)
    except ValueError as exc:
        raise FormatError(f"{path}: invalid dimensions: {exc}")
    expected = n_row * m * 8
    actual = len(data) - _HEADER.size
    if actual != expected:
        raise FormatError(
            f"{path}: payload-length mismatch (got {actual} bytes, expected {expected})"
        )
    y = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(n_row, m)
    if np.isnan(y).any():
        raise FormatError(f"{path}: NaN in payload")
    return MeasurementSet(ensemble, y.copy())
