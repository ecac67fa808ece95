"""On-disk formats: portable anymaps, the NVOX voxel container, palettes and k text.

Images are held as numpy arrays in file order (row 0 is the top row).  Bitmaps
are ``(height, width)`` bool arrays where True is a painted (black) pixel;
pixmaps are ``(height, width, 3)`` uint8 arrays.
"""

from __future__ import annotations

import re
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codec import ColorField, GridParams, ParamError, make_params


class FormatError(ValueError):
    """Base class for every parse or emit failure in this module."""


class MalformedHeader(FormatError):
    pass


class TruncatedPayload(FormatError):
    pass


class UnsupportedMaxval(FormatError):
    pass


class BadMagic(FormatError):
    pass


class VersionMismatch(FormatError):
    pass


class PayloadLengthMismatch(FormatError):
    pass


class ValueOutOfRange(FormatError):
    pass


class UnknownColor(FormatError):
    """Pixel colour missing from the palette; ``x, y`` are cell coordinates (y upward)."""

    def __init__(self, rgb, x, y, file_row):
        self.rgb = tuple(int(c) for c in rgb)
        self.x, self.y = x, y
        super().__init__(f"pixel at cell ({x}, {y}) (file row {file_row}) has colour {self.rgb} not in palette")


class DimensionMismatch(FormatError):
    pass


class InvalidNumber(FormatError):
    pass


# -- portable anymap -------------------------------------------------------

MAXVAL = 255
_PNM_KINDS = {b"P1": "P1", b"P3": "P3", b"P4": "P4", b"P6": "P6"}


@dataclass(frozen=True)
class PnmImage:
    kind: str
    pixels: np.ndarray

    @property
    def is_bitmap(self) -> bool:
        return self.kind in ("P1", "P4")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


class _Reader:
    """Cursor over an anymap header: whitespace-separated tokens, ``#`` comments."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def skip_space(self):
        data, n = self.data, len(self.data)
        while self.pos < n:
            c = data[self.pos]
            if c == 0x23:  # '#'
                end = data.find(b"\n", self.pos)
                self.pos = n if end < 0 else end + 1
            elif c in b" \t\r\n\v\f":
                self.pos += 1
            else:
                break

    def token(self, what: str) -> bytes:
        self.skip_space()
        start = self.pos
        data, n = self.data, len(self.data)
        while self.pos < n and data[self.pos] not in b" \t\r\n\v\f#":
            self.pos += 1
        if start == self.pos:
            raise MalformedHeader(f"missing {what}")
        return data[start:self.pos]

    def integer(self, what: str) -> int:
        tok = self.token(what)
        if not tok.isdigit() or len(tok) > 9:
            raise MalformedHeader(f"bad {what}: {tok[:20]!r}")
        return int(tok)


def parse_pnm(data: bytes) -> PnmImage:
    data = bytes(data)
    if len(data) < 2 or data[:2] not in _PNM_KINDS:
        raise MalformedHeader(f"not a P1/P3/P4/P6 anymap (magic {data[:2]!r})")
    kind = _PNM_KINDS[data[:2]]
    r = _Reader(data)
    r.pos = 2
    if r.pos < len(data) and data[r.pos] not in b" \t\r\n\v\f#":
        raise MalformedHeader("magic number must be followed by whitespace")
    width = r.integer("width")
    height = r.integer("height")
    if width < 1 or height < 1:
        raise MalformedHeader(f"image size {width}x{height} is empty")
    if kind in ("P3", "P6"):
        maxval = r.integer("maxval")
        if maxval != MAXVAL:
            raise UnsupportedMaxval(f"maxval {maxval} not supported (only {MAXVAL})")

    if kind == "P1":
        return PnmImage(kind, _read_plain_bits(r, width, height))
    if kind == "P3":
        return PnmImage(kind, _read_plain_rgb(r, width, height))

    # binary raster: exactly one whitespace byte after the last header field
    if r.pos >= len(data) or data[r.pos] not in b" \t\r\n\v\f":
        raise MalformedHeader("header must end with a single whitespace byte")
    body = memoryview(data)[r.pos + 1:]
    if kind == "P4":
        stride = (width + 7) // 8
        need = stride * height
        if len(body) < need:
            raise TruncatedPayload(f"P4 raster needs {need} bytes, found {len(body)}")
        rows = np.frombuffer(body[:need], dtype=np.uint8).reshape(height, stride)
        bits = np.unpackbits(rows, axis=1)[:, :width].astype(bool)
        return PnmImage(kind, bits)
    need = 3 * width * height
    if len(body) < need:
        raise TruncatedPayload(f"P6 raster needs {need} bytes, found {len(body)}")
    rgb = np.frombuffer(body[:need], dtype=np.uint8).reshape(height, width, 3).copy()
    return PnmImage(kind, rgb)


def _read_plain_bits(r: _Reader, width: int, height: int) -> np.ndarray:
    need = width * height
    if len(r.data) - r.pos < need:
        raise TruncatedPayload(f"P1 raster needs {need} pixels, input has {len(r.data) - r.pos} bytes left")
    out = np.zeros(need, dtype=bool)
    count = 0
    data, n = r.data, len(r.data)
    # plain PBM digits need not be separated by whitespace
    while count < need:
        r.skip_space()
        if r.pos >= n:
            raise TruncatedPayload(f"P1 raster needs {need} pixels, found {count}")
        c = data[r.pos]
        if c not in b"01":
            raise MalformedHeader(f"invalid P1 pixel byte {bytes([c])!r} at offset {r.pos}")
        out[count] = c == 0x31
        count += 1
        r.pos += 1
    return out.reshape(height, width)


def _read_plain_rgb(r: _Reader, width: int, height: int) -> np.ndarray:
    need = 3 * width * height
    if len(r.data) - r.pos < need:
        raise TruncatedPayload(f"P3 raster needs {need} samples, input has {len(r.data) - r.pos} bytes left")
    values = np.zeros(need, dtype=np.uint8)
    for i in range(need):
        r.skip_space()
        if r.pos >= len(r.data):
            raise TruncatedPayload(f"P3 raster needs {need} samples, found {i}")
        v = r.integer("sample")
        if v > MAXVAL:
            raise ValueOutOfRange(f"sample {v} exceeds maxval {MAXVAL}")
        values[i] = v
    return values.reshape(height, width, 3)


def emit_pnm(pixels: np.ndarray, kind: str | None = None) -> bytes:
    """Serialise a bitmap (2-D bool) or pixmap (H x W x 3 uint8).

    ``kind`` defaults to P4 for bitmaps and P6 for pixmaps.
    """
    pixels = np.asarray(pixels)
    bitmap = pixels.ndim == 2
    if kind is None:
        kind = "P4" if bitmap else "P6"
    if kind in ("P1", "P4") and not bitmap or kind in ("P3", "P6") and bitmap:
        raise FormatError(f"{kind} cannot hold an array of shape {pixels.shape}")
    if kind not in ("P1", "P3", "P4", "P6"):
        raise FormatError(f"unknown anymap kind {kind!r}")
    height, width = pixels.shape[:2]
    if kind == "P1":
        rows = ["".join("1" if v else "0" for v in row) for row in pixels.astype(bool)]
        return f"P1\n{width} {height}\n".encode() + "\n".join(rows).encode() + b"\n"
    if kind == "P4":
        body = np.packbits(pixels.astype(bool), axis=1).tobytes()
        return f"P4\n{width} {height}\n".encode() + body
    if pixels.dtype != np.uint8:
        if pixels.min() < 0 or pixels.max() > MAXVAL:
            raise ValueOutOfRange("pixmap samples must lie in 0..255")
        pixels = pixels.astype(np.uint8)
    if kind == "P3":
        lines = [" ".join(str(int(v)) for v in row.reshape(-1)) for row in pixels]
        return f"P3\n{width} {height}\n{MAXVAL}\n".encode() + "\n".join(lines).encode() + b"\n"
    return f"P6\n{width} {height}\n{MAXVAL}\n".encode() + pixels.tobytes()


# -- palettes --------------------------------------------------------------

_DEFAULT_COLORS = [
    (0, 0, 255),    # blue
    (255, 0, 0),    # red
    (0, 160, 0),    # green
    (0, 0, 0),
    (255, 160, 0),
    (160, 0, 200),
    (0, 200, 200),
    (128, 128, 128),
]


@dataclass(frozen=True)
class Palette:
    """RGB per colour index; ``entries[0]`` is the background."""

    entries: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        entries = tuple(tuple(int(c) for c in rgb) for rgb in self.entries)
        if len(entries) < 2:
            raise FormatError("palette needs a background and at least one colour")
        for rgb in entries:
            if len(rgb) != 3 or any(not 0 <= c <= 255 for c in rgb):
                raise ValueOutOfRange(f"bad RGB triple {rgb}")
        if len(set(entries)) != len(entries):
            raise FormatError("palette entries must be pairwise distinct")
        object.__setattr__(self, "entries", entries)

    @property
    def m(self) -> int:
        return len(self.entries) - 1

    @property
    def background(self):
        return self.entries[0]

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.uint8)

    @classmethod
    def default(cls, m: int) -> "Palette":
        """White background; blue, red, green first, then fixed extras, then greys."""
        if m == 1:
            return cls(((255, 255, 255), (0, 0, 0)))
        colors = list(_DEFAULT_COLORS[:m])
        step = 0
        while len(colors) < m:
            rgb = ((step * 37) % 250, (step * 91 + 7) % 250, (step * 53 + 13) % 250)
            step += 1
            if rgb not in colors and rgb != (255, 255, 255):
                colors.append(rgb)
        return cls(((255, 255, 255), *colors))


def parse_palette(text: str) -> Palette:
    entries = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4 or not all(p.isdigit() for p in parts):
            raise FormatError(f"palette line {lineno}: expected 'index R G B', got {line!r}")
        index, *rgb = (int(p) for p in parts)
        if index != len(entries):
            raise FormatError(f"palette line {lineno}: expected index {len(entries)}, got {index}")
        entries[index] = tuple(rgb)
    return Palette(tuple(entries[i] for i in range(len(entries))))


def emit_palette(palette: Palette) -> str:
    return "".join(f"{i} {r} {g} {b}\n" for i, (r, g, b) in enumerate(palette.entries))


# -- pixels <-> colour fields ----------------------------------------------

def pixels_to_field(image: PnmImage | np.ndarray, palette: Palette | None, params: GridParams) -> ColorField:
    """Read a 2-D image as a colour field.

    Column ``x`` and row ``y`` counted from the BOTTOM become cell ``(x, y)``.
    Bitmaps map painted pixels to colour 1; pixmaps are matched against the
    palette by exact RGB equality.
    """
    pixels = image.pixels if isinstance(image, PnmImage) else np.asarray(image)
    if params.n != 2:
        raise DimensionMismatch(f"images hold 2-D fields, grid has n={params.n}")
    height, width = pixels.shape[:2]
    if (width, height) != params.dims:
        raise DimensionMismatch(f"image is {width}x{height}, grid expects {params.dims[0]}x{params.dims[1]}")
    flipped = pixels[::-1]
    if pixels.ndim == 2:
        cells = flipped.astype(np.uint8).T
        return ColorField(params, cells)
    if palette is None:
        raise FormatError("a palette is required to read colour images")
    if palette.m != params.m:
        raise DimensionMismatch(f"palette has {palette.m} colours, grid expects m={params.m}")
    key = (flipped[..., 0].astype(np.int64) << 16) | (flipped[..., 1].astype(np.int64) << 8) | flipped[..., 2]
    pal = palette.as_array().astype(np.int64)
    pal_keys = (pal[:, 0] << 16) | (pal[:, 1] << 8) | pal[:, 2]
    match = key[..., None] == pal_keys
    found = match.any(axis=-1)
    if not found.all():
        y, x = (int(v) for v in np.argwhere(~found)[0])
        raise UnknownColor(flipped[y, x], x, y, height - 1 - y)
    return ColorField(params, match.argmax(axis=-1).T)


def field_to_pixels(field: ColorField, palette: Palette) -> np.ndarray:
    """Inverse of :func:`pixels_to_field` for a 2-D field: an ``(A2, A1, 3)`` pixmap."""
    if field.params.n != 2:
        raise DimensionMismatch("only 2-D fields map directly to images")
    if palette.m < field.params.m:
        raise DimensionMismatch(f"palette has {palette.m} colours, field uses up to {field.params.m}")
    return palette.as_array()[field.cells.T[::-1]]


# -- voxel container -------------------------------------------------------

VOXEL_MAGIC = b"NVOX"
VOXEL_VERSION = 1
_MAX_HEADER = 4096


def emit_voxels(field: ColorField) -> bytes:
    p = field.params
    if p.m > 255:
        raise ValueOutOfRange("one byte per voxel caps m at 255")
    header = " ".join(str(v) for v in (p.n, p.m, *p.dims)) + "\n"
    return VOXEL_MAGIC + bytes([VOXEL_VERSION]) + header.encode("ascii") + field.cells.astype(np.uint8).tobytes()


def parse_voxels(data: bytes) -> ColorField:
    data = bytes(data)
    if data[:4] != VOXEL_MAGIC:
        raise BadMagic(f"expected magic {VOXEL_MAGIC!r}, found {data[:4]!r}")
    if len(data) < 5:
        raise MalformedHeader("missing version byte")
    if data[4] != VOXEL_VERSION:
        raise VersionMismatch(f"unsupported voxel container version {data[4]}")
    end = data.find(b"\n", 5, 5 + _MAX_HEADER)
    if end < 0:
        raise MalformedHeader("header line is not newline-terminated")
    fields = data[5:end].split(b" ")
    if len(fields) < 2 or not all(f.isdigit() and len(f) <= 9 for f in fields):
        raise MalformedHeader(f"header must be 'n m A1 ... An', got {data[5:end][:60]!r}")
    n, m, *dims = (int(f) for f in fields)
    if len(dims) != n:
        raise MalformedHeader(f"header declares n={n} but lists {len(dims)} dimensions")
    if m > 255:
        raise ValueOutOfRange(f"m={m} exceeds the one-byte voxel limit")
    try:
        params = make_params(n, m, dims)
    except ParamError as exc:
        raise MalformedHeader(str(exc)) from None
    payload = data[end + 1:]
    if len(payload) != params.cell_count:
        raise PayloadLengthMismatch(f"payload has {len(payload)} bytes, dims need {params.cell_count}")
    cells = np.frombuffer(payload, dtype=np.uint8).reshape(params.dims)
    if cells.size and cells.max() > m:
        bad = tuple(int(c) for c in np.argwhere(cells > m)[0])
        raise ValueOutOfRange(f"voxel {bad} holds colour {cells[bad]} > m={m}")
    return ColorField(params, cells)


# -- k as text -------------------------------------------------------------

_K_PATTERN = re.compile(r"\s*(?:0[xX]([0-9a-fA-F]+)|([0-9]+))\s*")


@contextmanager
def _unbounded_int_digits():
    # CPython limits int<->str conversion length by default; k routinely exceeds it
    get = getattr(sys, "get_int_max_str_digits", None)
    if get is None:
        yield
        return
    old = get()
    sys.set_int_max_str_digits(0)
    try:
        yield
    finally:
        sys.set_int_max_str_digits(old)


def parse_k(text: str | bytes) -> int:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidNumber(f"k file is not UTF-8: {exc}") from None
    if not text.strip():
        raise InvalidNumber("empty input")
    match = _K_PATTERN.fullmatch(text)
    if match is None:
        raise InvalidNumber(f"invalid digit in k: {text.strip()[:40]!r}")
    hex_digits, dec_digits = match.groups()
    if hex_digits is not None:
        return int(hex_digits, 16)
    with _unbounded_int_digits():
        return int(dec_digits)


def emit_k(k: int, base: int = 10) -> str:
    if k < 0:
        raise ValueOutOfRange("k must be a natural number")
    if base == 16:
        return f"0x{k:x}\n"
    if base != 10:
        raise FormatError(f"unsupported base {base}")
    with _unbounded_int_digits():
        return f"{k}\n"


def sniff(data: bytes) -> str:
    """Classify raw file bytes as ``"voxel"`` or ``"pnm"``."""
    if data[:4] == VOXEL_MAGIC:
        return "voxel"
    if data[:2] in _PNM_KINDS:
        return "pnm"
    raise BadMagic(f"unrecognised file magic {data[:4]!r}")


def read_field(data: bytes, params: GridParams | None, palette: Palette | None) -> ColorField:
    """Load a colour field from voxel or anymap bytes.

    Voxel files carry their own parameters; when ``params`` is also given it
    must agree.
    """
    if sniff(data) == "voxel":
        field = parse_voxels(data)
        if params is not None and field.params != params:
            raise DimensionMismatch(
                f"voxel file has n={field.params.n} m={field.params.m} dims={list(field.params.dims)}, "
                f"expected n={params.n} m={params.m} dims={list(params.dims)}")
        return field
    if params is None:
        raise FormatError("grid parameters are required for image input")
    return pixels_to_field(parse_pnm(data), palette, params)


def dims_from_text(text: str) -> Sequence[int]:
    try:
        dims = [int(t) for t in text.split(",")]
    except ValueError:
        raise FormatError(f"dims must be comma-separated integers, got {text!r}") from None
    return dims
