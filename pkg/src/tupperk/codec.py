"""Grid parameters and the bijection between colour fields and the number k.

Every (cell, colour) pair owns one bit of ``N = k // R``.  For a cell
``(m1, ..., mn)`` and colour ``j`` the bit number is::

    R**n * m1 + R**(n-1) * m2 + ... + R**2 * m(n-1) + R * mn + j

and ``k = R * N``.  Because every coordinate is below ``R`` and ``1 <= j <= m < R``
these positions are distinct, so decoding is a plain bit test.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np


class ParamError(ValueError):
    """Invalid grid parameters, cell coordinates or colour index."""


class MultiColorCell(ValueError):
    """A decoded cell carries more than one colour (only possible for foreign k)."""

    def __init__(self, cell, colors):
        self.cell = tuple(cell)
        self.colors = tuple(colors)
        super().__init__(f"cell {self.cell} decodes to several colours {list(self.colors)}")


@dataclass(frozen=True)
class GridParams:
    n: int
    m: int
    dims: tuple[int, ...]
    radix: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(a) for a in self.dims))
        if self.n < 2:
            raise ParamError(f"the construction needs n >= 2, got n={self.n}")
        if len(self.dims) != self.n:
            raise ParamError(f"expected {self.n} dimensions, got {len(self.dims)}")
        if self.m < 1:
            raise ParamError(f"colour count must be positive, got m={self.m}")
        if any(a < 1 for a in self.dims):
            raise ParamError(f"every dimension must be positive, got {list(self.dims)}")
        object.__setattr__(self, "radix", sum(self.dims) + self.m)

    @property
    def cell_count(self) -> int:
        count = 1
        for a in self.dims:
            count *= a
        return count

    @property
    def weights(self) -> tuple[int, ...]:
        """Bit-index weight of each coordinate: R**n, ..., R**2, R."""
        R = self.radix
        return tuple(R ** (self.n - i) for i in range(self.n))

    def check_cell(self, cell: Sequence[int]) -> tuple[int, ...]:
        cell = tuple(int(c) for c in cell)
        if len(cell) != self.n:
            raise ParamError(f"cell {cell} has {len(cell)} coordinates, expected {self.n}")
        for c, a in zip(cell, self.dims):
            if not 0 <= c < a:
                raise ParamError(f"cell {cell} outside grid {list(self.dims)}")
        return cell

    def check_color(self, color: int) -> int:
        if not 1 <= color <= self.m:
            raise ParamError(f"colour {color} outside 1..{self.m}")
        return int(color)

    def cells(self) -> Iterator[tuple[int, ...]]:
        """All lattice cells, first coordinate slowest."""
        for idx in np.ndindex(*self.dims):
            yield tuple(int(c) for c in idx)


def make_params(n: int, m: int, dims: Sequence[int]) -> GridParams:
    return GridParams(int(n), int(m), tuple(dims))


@dataclass(frozen=True)
class ColorField:
    """Colour index per cell: 0 is background, j in 1..m puts the cell in S_j."""

    params: GridParams
    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells)
        if cells.shape != self.params.dims:
            raise ParamError(f"field shape {cells.shape} does not match dims {self.params.dims}")
        if cells.size and (cells.min() < 0 or cells.max() > self.params.m):
            raise ParamError(f"colour indices must lie in 0..{self.params.m}")
        cells = cells.astype(np.uint8 if self.params.m < 256 else np.int64)
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def empty(cls, params: GridParams) -> "ColorField":
        return cls(params, np.zeros(params.dims, dtype=np.uint8))

    @classmethod
    def from_sets(cls, params: GridParams, sets: dict[int, Sequence[Sequence[int]]]) -> "ColorField":
        """Build a field from ``{j: cells of S_j}``; the sets must be disjoint."""
        cells = np.zeros(params.dims, dtype=np.int64)
        for j, members in sets.items():
            params.check_color(j)
            for cell in members:
                cell = params.check_cell(cell)
                if cells[cell] not in (0, j):
                    raise ParamError(f"cell {cell} assigned to both S_{cells[cell]} and S_{j}")
                cells[cell] = j
        return cls(params, cells)

    def color_sets(self) -> dict[int, set[tuple[int, ...]]]:
        sets: dict[int, set[tuple[int, ...]]] = {j: set() for j in range(1, self.params.m + 1)}
        for idx in np.argwhere(self.cells):
            cell = tuple(int(c) for c in idx)
            sets[int(self.cells[cell])].add(cell)
        return sets

    def __eq__(self, other):
        if not isinstance(other, ColorField):
            return NotImplemented
        return self.params == other.params and np.array_equal(self.cells, other.cells)

    __hash__ = None


@dataclass(frozen=True)
class EncodedNumber:
    """The number k together with the grid it is read against.

    Any natural number is accepted: decoding is defined for every k, while
    ``validate_encoded`` tells whether k could have come from ``encode``.
    """

    k: int
    params: GridParams

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or isinstance(self.k, bool):
            raise ParamError(f"k must be an integer, got {type(self.k).__name__}")
        object.__setattr__(self, "k", int(self.k))
        if self.k < 0:
            raise ParamError("k must be a natural number")

    @cached_property
    def _divmod(self) -> tuple[int, int]:
        return divmod(self.k, self.params.radix)

    @property
    def quotient(self) -> int:
        """N = floor(k / R), the integer whose bits carry the image."""
        return self._divmod[0]

    @property
    def residue(self) -> int:
        """k mod R; zero for every number produced by ``encode``."""
        return self._divmod[1]


def bit_index(params: GridParams, cell: Sequence[int], color: int) -> int:
    cell = params.check_cell(cell)
    color = params.check_color(color)
    return sum(w * c for w, c in zip(params.weights, cell)) + color


def split_bit_index(params: GridParams, index: int) -> tuple[tuple[int, ...], int]:
    """Read a bit number back as base-R digits ``((m1, ..., mn), j)``.

    The leading digit ``m1`` is whatever remains after n divisions, so it may
    be >= R for bits that no in-range cell could own.
    """
    R = params.radix
    index, j = divmod(index, R)
    digits = []
    for _ in range(params.n - 1):
        index, d = divmod(index, R)
        digits.append(d)
    digits.append(index)
    return tuple(reversed(digits)), j


def _set_bit_positions(value: int) -> np.ndarray:
    if value == 0:
        return np.zeros(0, dtype=np.int64)
    raw = np.frombuffer(value.to_bytes((value.bit_length() + 7) // 8, "little"), dtype=np.uint8)
    return np.flatnonzero(np.unpackbits(raw, bitorder="little"))


def encode(field: ColorField) -> EncodedNumber:
    params = field.params
    weights = params.weights
    nonzero = np.argwhere(field.cells)
    if len(nonzero) == 0:
        return EncodedNumber(0, params)
    positions = [sum(w * int(c) for w, c in zip(weights, idx)) + int(field.cells[tuple(idx)])
                 for idx in nonzero]
    buf = bytearray(max(positions) // 8 + 1)
    for p in positions:
        buf[p >> 3] |= 1 << (p & 7)
    N = int.from_bytes(buf, "little")
    return EncodedNumber(params.radix * N, params)


def decode_cell(enc: EncodedNumber, cell: Sequence[int], color: int) -> bool:
    return bool((enc.quotient >> bit_index(enc.params, cell, color)) & 1)


def decode_membership(enc: EncodedNumber) -> np.ndarray:
    """Boolean array of shape ``dims + (m,)``; entry ``[cell][j-1]`` is the bit for (cell, j)."""
    params = enc.params
    out = np.zeros(params.dims + (params.m,), dtype=bool)
    N = enc.quotient
    if N == 0:
        return out
    nbits = N.bit_length()
    R = params.radix
    # Bit positions of every (cell, colour) pair; overflow-safe only while they fit in int64.
    if params.weights[0] * params.dims[0] + R < 2**62:
        pos = np.zeros(params.dims + (params.m,), dtype=np.int64)
        for axis, w in enumerate(params.weights):
            shape = [1] * (params.n + 1)
            shape[axis] = params.dims[axis]
            pos += (np.arange(params.dims[axis], dtype=np.int64) * w).reshape(shape)
        pos += np.arange(1, params.m + 1, dtype=np.int64)
        bits = np.unpackbits(
            np.frombuffer(N.to_bytes((nbits + 7) // 8, "little"), dtype=np.uint8), bitorder="little")
        inside = pos < nbits
        out[inside] = bits[pos[inside]].astype(bool)
        return out
    for cell in params.cells():
        for j in range(1, params.m + 1):
            out[cell + (j - 1,)] = bool((N >> bit_index(params, cell, j)) & 1)
    return out


def decode_field(enc: EncodedNumber) -> dict[tuple[int, ...], frozenset[int]]:
    """Map every cell to the set of colours whose bit is set.

    For k produced by ``encode`` each set has at most one element.  Other k may
    paint a cell in several colours.
    """
    membership = decode_membership(enc)
    result = {}
    for cell in enc.params.cells():
        result[cell] = frozenset(int(j) + 1 for j in np.flatnonzero(membership[cell]))
    return result


def membership_to_field(params: GridParams, membership: np.ndarray, strict: bool = True) -> ColorField:
    """Collapse per-cell colour sets to a ColorField.

    ``strict`` raises MultiColorCell on the first cell (first coordinate
    slowest) holding several colours; otherwise the smallest colour wins.
    """
    counts = membership.sum(axis=-1)
    if strict and (counts > 1).any():
        cell = tuple(int(c) for c in np.argwhere(counts > 1)[0])
        raise MultiColorCell(cell, [int(j) + 1 for j in np.flatnonzero(membership[cell])])
    cells = np.where(counts > 0, membership.argmax(axis=-1) + 1, 0)
    return ColorField(params, cells)


def decode(enc: EncodedNumber, strict: bool = True) -> ColorField:
    return membership_to_field(enc.params, decode_membership(enc), strict=strict)


@dataclass
class ValidationReport:
    divisible: bool
    residues_ok: bool
    digits_ok: bool
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.divisible and self.residues_ok and self.digits_ok

    def __bool__(self):
        return self.ok


def validate_encoded(enc: EncodedNumber, max_problems: int = 10) -> ValidationReport:
    """Check the structural consequences of the encoding formula for ``enc.k``."""
    params = enc.params
    R = params.radix
    report = ValidationReport(divisible=enc.residue == 0, residues_ok=True, digits_ok=True)
    if not report.divisible:
        report.problems.append(f"k is not a multiple of R={R} (k mod R = {enc.residue})")

    def note(msg):
        if len(report.problems) < max_problems:
            report.problems.append(msg)

    for pos in _set_bit_positions(enc.quotient):
        cell, j = split_bit_index(params, int(pos))
        if not 1 <= j <= params.m:
            report.residues_ok = False
            note(f"bit {pos} has residue {j} mod R, outside 1..{params.m}")
        if any(not 0 <= c < a for c, a in zip(cell, params.dims)):
            report.digits_ok = False
            note(f"bit {pos} addresses cell {cell} outside dims {list(params.dims)}")
    return report
