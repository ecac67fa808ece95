"""Rasterise the graphs of the colour formulas over the window at height k.

A raster shows two free axes: the first free axis runs left to right and the
second bottom to top.  For n > 2 every other axis is pinned by a slice spec.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Mapping

import numpy as np

from .codec import EncodedNumber, MultiColorCell, ParamError, decode_membership
from .dyadic import Dyadic
from .evaluate import (CLASSIC_HEIGHT, CLASSIC_WIDTH, InvariantViolation, eval_classic,
                       eval_f, is_painted)
from .formats import Palette

Evaluator = Literal["fast", "literal"]


@dataclass(frozen=True)
class RenderRequest:
    enc: EncodedNumber
    palette: Palette
    scale: int = 1
    slice_spec: Mapping[int, int] = field(default_factory=dict)  # 0-based axis -> cell coordinate
    evaluator: Evaluator = "fast"
    strict: bool = True

    def __post_init__(self):
        params = self.enc.params
        if self.scale < 1:
            raise ParamError(f"scale must be >= 1, got {self.scale}")
        if self.evaluator not in ("fast", "literal"):
            raise ParamError(f"unknown evaluator {self.evaluator!r}")
        if self.palette.m < params.m:
            raise ParamError(f"palette has {self.palette.m} colours, grid uses m={params.m}")
        spec = {int(a): int(v) for a, v in self.slice_spec.items()}
        if len(spec) != params.n - 2:
            raise ParamError(f"an n={params.n} grid needs {params.n - 2} fixed axes, got {len(spec)}")
        for axis, value in spec.items():
            if not 0 <= axis < params.n:
                raise ParamError(f"slice axis x{axis + 1} does not exist for n={params.n}")
            if not 0 <= value < params.dims[axis]:
                raise ParamError(f"slice x{axis + 1}={value} outside 0..{params.dims[axis] - 1}")
        object.__setattr__(self, "slice_spec", spec)

    @property
    def free_axes(self) -> tuple[int, int]:
        free = [a for a in range(self.enc.params.n) if a not in self.slice_spec]
        return free[0], free[1]


def parse_slice_spec(items) -> dict[int, int]:
    """Turn strings like ``"x3=1"`` (1-based axis) into ``{2: 1}``."""
    spec = {}
    for item in items:
        name, sep, value = item.partition("=")
        name = name.strip().lower()
        if not sep or not name.startswith("x") or not name[1:].isdigit() or not value.strip().isdigit():
            raise ParamError(f"slice must look like x3=1, got {item!r}")
        axis = int(name[1:]) - 1
        if axis < 0:
            raise ParamError(f"axes are numbered from x1, got {item!r}")
        if axis in spec:
            raise ParamError(f"axis x{axis + 1} fixed twice")
        spec[axis] = int(value)
    return spec


def _slice_membership(req: RenderRequest) -> np.ndarray:
    """Colour membership of the slice cells, shape ``(A_free1, A_free2, m)``."""
    params = req.enc.params
    a, b = req.free_axes
    if req.evaluator == "fast":
        full = decode_membership(req.enc)
        index = tuple(slice(None) if axis in (a, b) else req.slice_spec[axis] for axis in range(params.n))
        return full[index]

    out = np.zeros((params.dims[a], params.dims[b], params.m), dtype=bool)
    k = req.enc.k
    for u in range(params.dims[a]):
        for v in range(params.dims[b]):
            cell = [req.slice_spec.get(axis, 0) for axis in range(params.n)]
            cell[a], cell[b] = u, v
            # sample the cell centre; the last axis sits at height k
            point = [Dyadic(2 * c + 1, -1) for c in cell]
            point[-1] = Dyadic(2 * (k + cell[-1]) + 1, -1)
            for j in range(1, params.m + 1):
                out[u, v, j - 1] = is_painted(eval_f(params, req.enc, point, j))
    return out


def render_slice(req: RenderRequest) -> np.ndarray:
    """RGB raster ``(A_free2 * scale, A_free1 * scale, 3)`` of one 2-D slice."""
    membership = _slice_membership(req)
    counts = membership.sum(axis=-1)
    if req.strict and (counts > 1).any():
        u, v = (int(c) for c in np.argwhere(counts > 1)[0])
        a, b = req.free_axes
        cell = [req.slice_spec.get(axis, 0) for axis in range(req.enc.params.n)]
        cell[a], cell[b] = u, v
        raise MultiColorCell(cell, [int(j) + 1 for j in np.flatnonzero(membership[u, v])])
    index = np.where(counts > 0, membership.argmax(axis=-1) + 1, 0)
    raster = req.palette.as_array()[index.T[::-1]]
    if req.scale > 1:
        raster = raster.repeat(req.scale, axis=0).repeat(req.scale, axis=1)
    return raster


def check_evaluators_agree(req: RenderRequest) -> np.ndarray:
    """Render with both evaluators; raise InvariantViolation if they differ."""
    fast = _slice_membership(RenderRequest(req.enc, req.palette, req.scale, req.slice_spec, "fast", req.strict))
    literal = _slice_membership(RenderRequest(req.enc, req.palette, req.scale, req.slice_spec, "literal", req.strict))
    if not np.array_equal(fast, literal):
        u, v, j = (int(c) for c in np.argwhere(fast != literal)[0])
        raise InvariantViolation(f"evaluators disagree at slice cell ({u}, {v}) colour {j + 1}")
    return render_slice(req)


def classic_bitmap(k: int) -> np.ndarray:
    """Cells of the 106x17 window at height k, indexed ``[x, y]`` with y upward."""
    out = np.zeros((CLASSIC_WIDTH, CLASSIC_HEIGHT), dtype=bool)
    for x in range(CLASSIC_WIDTH):
        px = Dyadic(2 * x + 1, -1)
        for y in range(CLASSIC_HEIGHT):
            out[x, y] = is_painted(eval_classic(k, (px, Dyadic(2 * (k + y) + 1, -1))))
    return out


def render_classic(k: int, scale: int = 1) -> np.ndarray:
    """Monochrome raster ``(17 * scale, 106 * scale)``; True is painted."""
    if scale < 1:
        raise ParamError(f"scale must be >= 1, got {scale}")
    raster = classic_bitmap(k).T[::-1]
    if scale > 1:
        raster = raster.repeat(scale, axis=0).repeat(scale, axis=1)
    return raster


def raster_to_classic_bitmap(raster: np.ndarray, scale: int = 1) -> np.ndarray:
    """Undo the orientation (and block scaling) of :func:`render_classic`."""
    raster = np.asarray(raster, dtype=bool)
    if raster.shape != (CLASSIC_HEIGHT * scale, CLASSIC_WIDTH * scale):
        raise ParamError(f"raster shape {raster.shape} is not 106x17 at scale {scale}")
    return raster[::scale, ::scale][::-1].T
