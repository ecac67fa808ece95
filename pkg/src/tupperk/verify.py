"""Round-trip and oracle checks over enumerated or random colour fields."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .codec import (ColorField, EncodedNumber, GridParams, decode, decode_membership, encode,
                    validate_encoded)
from .dyadic import Dyadic
from .evaluate import InvariantViolation, eval_f, is_painted
from .formats import emit_voxels


@dataclass
class Mismatch:
    field: ColorField
    k: int
    reason: str


@dataclass
class VerifyReport:
    fields: int = 0
    cells: int = 0
    literal_checks: int = 0
    mismatches: list[Mismatch] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def all_fields(params: GridParams) -> Iterator[ColorField]:
    """Every assignment of colours 0..m to the cells, (m+1)**cells of them."""
    for values in itertools.product(range(params.m + 1), repeat=params.cell_count):
        yield ColorField(params, np.array(values, dtype=np.uint8).reshape(params.dims))


def random_field(rng: np.random.Generator, params: GridParams) -> ColorField:
    return ColorField(params, rng.integers(0, params.m + 1, size=params.dims))


def literal_membership(enc: EncodedNumber, rng: np.random.Generator | None = None,
                       offsets: int = 1) -> np.ndarray:
    """Membership computed only through the literal formula evaluator.

    With ``rng`` each cell is sampled at ``offsets`` random dyadic points inside
    it (and cells where samples disagree are reported as a ValueError);
    otherwise the cell centre is used.
    """
    params = enc.params
    out = np.zeros(params.dims + (params.m,), dtype=bool)
    for cell in params.cells():
        for j in range(1, params.m + 1):
            seen = set()
            for _ in range(offsets):
                if rng is None:
                    frac = [Dyadic(1, -1)] * params.n
                else:
                    frac = [Dyadic(int(v), -16) for v in rng.integers(0, 1 << 16, size=params.n)]
                point = [Dyadic(c) + f for c, f in zip(cell, frac)]
                point[-1] = point[-1] + enc.k
                seen.add(is_painted(eval_f(params, enc, point, j)))
            if len(seen) != 1:
                raise ValueError(f"formula value varies inside cell {cell} for colour {j}")
            out[cell + (j - 1,)] = seen.pop()
    return out


def check_field(f: ColorField, literal: bool = True, k: int | None = None) -> list[str]:
    """Encode ``f`` and compare against both decoders; returns problem descriptions.

    ``k`` replaces the encoded number, which lets a caller corrupt it on purpose.
    """
    enc = encode(f) if k is None else EncodedNumber(k, f.params)
    problems = []
    report = validate_encoded(enc)
    if not report.ok:
        problems.extend(report.problems)
    try:
        back = decode(enc, strict=True)
    except ValueError as exc:
        problems.append(f"decode failed: {exc}")
        back = None
    if back is not None and back != f:
        problems.append("decode(encode(F)) != F")
    if literal:
        expected = np.zeros(f.params.dims + (f.params.m,), dtype=bool)
        for j in range(1, f.params.m + 1):
            expected[..., j - 1] = f.cells == j
        try:
            got = literal_membership(enc)
        except (ArithmeticError, ValueError, InvariantViolation) as exc:
            problems.append(f"literal evaluation failed: {exc}")
        else:
            if not np.array_equal(got, expected):
                problems.append("literal evaluator disagrees with the field")
            if not np.array_equal(got, decode_membership(enc)):
                problems.append("literal evaluator disagrees with the bit-test decoder")
    return problems


def run_verify(fields: Iterator[ColorField], literal_cap: int = 20000,
               corrupt: Callable[[int], int] | None = None, stop_after: int = 5) -> VerifyReport:
    """Check every field; literal evaluation is skipped for fields with more
    than ``literal_cap`` (cell, colour) pairs."""
    report = VerifyReport()
    for f in fields:
        report.fields += 1
        report.cells += f.params.cell_count
        literal = f.params.cell_count * f.params.m <= literal_cap
        if literal:
            report.literal_checks += f.params.cell_count * f.params.m
        k = encode(f).k
        if corrupt is not None:
            k = corrupt(k)
        problems = check_field(f, literal=literal, k=k)
        if problems:
            report.mismatches.append(Mismatch(f, k, "; ".join(problems[:4])))
            if len(report.mismatches) >= stop_after:
                break
    return report


def mismatch_blob(mismatch: Mismatch) -> bytes:
    """The offending field as an NVOX container, for reproduction."""
    return emit_voxels(mismatch.field)
