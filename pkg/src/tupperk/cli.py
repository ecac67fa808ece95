"""Command-line entry point: ``tupperk <subcommand> ...``.

Exit status is 0 on success, 1 for bad input (parse, validation, parameter
errors) and 2 when an internal invariant fails (evaluators disagree, a
round trip breaks).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .codec import EncodedNumber, ParamError, decode, decode_cell, encode, make_params
from .dyadic import Dyadic
from .evaluate import InvariantViolation, classic_encode, eval_f, is_painted
from .formats import (FormatError, Palette, dims_from_text, emit_k, emit_pnm, emit_voxels,
                      field_to_pixels, parse_k, parse_palette, parse_pnm, read_field)
from .render import (RenderRequest, check_evaluators_agree, parse_slice_spec, raster_to_classic_bitmap,
                     render_classic, render_slice)
from .verify import all_fields, mismatch_blob, random_field, run_verify

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2


class UsageError(ValueError):
    pass


def log(msg: str) -> None:
    print(msg, file=sys.stderr)


def read_bytes(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None


def write_output(path: str | None, data: bytes | str) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(path).write_bytes(data)


def grid_from_args(args, required: bool = True):
    if args.dims is None or args.colors is None:
        if required:
            raise UsageError("--dims and --colors are required")
        return None
    dims = dims_from_text(args.dims)
    return make_params(len(dims), args.colors, dims)


def palette_from_args(args, m: int) -> Palette:
    if getattr(args, "palette", None):
        palette = parse_palette(read_bytes(args.palette).decode("utf-8"))
        if palette.m < m:
            raise UsageError(f"palette {args.palette} has {palette.m} colours, need {m}")
        return palette
    return Palette.default(m)


def load_k(path: str) -> int:
    try:
        return parse_k(read_bytes(path))
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from exc


# -- subcommands -----------------------------------------------------------

def cmd_encode(args) -> int:
    params = grid_from_args(args, required=False)
    if params is None and (args.dims is not None or args.colors is not None):
        raise UsageError("give both --dims and --colors, or neither (voxel input)")
    palette = palette_from_args(args, params.m) if params else None
    data = read_bytes(args.input)
    try:
        field = read_field(data, params, palette)
    except FormatError as exc:
        raise FormatError(f"{args.input}: {exc}") from exc
    enc = encode(field)
    text = emit_k(enc.k, 16 if args.hex else 10)
    write_output(args.output, text)
    log(f"R={field.params.radix} bits={enc.k.bit_length()} digits={len(text.strip())}")
    return EXIT_OK


def cmd_decode(args) -> int:
    params = grid_from_args(args)
    enc = EncodedNumber(load_k(args.kfile), params)
    field = decode(enc, strict=not args.layered)
    fmt = args.format or ("pnm" if params.n == 2 else "voxel")
    if fmt == "pnm":
        if params.n != 2:
            raise UsageError("anymap output needs n=2; use --format voxel")
        pixels = field_to_pixels(field, palette_from_args(args, params.m))
        write_output(args.output, emit_pnm(pixels, "P3" if args.plain else "P6"))
    else:
        write_output(args.output, emit_voxels(field))
        if args.image:
            if params.n != 2:
                raise UsageError("--image needs n=2")
            pixels = field_to_pixels(field, palette_from_args(args, params.m))
            write_output(args.image, emit_pnm(pixels, "P3" if args.plain else "P6"))
    log(f"decoded {int((field.cells > 0).sum())} painted cells of {params.cell_count}")
    return EXIT_OK


def parse_point(text: str, n: int) -> list[Dyadic]:
    parts = text.split(",")
    if len(parts) != n:
        raise UsageError(f"--point needs {n} comma-separated coordinates, got {len(parts)}")
    try:
        return [Dyadic.parse(p) for p in parts]
    except ValueError as exc:
        raise UsageError(f"--point: {exc}") from None


def cmd_eval(args) -> int:
    params = grid_from_args(args)
    point = parse_point(args.point, params.n)
    params.check_color(args.color)
    enc = EncodedNumber(load_k(args.kfile), params)
    value = eval_f(params, enc, point, args.color)
    painted = is_painted(value)
    if args.fast:
        cell = [p.__floor__() for p in point]
        cell[-1] -= enc.k
        if all(0 <= c < a for c, a in zip(cell, params.dims)):
            fast = decode_cell(enc, cell, args.color)
            if fast != painted:
                raise InvariantViolation(
                    f"literal evaluator says {int(painted)}, bit test says {int(fast)} at cell {tuple(cell)}")
        else:
            log("point lies outside the window at height k; --fast check skipped")
    print(f"{value} ({'painted' if painted else 'unpainted'})")
    return EXIT_OK


def cmd_render(args) -> int:
    params = grid_from_args(args)
    enc = EncodedNumber(load_k(args.kfile), params)
    req = RenderRequest(enc, palette_from_args(args, params.m), scale=args.scale,
                        slice_spec=parse_slice_spec(args.slice or []), evaluator=args.evaluator,
                        strict=not args.layered)
    raster = check_evaluators_agree(req) if args.check else render_slice(req)
    write_output(args.output, emit_pnm(raster, "P3" if args.plain else "P6"))
    log(f"rendered {raster.shape[1]}x{raster.shape[0]} pixels")
    return EXIT_OK


def cmd_verify(args) -> int:
    bounds = dims_from_text(args.dims)
    limit = make_params(len(bounds), args.colors, bounds)
    if limit.cell_count * limit.m > args.cap:
        raise UsageError(f"{limit.cell_count} cells x {limit.m} colours exceeds --cap {args.cap}")
    rng = np.random.default_rng(args.seed)
    if args.random:
        def fields():
            for _ in range(args.random):
                dims = [int(rng.integers(1, b + 1)) for b in bounds]
                yield random_field(rng, make_params(len(dims), int(rng.integers(1, args.colors + 1)), dims))
        source, total = fields(), args.random
    else:
        total = (limit.m + 1) ** limit.cell_count
        if total > args.max_fields:
            raise UsageError(f"exhaustive run needs {total} fields (> {args.max_fields}); use --random N")
        source = all_fields(limit)

    def flip_one_bit(k):
        return k ^ (1 << int(rng.integers(0, max(k.bit_length(), 1))))

    report = run_verify(source, literal_cap=args.cap, corrupt=flip_one_bit if args.inject_fault else None)
    print(f"fields={report.fields} cells={report.cells} literal_checks={report.literal_checks} "
          f"mismatches={len(report.mismatches)}")
    if report.ok:
        log(f"all {report.fields} of {total} fields round-trip through both decoders")
        return EXIT_OK
    for i, bad in enumerate(report.mismatches):
        log(f"mismatch {i}: {bad.reason}")
        log(f"  k={emit_k(bad.k, 16).strip()}")
        log(f"  field (NVOX, hex)={mismatch_blob(bad).hex()}")
        if args.dump:
            Path(args.dump).mkdir(parents=True, exist_ok=True)
            Path(args.dump, f"mismatch{i}.nvox").write_bytes(mismatch_blob(bad))
            Path(args.dump, f"mismatch{i}.k").write_text(emit_k(bad.k))
    return EXIT_INTERNAL


def _classic_input_bits(data: bytes, palette_path: str | None) -> np.ndarray:
    image = parse_pnm(data)
    if image.is_bitmap:
        bits = image.pixels
    else:
        if not palette_path:
            raise UsageError("colour input needs --palette with entries 0 (background) and 1 (ink)")
        palette = parse_palette(read_bytes(palette_path).decode("utf-8"))
        if palette.m != 1:
            raise UsageError("classic palette must have exactly two entries")
        ink = np.all(image.pixels == palette.entries[1], axis=-1)
        background = np.all(image.pixels == palette.entries[0], axis=-1)
        if not (ink | background).all():
            raise FormatError("image contains colours outside the two-entry palette")
        bits = ink
    return raster_to_classic_bitmap(bits)


def cmd_classic_encode(args) -> int:
    try:
        bitmap = _classic_input_bits(read_bytes(args.input), args.palette)
    except (FormatError, ParamError) as exc:
        raise FormatError(f"{args.input}: {exc}") from exc
    k = classic_encode(bitmap)
    text = emit_k(k, 16 if args.hex else 10)
    write_output(args.output, text)
    log(f"bits={k.bit_length()} digits={len(text.strip())}")
    return EXIT_OK


def cmd_classic_decode(args) -> int:
    raster = render_classic(load_k(args.kfile), 1)
    write_output(args.output, emit_pnm(raster, "P1" if args.plain else "P4"))
    return EXIT_OK


def cmd_classic_render(args) -> int:
    raster = render_classic(load_k(args.kfile), args.scale)
    write_output(args.output, emit_pnm(raster, "P1" if args.plain else "P4"))
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tupperk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def grid(p, required=True):
        p.add_argument("--dims", required=required, help="comma-separated A1,...,An")
        p.add_argument("--colors", type=int, required=required, help="colour count m")

    p = sub.add_parser("encode", help="image or voxel file -> k")
    p.add_argument("input", help="anymap (P1/P3/P4/P6) or NVOX file, '-' for stdin")
    grid(p, required=False)
    p.add_argument("--palette", help="palette file (index R G B per line)")
    p.add_argument("-o", "--output", help="k file (default stdout)")
    p.add_argument("--hex", action="store_true", help="write k in 0x-hex")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="k -> image or voxel file")
    p.add_argument("kfile")
    grid(p)
    p.add_argument("--palette")
    p.add_argument("-o", "--output")
    p.add_argument("--format", choices=["pnm", "voxel"], help="default pnm for n=2, voxel otherwise")
    p.add_argument("--image", help="with --format voxel and n=2, also write an anymap here")
    p.add_argument("--plain", action="store_true", help="ASCII anymap (P3)")
    p.add_argument("--layered", action="store_true", help="multi-colour cells take the smallest colour")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval", help="evaluate one colour formula at a point")
    p.add_argument("kfile")
    grid(p)
    p.add_argument("--point", required=True, help="absolute coordinates, e.g. 0.5,6.5")
    p.add_argument("--color", type=int, required=True)
    p.add_argument("--fast", action="store_true", help="cross-check against the bit-test decoder")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("render", help="rasterise the graphs at height k")
    p.add_argument("kfile")
    grid(p)
    p.add_argument("--palette")
    p.add_argument("--scale", type=int, default=1)
    p.add_argument("--slice", action="append", help="fix an axis for n>2, e.g. x3=1 (repeatable)")
    p.add_argument("--evaluator", choices=["fast", "literal"], default="fast")
    p.add_argument("--check", action="store_true", help="render with both evaluators and compare")
    p.add_argument("--layered", action="store_true")
    p.add_argument("--plain", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("verify", help="round-trip fields through encode and both decoders")
    grid(p)
    p.add_argument("--random", type=int, metavar="N",
                   help="sample N random fields with dims and colours bounded by --dims/--colors")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=20000, help="max cells x colours per field")
    p.add_argument("--max-fields", type=int, default=200000)
    p.add_argument("--inject-fault", action="store_true", help="flip one bit of each k (checker self-test)")
    p.add_argument("--dump", help="directory for offending fields")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("classic-encode", help="106x17 bitmap -> k for the original formula")
    p.add_argument("input")
    p.add_argument("--palette")
    p.add_argument("-o", "--output")
    p.add_argument("--hex", action="store_true")
    p.set_defaults(func=cmd_classic_encode)

    p = sub.add_parser("classic-decode", help="k -> 106x17 bitmap")
    p.add_argument("kfile")
    p.add_argument("-o", "--output")
    p.add_argument("--plain", action="store_true", help="ASCII bitmap (P1)")
    p.set_defaults(func=cmd_classic_decode)

    p = sub.add_parser("classic-render", help="k -> scaled 106x17 raster")
    p.add_argument("kfile")
    p.add_argument("--scale", type=int, default=1)
    p.add_argument("-o", "--output")
    p.add_argument("--plain", action="store_true")
    p.set_defaults(func=cmd_classic_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvariantViolation as exc:
        log(f"tupperk: internal invariant violated: {exc}")
        return EXIT_INTERNAL
    except (ValueError, OSError) as exc:
        log(f"tupperk: error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
