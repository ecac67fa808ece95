from pathlib import Path

import numpy as np
import pytest

from tupperk.cli import main
from tupperk.codec import ColorField, encode, make_params
from tupperk.evaluate import classic_encode
from tupperk.formats import Palette, emit_k, emit_pnm, emit_voxels, field_to_pixels, parse_k, parse_pnm, parse_voxels

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def kfile(tmp_path):
    def make(k, name="k.txt"):
        path = tmp_path / name
        path.write_text(emit_k(k))
        return path
    return make


def test_encode_single_pixel(tmp_path, capsys):
    img = tmp_path / "one.pbm"
    img.write_bytes(b"P1\n1 1\n1\n")
    code, out, err = run(capsys, "encode", img, "--dims", "1,1", "--colors", "1")
    assert code == 0 and out == "6\n"
    assert "bits=3" in err and "digits=1" in err


def test_encode_blank_hex(tmp_path, capsys):
    img = tmp_path / "blank.pbm"
    img.write_bytes(b"P1\n2 2\n0 0\n0 0\n")
    out_file = tmp_path / "k"
    code, out, _ = run(capsys, "encode", img, "--dims", "2,2", "--colors", "1", "--hex", "-o", out_file)
    assert code == 0 and out == "" and out_file.read_text() == "0x0\n"


def test_encode_voxel_file_without_params(tmp_path, capsys):
    rng = np.random.default_rng(1)
    p = make_params(3, 2, [2, 3, 4])
    field = ColorField(p, rng.integers(0, 3, size=p.dims))
    path = tmp_path / "f.nvox"
    path.write_bytes(emit_voxels(field))
    code, out, _ = run(capsys, "encode", path)
    assert code == 0 and parse_k(out) == encode(field).k


def test_decode_single_pixel(kfile, capsys):
    code, out, _ = run(capsys, "decode", kfile(6), "--dims", "1,1", "--colors", "1", "--plain")
    assert code == 0
    assert out == "P3\n1 1\n255\n0 0 0\n"


def test_decode_blank(kfile, capsys, tmp_path):
    out_file = tmp_path / "blank.ppm"
    code, _, _ = run(capsys, "decode", kfile(0), "--dims", "3,2", "--colors", "2", "-o", out_file)
    assert code == 0
    assert (parse_pnm(out_file.read_bytes()).pixels == 255).all()


def test_decode_voxel_and_image(kfile, tmp_path, capsys):
    rng = np.random.default_rng(3)
    p = make_params(2, 2, [4, 3])
    field = ColorField(p, rng.integers(0, 3, size=p.dims))
    vox, img = tmp_path / "o.nvox", tmp_path / "o.ppm"
    code, _, _ = run(capsys, "decode", kfile(encode(field).k), "--dims", "4,3", "--colors", "2",
                     "--format", "voxel", "-o", vox, "--image", img)
    assert code == 0
    assert parse_voxels(vox.read_bytes()) == field
    assert np.array_equal(parse_pnm(img.read_bytes()).pixels, field_to_pixels(field, Palette.default(2)))


def test_decode_multicolour_cell_fails(kfile, capsys, tmp_path):
    code, _, err = run(capsys, "decode", kfile(24), "--dims", "1,1", "--colors", "2")
    assert code == 1 and "several colours" in err
    code, _, _ = run(capsys, "decode", kfile(24), "--dims", "1,1", "--colors", "2", "--layered",
                     "-o", tmp_path / "out.ppm")
    assert code == 0


def test_corpus_round_trip(tmp_path, capsys):
    """encode then decode reproduces every file byte for byte."""
    rng = np.random.default_rng(6)
    palette = tmp_path / "pal"
    palette.write_text("0 255 255 255\n1 0 0 255\n2 255 0 0\n3 0 160 0\n")
    pal = Palette(((255, 255, 255), (0, 0, 255), (255, 0, 0), (0, 160, 0)))
    for i in range(5):
        dims = [int(v) for v in rng.integers(1, 9, size=2)]
        field = ColorField(make_params(2, 3, dims), rng.integers(0, 4, size=dims))
        src = tmp_path / f"in{i}.ppm"
        src.write_bytes(emit_pnm(field_to_pixels(field, pal), "P6"))
        k_path, back = tmp_path / f"k{i}", tmp_path / f"out{i}.ppm"
        grid = ["--dims", f"{dims[0]},{dims[1]}", "--colors", "3", "--palette", palette]
        assert run(capsys, "encode", src, *grid, "-o", k_path)[0] == 0
        assert run(capsys, "decode", k_path, *grid, "-o", back)[0] == 0
        assert back.read_bytes() == src.read_bytes()


@pytest.mark.parametrize("k, point, expected", [
    (6, "0.5,6.5", "1 (painted)\n"),
    (6, "0.5,7.5", "0 (unpainted)\n"),
    (0, "0.5,0.5", "0 (unpainted)\n"),
])
def test_eval(kfile, capsys, k, point, expected):
    code, out, _ = run(capsys, "eval", kfile(k), "--dims", "1,1", "--colors", "1",
                       "--point", point, "--color", "1", "--fast")
    assert code == 0 and out == expected


@pytest.mark.parametrize("point", ["0.1,6.5", "0.5", "a,6", "0.5,6.5,1"])
def test_eval_rejects_bad_points(kfile, capsys, point):
    code, _, err = run(capsys, "eval", kfile(6), "--dims", "1,1", "--colors", "1", "--point", point, "--color", "1")
    assert code == 1 and "--point" in err


def test_eval_reports_evaluator_disagreement(kfile, capsys, monkeypatch):
    import tupperk.cli as cli
    monkeypatch.setattr(cli, "decode_cell", lambda *a: False)
    code, _, err = run(capsys, "eval", kfile(6), "--dims", "1,1", "--colors", "1",
                       "--point", "0.5,6.5", "--color", "1", "--fast")
    assert code == 2 and "invariant" in err


def test_render_evaluators_produce_identical_files(tmp_path, capsys):
    k = DATA / "test_card.k"
    grid = ["--dims", "50,15", "--colors", "3", "--palette", DATA / "test_card.palette"]
    fast, literal = tmp_path / "fast.ppm", tmp_path / "literal.ppm"
    assert run(capsys, "render", k, *grid, "--scale", "2", "--evaluator", "fast", "-o", fast)[0] == 0
    assert run(capsys, "render", k, *grid, "--scale", "2", "--evaluator", "literal", "-o", literal)[0] == 0
    assert fast.read_bytes() == literal.read_bytes()
    assert parse_pnm(fast.read_bytes()).pixels.shape == (30, 100, 3)


def test_render_slice_of_3d(kfile, tmp_path, capsys):
    rng = np.random.default_rng(12)
    p = make_params(3, 2, [3, 2, 4])
    field = ColorField(p, rng.integers(0, 3, size=p.dims))
    out = tmp_path / "s.ppm"
    code, _, _ = run(capsys, "render", kfile(encode(field).k), "--dims", "3,2,4", "--colors", "2",
                     "--slice", "x2=1", "--check", "-o", out)
    assert code == 0
    pixels = parse_pnm(out.read_bytes()).pixels
    pal = Palette.default(2)
    # brute force: free axes x1 (rightward) and x3 (upward)
    for x1 in range(3):
        for x3 in range(4):
            assert tuple(pixels[3 - x3, x1]) == pal.entries[field.cells[x1, 1, x3]]


def test_render_rejects_missing_slice(kfile, capsys):
    code, _, err = run(capsys, "render", kfile(0), "--dims", "2,2,2", "--colors", "1")
    assert code == 1 and "fixed axes" in err


def test_verify_exhaustive(capsys):
    code, out, _ = run(capsys, "verify", "--dims", "2,2", "--colors", "2")
    assert code == 0 and "fields=81" in out and "mismatches=0" in out


def test_verify_random(capsys):
    code, out, _ = run(capsys, "verify", "--dims", "4,4,4", "--colors", "3", "--random", "200", "--seed", "1")
    assert code == 0 and "fields=200" in out and "mismatches=0" in out


def test_verify_detects_injected_fault(capsys, tmp_path):
    code, out, err = run(capsys, "verify", "--dims", "2,2", "--colors", "2", "--inject-fault", "--dump", tmp_path)
    assert code == 2 and "mismatches=0" not in out
    assert "field (NVOX, hex)=4e564f58" in err
    dumped = sorted(tmp_path.glob("mismatch*.nvox"))
    assert dumped and parse_voxels(dumped[0].read_bytes()).params.dims == (2, 2)


def test_verify_refuses_oversized_runs(capsys):
    assert run(capsys, "verify", "--dims", "6,6", "--colors", "3")[0] == 1
    assert run(capsys, "verify", "--dims", "50,50", "--colors", "9", "--random", "1")[0] == 1


def test_classic_commands(tmp_path, capsys):
    rng = np.random.default_rng(13)
    bits = rng.random((106, 17)) < 0.4
    img = tmp_path / "c.pbm"
    img.write_bytes(emit_pnm(bits.T[::-1], "P4"))
    code, out, _ = run(capsys, "classic-encode", img)
    assert code == 0 and parse_k(out) == classic_encode(bits)
    kpath = tmp_path / "c.k"
    kpath.write_text(out)
    back = tmp_path / "back.pbm"
    assert run(capsys, "classic-decode", kpath, "-o", back)[0] == 0
    assert back.read_bytes() == img.read_bytes()
    big = tmp_path / "big.pbm"
    assert run(capsys, "classic-render", kpath, "--scale", "3", "-o", big)[0] == 0
    assert parse_pnm(big.read_bytes()).pixels.shape == (51, 318)


def test_classic_single_pixel(tmp_path, capsys):
    bits = np.zeros((17, 106), dtype=bool)
    bits[16, 0] = True
    img = tmp_path / "one.pbm"
    img.write_bytes(emit_pnm(bits, "P1"))
    assert run(capsys, "classic-encode", img)[1] == "17\n"


def test_classic_encode_wrong_size(tmp_path, capsys):
    img = tmp_path / "small.pbm"
    img.write_bytes(b"P1\n2 2\n0000")
    code, _, err = run(capsys, "classic-encode", img)
    assert code == 1 and "small.pbm" in err


@pytest.mark.parametrize("argv", [
    ["encode", "missing.ppm", "--dims", "2,2", "--colors", "1"],
    ["decode", "missing.k", "--dims", "2,2", "--colors", "1"],
    ["decode", "{k}", "--dims", "2", "--colors", "1"],
    ["decode", "{k}", "--dims", "2,x", "--colors", "1"],
    ["encode", "{k}", "--dims", "2,2"],
])
def test_input_errors_exit_one(kfile, capsys, argv):
    k = kfile(6)
    code, out, err = run(capsys, *[a.format(k=k) for a in argv])
    assert code == 1 and out == "" and "error" in err


def test_bad_k_file_names_path(tmp_path, capsys):
    bad = tmp_path / "bad.k"
    bad.write_text("12z\n")
    code, _, err = run(capsys, "decode", bad, "--dims", "1,1", "--colors", "1")
    assert code == 1 and "bad.k" in err and "invalid digit" in err
