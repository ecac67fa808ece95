import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tupperk.codec import ColorField, EncodedNumber, decode_cell, encode, make_params
from tupperk.dyadic import Dyadic
from tupperk.evaluate import (InvariantViolation, bit_extract, check_window_split, classic_encode,
                              eval_classic, eval_f, is_painted)


def fraction_f(params, k, point, i):
    """The colour formula evaluated with Fractions, independent of Dyadic."""
    R, n = params.radix, params.n
    xs = [Fraction(x) for x in point]
    xn = xs[-1]
    exponent = -R * (math.floor(xn) % R) - i
    for idx, x in enumerate(xs[:-1]):
        exponent -= R ** (n - idx) * math.floor(x)
    t = math.floor(xn / R) * Fraction(2) ** exponent
    return math.floor(t - 2 * math.floor(t / 2))


def fraction_classic(point):
    x, y = (Fraction(c) for c in point)
    t = math.floor(y / 17) * Fraction(2) ** (-17 * math.floor(x) - math.floor(y) % 17)
    return math.floor(t - 2 * math.floor(t / 2))


# -- bit extraction --------------------------------------------------------

@pytest.mark.parametrize("exponents, expected", [([-2, 0, 5], True), ([-1, 3], False), ([0], True), ([], False)])
def test_bit_extract_examples(exponents, expected):
    assert bit_extract(exponents) is expected


def test_bit_extract_rejects_duplicates():
    with pytest.raises(ValueError, match="distinct"):
        bit_extract([1, 1])


@given(st.sets(st.integers(-64, 64), min_size=1, max_size=20))
def test_bit_extract_detects_zero(exps):
    assert bit_extract(sorted(exps)) == (0 in exps)


@given(st.sets(st.integers(-64, -1), min_size=1, max_size=20))
def test_bit_extract_all_negative(exps):
    assert not bit_extract(sorted(exps))


@given(st.sets(st.integers(1, 64), min_size=1, max_size=20))
def test_bit_extract_all_positive(exps):
    assert not bit_extract(sorted(exps))


# -- the colour formulas ---------------------------------------------------

P1 = make_params(2, 1, [1, 1])


@pytest.mark.parametrize("point, expected", [(("0.5", "6.5"), 1), (("0.5", "7.5"), 0), (("0", "6"), 1), (("0.75", "6.875"), 1)])
def test_eval_f_examples(point, expected):
    value = eval_f(P1, EncodedNumber(6, P1), [Dyadic.parse(c) for c in point], 1)
    assert value == expected
    assert value == fraction_f(P1, 6, [Fraction(c) for c in point], 1)


def test_eval_f_zero_k_is_blank():
    p = make_params(3, 2, [2, 3, 2])
    for cell in p.cells():
        for j in (1, 2):
            pt = [Dyadic(2 * c + 1, -1) for c in cell]
            assert eval_f(p, 0, pt, j) == 0


def test_eval_f_accepts_points_outside_window():
    # evaluated as written, no range enforcement
    assert eval_f(P1, 6, [Dyadic(-5), Dyadic(10**6)], 1) in (0, 1)


def test_eval_f_checks_point_length_and_colour():
    with pytest.raises(ValueError):
        eval_f(P1, 6, [Dyadic(0)], 1)
    with pytest.raises(ValueError):
        eval_f(P1, 6, [Dyadic(0), Dyadic(6)], 2)


def test_eval_f_worked_instance_matches_fraction_oracle():
    p = make_params(2, 3, [50, 15])
    rng = np.random.default_rng(3)
    f = ColorField(p, rng.integers(0, 4, size=(50, 15)))
    enc = encode(f)
    for _ in range(40):
        x, y, i = int(rng.integers(0, 50)), int(rng.integers(0, 15)), int(rng.integers(1, 4))
        pt = [Fraction(2 * x + 1, 2), enc.k + y + Fraction(1, 4)]
        got = eval_f(p, enc, [Dyadic.from_value(c) for c in pt], i)
        assert got == fraction_f(p, enc.k, pt, i)
        assert is_painted(got) == (f.cells[x, y] == i)


fields_small = st.integers(2, 3).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.integers(1, 3), min_size=n, max_size=n), st.integers(1, 3), st.randoms(use_true_random=False)))


@settings(max_examples=40, deadline=None)
@given(fields_small)
def test_literal_evaluator_agrees_with_bit_test(args):
    n, dims, m, rnd = args
    p = make_params(n, m, dims)
    cells = np.array([rnd.randint(0, m) for _ in range(p.cell_count)]).reshape(p.dims)
    enc = encode(ColorField(p, cells))
    for cell in p.cells():
        for j in range(1, m + 1):
            expected = decode_cell(enc, cell, j)
            assert expected == (cells[cell] == j)
            for _ in range(3):
                offs = [Dyadic(rnd.randrange(0, 1 << 12), -12) for _ in range(n)]
                pt = [Dyadic(c) + o for c, o in zip(cell, offs)]
                pt[-1] = pt[-1] + enc.k
                value = eval_f(p, enc, pt, j)
                assert value in (0, 1)
                assert is_painted(value) == expected


def test_window_split_check_raises_on_inconsistent_split():
    p = make_params(2, 1, [1, 1])
    enc = EncodedNumber(6, p)
    check_window_split(enc, Dyadic.parse("6.5"), 2, 0)
    with pytest.raises(InvariantViolation):
        check_window_split(enc, Dyadic.parse("6.5"), 3, 0)
    with pytest.raises(InvariantViolation):
        check_window_split(enc, Dyadic.parse("6.5"), 2, 1)
    # outside the window nothing is asserted
    check_window_split(enc, Dyadic.parse("7.5"), 99, 99)


# -- the original formula --------------------------------------------------

@pytest.mark.parametrize("k, point, expected", [(17, (0, 17), 1), (17, (1, 17), 0), (0, (3, 5), 0), (0, (105, 16), 0)])
def test_eval_classic_examples(k, point, expected):
    assert eval_classic(k, point) == expected == fraction_classic(point)


def test_classic_encode_examples():
    blank = np.zeros((106, 17), dtype=bool)
    assert classic_encode(blank) == 0
    one = blank.copy()
    one[0, 0] = True
    assert classic_encode(one) == 17
    other = blank.copy()
    other[1, 0] = True
    assert classic_encode(other) == 17 * 2**17 == 2228224


def test_classic_encode_rejects_wrong_shape():
    with pytest.raises(ValueError):
        classic_encode(np.zeros((17, 106), dtype=bool))


def test_classic_encode_matches_bit_layout():
    rng = np.random.default_rng(11)
    bits = rng.random((106, 17)) < 0.3
    expected = 17 * sum(2 ** (17 * x + y) for x in range(106) for y in range(17) if bits[x, y])
    assert classic_encode(bits) == expected
    k = classic_encode(bits)
    for _ in range(30):
        x, y = int(rng.integers(0, 106)), int(rng.integers(0, 17))
        assert is_painted(eval_classic(k, (Dyadic(2 * x + 1, -1), Dyadic(2 * (k + y) + 1, -1)))) == bits[x, y]
