"""Draw the 50x15 three-colour test card and freeze its golden k.

k is computed here by summing powers of two straight from the encoding
formula, without touching tupperk.codec, so the committed value is an
independent oracle for ``encode``.

    python scripts/make_test_card.py tests/data
"""

import sys
from pathlib import Path

WIDTH, HEIGHT, COLORS = 50, 15, 3
BG, BLUE, RED, GREEN = (255, 255, 255), (0, 0, 255), (255, 0, 0), (0, 160, 0)
PALETTE = [BG, BLUE, RED, GREEN]

FONT = {
    "T": ["###", ".#.", ".#.", ".#.", ".#."],
    "U": ["#.#", "#.#", "#.#", "#.#", "###"],
    "P": ["##.", "#.#", "##.", "#..", "#.."],
    "E": ["###", "#..", "##.", "#..", "###"],
    "R": ["##.", "#.#", "##.", "#.#", "#.#"],
}


def draw():
    """Colour index per cell, ``card[x][y]`` with y counted upward."""
    card = [[0] * HEIGHT for _ in range(WIDTH)]
    for x in range(WIDTH):
        card[x][0] = card[x][HEIGHT - 1] = 1
    for y in range(HEIGHT):
        card[0][y] = card[WIDTH - 1][y] = 1
    x0 = 3
    for ch in "TUPPER":
        for row, bits in enumerate(FONT[ch]):
            for dx, b in enumerate(bits):
                if b == "#":
                    card[x0 + dx][HEIGHT - 4 - row] = 2
        x0 += 4
    for x in range(30, 47):
        for y in range(2, 6):
            if (x + y) % 3:
                card[x][y] = 3
    for i in range(2, 12):
        card[2 * i][2 + (i % 3)] = 2
    # top-right corner: the highest-numbered bit of the whole layout
    card[WIDTH - 1][HEIGHT - 1] = 3
    card[0][0] = 3
    return card


def golden_k(card):
    R = WIDTH + HEIGHT + COLORS
    total = 0
    for x in range(WIDTH):
        for y in range(HEIGHT):
            j = card[x][y]
            if j:
                total += 2 ** (R**2 * x + R * y + j)
    return R * total


def main(out):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    card = draw()
    rows = []
    for y in reversed(range(HEIGHT)):
        rows.append(b"".join(bytes(PALETTE[card[x][y]]) for x in range(WIDTH)))
    (out / "test_card.ppm").write_bytes(f"P6\n{WIDTH} {HEIGHT}\n255\n".encode() + b"".join(rows))
    (out / "test_card.palette").write_text("".join(f"{i} {r} {g} {b}\n" for i, (r, g, b) in enumerate(PALETTE)))
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    (out / "test_card.k").write_text(f"{golden_k(card)}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data")
