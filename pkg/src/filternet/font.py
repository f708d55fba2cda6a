"""Tiny 5x7 bitmap font for chart labels. Glyph art, parsed at import."""
from __future__ import annotations

import numpy as np

_GLYPHS = {
    " ": "     |     |     |     |     |     |     ",
    "0": " ### |#   #|#  ##|# # #|##  #|#   #| ### ",
    "1": "  #  | ##  |  #  |  #  |  #  |  #  | ### ",
    "2": " ### |#   #|    #|   # |  #  | #   |#####",
    "3": "#####|    #|   # |  ## |    #|#   #| ### ",
    "4": "   # |  ## | # # |#  # |#####|   # |   # ",
    "5": "#####|#    |#### |    #|    #|#   #| ### ",
    "6": "  ## | #   |#    |#### |#   #|#   #| ### ",
    "7": "#####|    #|   # |  #  | #   | #   | #   ",
    "8": " ### |#   #|#   #| ### |#   #|#   #| ### ",
    "9": " ### |#   #|#   #| ####|    #|   # | ##  ",
    "A": " ### |#   #|#   #|#####|#   #|#   #|#   #",
    "B": "#### |#   #|#   #|#### |#   #|#   #|#### ",
    "C": " ### |#   #|#    |#    |#    |#   #| ### ",
    "D": "###  |#  # |#   #|#   #|#   #|#  # |###  ",
    "E": "#####|#    |#    |#### |#    |#    |#####",
    "F": "#####|#    |#    |#### |#    |#    |#    ",
    "G": " ### |#   #|#    |# ###|#   #|#   #| ####",
    "H": "#   #|#   #|#   #|#####|#   #|#   #|#   #",
    "I": " ### |  #  |  #  |  #  |  #  |  #  | ### ",
    "J": "  ###|   # |   # |   # |   # |#  # | ##  ",
    "K": "#   #|#  # |# #  |##   |# #  |#  # |#   #",
    "L": "#    |#    |#    |#    |#    |#    |#####",
    "M": "#   #|## ##|# # #|# # #|#   #|#   #|#   #",
    "N": "#   #|##  #|# # #|#  ##|#   #|#   #|#   #",
    "O": " ### |#   #|#   #|#   #|#   #|#   #| ### ",
    "P": "#### |#   #|#   #|#### |#    |#    |#    ",
    "Q": " ### |#   #|#   #|#   #|# # #|#  # | ## #",
    "R": "#### |#   #|#   #|#### |# #  |#  # |#   #",
    "S": " ####|#    |#    | ### |    #|    #|#### ",
    "T": "#####|  #  |  #  |  #  |  #  |  #  |  #  ",
    "U": "#   #|#   #|#   #|#   #|#   #|#   #| ### ",
    "V": "#   #|#   #|#   #|#   #|#   #| # # |  #  ",
    "W": "#   #|#   #|#   #|# # #|# # #|# # #| # # ",
    "X": "#   #|#   #| # # |  #  | # # |#   #|#   #",
    "Y": "#   #|#   #| # # |  #  |  #  |  #  |  #  ",
    "Z": "#####|    #|   # |  #  | #   |#    |#####",
    "a": "     |     | ### |    #| ####|#   #| ####",
    "b": "#    |#    |#### |#   #|#   #|#   #|#### ",
    "c": "     |     | ### |#    |#    |#   #| ### ",
    "d": "    #|    #| ####|#   #|#   #|#   #| ####",
    "e": "     |     | ### |#   #|#####|#    | ### ",
    "f": "  ## | #  #| #   |###  | #   | #   | #   ",
    "g": "     |     | ####|#   #| ####|    #| ### ",
    "h": "#    |#    |#### |#   #|#   #|#   #|#   #",
    "i": "  #  |     | ##  |  #  |  #  |  #  | ### ",
    "j": "   # |     |  ## |   # |   # |#  # | ##  ",
    "k": "#    |#    |#  # |# #  |##   |# #  |#  # ",
    "l": " ##  |  #  |  #  |  #  |  #  |  #  | ### ",
    "m": "     |     |## # |# # #|# # #|# # #|# # #",
    "n": "     |     |#### |#   #|#   #|#   #|#   #",
    "o": "     |     | ### |#   #|#   #|#   #| ### ",
    "p": "     |     |#### |#   #|#### |#    |#    ",
    "q": "     |     | ####|#   #| ####|    #|    #",
    "r": "     |     |# ## |##   |#    |#    |#    ",
    "s": "     |     | ####|#    | ### |    #|#### ",
    "t": " #   | #   |###  | #   | #   | #  #|  ## ",
    "u": "     |     |#   #|#   #|#   #|#  ##| ## #",
    "v": "     |     |#   #|#   #|#   #| # # |  #  ",
    "w": "     |     |#   #|#   #|# # #|# # #| # # ",
    "x": "     |     |#   #| # # |  #  | # # |#   #",
    "y": "     |     |#   #|#   #| ####|    #| ### ",
    "z": "     |     |#####|   # |  #  | #   |#####",
    ".": "     |     |     |     |     |  ## |  ## ",
    ",": "     |     |     |     |  ## |  ## | #   ",
    ":": "     |  ## |  ## |     |  ## |  ## |     ",
    ";": "     |  ## |  ## |     |  ## |  ## | #   ",
    "-": "     |     |     |#####|     |     |     ",
    "_": "     |     |     |     |     |     |#####",
    "/": "    #|    #|   # |  #  | #   |#    |#    ",
    "(": "   # |  #  | #   | #   | #   |  #  |   # ",
    ")": " #   |  #  |   # |   # |   # |  #  | #   ",
    "%": "##   |##  #|   # |  #  | #   |#  ##|   ##",
    "+": "     |  #  |  #  |#####|  #  |  #  |     ",
    "=": "     |     |#####|     |#####|     |     ",
    "'": "  #  |  #  |     |     |     |     |     ",
    "!": "  #  |  #  |  #  |  #  |  #  |     |  #  ",
    "?": " ### |#   #|    #|   # |  #  |     |  #  ",
    "[": " ### | #   | #   | #   | #   | #   | ### ",
    "]": " ### |   # |   # |   # |   # |   # | ### ",
}

_FALLBACK = "#####|#   #|#   #|#   #|#   #|#   #|#####"

GLYPH_W = 5
GLYPH_H = 7
ADVANCE = 6  # glyph width plus one column of spacing


def _parse(art: str) -> np.ndarray:
    rows = art.split("|")
    grid = np.zeros((GLYPH_H, GLYPH_W), dtype=bool)
    for y, row in enumerate(rows):
        for x, ch in enumerate(row):
            grid[y, x] = ch == "#"
    return grid


_BITMAPS = {ch: _parse(art) for ch, art in _GLYPHS.items()}
_FALLBACK_BITMAP = _parse(_FALLBACK)


def text_width(text: str, scale: int = 1) -> int:
    if not text:
        return 0
    return (len(text) * ADVANCE - 1) * scale


def draw_text(buf: np.ndarray, x: int, y: int, text: str, color, scale: int = 1) -> None:
    """Stamp text into an RGB buffer at (x, y) top-left. Clips at edges."""
    h, w = buf.shape[:2]
    for ch in text:
        glyph = _BITMAPS.get(ch, _FALLBACK_BITMAP)
        for gy in range(GLYPH_H):
            for gx in range(GLYPH_W):
                if not glyph[gy, gx]:
                    continue
                y0 = y + gy * scale
                x0 = x + gx * scale
                y1 = min(y0 + scale, h)
                x1 = min(x0 + scale, w)
                if y0 < h and x0 < w and y1 > max(y0, 0) and x1 > max(x0, 0):
                    buf[max(y0, 0):y1, max(x0, 0):x1] = color
        x += ADVANCE * scale
