import numpy as np
import pytest

from filternet import font
from filternet.charts import (PALETTE, ChartSeries, render_heatmap,
                              render_line_chart, x_pixel, y_pixel)
from filternet.png import png_bytes, write_png
from helpers import decode_png, read_png


# -- png encoder ---------------------------------------------------------------

def test_png_rgb_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    px = rng.integers(0, 256, size=(9, 13, 3), dtype=np.uint8)
    p = tmp_path / "x.png"
    write_png(p, px)
    assert np.array_equal(read_png(p), px)


def test_png_grayscale_roundtrip():
    rng = np.random.default_rng(1)
    px = rng.integers(0, 256, size=(5, 7), dtype=np.uint8)
    assert np.array_equal(decode_png(png_bytes(px)), px)


def test_png_bytes_deterministic():
    px = np.arange(30, dtype=np.uint8).reshape(5, 6)
    assert png_bytes(px) == png_bytes(px)


def test_png_signature():
    px = np.zeros((2, 2), dtype=np.uint8)
    data = png_bytes(px)
    assert data[:8] == b"\x89PNG\r\n\x1a\n"
    assert b"IHDR" in data and b"IDAT" in data and data.endswith(
        b"IEND\xaeB`\x82")


def test_png_rejects_bad_shapes():
    with pytest.raises(ValueError):
        png_bytes(np.zeros((2, 2, 2), dtype=np.uint8))
    with pytest.raises(ValueError):
        png_bytes(np.zeros((0, 4), dtype=np.uint8))


# -- font ------------------------------------------------------------------

def test_text_width():
    assert font.text_width("abc") == 3 * font.ADVANCE - 1
    assert font.text_width("abc", scale=2) == 2 * (3 * font.ADVANCE - 1)
    assert font.text_width("") == 0


def test_draw_text_stamps_pixels():
    buf = np.zeros((20, 40, 3), dtype=np.uint8)
    font.draw_text(buf, 2, 2, "1.0", (255, 0, 0))
    assert (buf[:, :, 0] == 255).any()
    assert (buf[:, :, 1] == 0).all()


def test_draw_text_clips_at_edges():
    buf = np.zeros((10, 10, 3), dtype=np.uint8)
    font.draw_text(buf, -3, -3, "88", (255, 255, 255))
    font.draw_text(buf, 8, 8, "88", (255, 255, 255))  # runs off the corner


def test_unknown_glyph_renders_box():
    buf = np.zeros((12, 12, 3), dtype=np.uint8)
    font.draw_text(buf, 1, 1, "é", (255, 255, 255))
    assert (buf > 0).any()


# -- line charts -------------------------------------------------------------

def test_series_validation():
    with pytest.raises(ValueError):
        ChartSeries("a", (1, 2), (1.0,))
    with pytest.raises(ValueError):
        ChartSeries("a", (1,), (1.0,))
    with pytest.raises(ValueError):
        ChartSeries("a", (2, 1), (1.0, 2.0))
    with pytest.raises(ValueError):
        ChartSeries("a", (1, 2), (1.0, float("nan")))


def test_chart_writes_png_deterministically(tmp_path):
    s = [ChartSeries("train", (1, 2, 3), (0.2, 0.5, 0.9)),
         ChartSeries("validation", (1, 2, 3), (0.3, 0.4, 0.7))]
    p1, p2 = tmp_path / "a.png", tmp_path / "b.png"
    render_line_chart(s, p1)
    render_line_chart(s, p2)
    b1, b2 = p1.read_bytes(), p2.read_bytes()
    assert b1 == b2
    img = read_png(p1)
    assert img.shape == (600, 800, 3)


def test_constant_series_sits_mid_axis(tmp_path):
    p = tmp_path / "flat.png"
    render_line_chart([ChartSeries("flat", (0, 1, 2), (0.5, 0.5, 0.5))], p)
    img = read_png(p)
    # padded range 0..1 maps y=0.5 to the vertical middle of the plot
    top, bottom = 20, 600 - 46
    row = y_pixel(0.5, 0.0, 1.0, top, bottom)
    color = PALETTE[0]
    # columns well left of the legend, so only the polyline matches
    body = img[:, 100:600]
    line_rows = np.where((body == color).all(axis=2).any(axis=1))[0]
    assert row in line_rows
    assert line_rows.max() - line_rows.min() <= 1


def test_two_series_get_distinct_colors(tmp_path):
    p = tmp_path / "two.png"
    render_line_chart([ChartSeries("a", (0, 1), (0.0, 1.0)),
                       ChartSeries("b", (0, 1), (1.0, 0.0))], p)
    img = read_png(p)
    for color in PALETTE[:2]:
        assert (img == color).all(axis=2).any(), color


def test_chart_rejects_empty_and_tiny():
    with pytest.raises(ValueError):
        render_line_chart([], "unused.png")
    with pytest.raises(ValueError):
        render_line_chart([ChartSeries("a", (0, 1), (0, 1))], "unused.png",
                          width=50, height=30)


def test_pixel_transform_oracle():
    # x: lo maps to the left edge, hi to the right edge
    assert x_pixel(0.0, 0.0, 1.0, 70, 779) == 70
    assert x_pixel(1.0, 0.0, 1.0, 70, 779) == 779
    # y inverts: lo maps to the bottom, hi to the top
    assert y_pixel(0.0, 0.0, 1.0, 20, 554) == 554
    assert y_pixel(1.0, 0.0, 1.0, 20, 554) == 20
    assert y_pixel(0.5, 0.0, 1.0, 20, 554) == 554 - 267


# -- heatmap -----------------------------------------------------------------

def test_heatmap_diagonal_darkest(tmp_path):
    cm = np.array([[50, 2, 1], [3, 40, 0], [1, 2, 60]])
    p = tmp_path / "hm.png"
    render_heatmap(cm, ("Normal", "COVID-19", "Pneumonia"), p)
    img = read_png(p)
    left, top, cw, ch = 110, 50, 110, 80
    # sample cell interiors away from the centered count text
    def cell_color(i, j):
        return img[top + i * ch + 6, left + j * cw + 6]

    dark = cell_color(2, 2)  # count 60 = vmax -> darkest
    light = cell_color(1, 2)  # count 0 -> white
    assert dark.tolist() == [8, 48, 107]
    assert light.tolist() == [255, 255, 255]
    # monotone: higher count is never lighter
    assert cell_color(0, 0).sum() < cell_color(0, 1).sum()


def test_heatmap_scales_with_max(tmp_path):
    p = tmp_path / "hm2.png"
    render_heatmap(np.array([[4, 0], [0, 2]]), ("A", "B"), p)
    img = read_png(p)
    half = img[50 + 80 + 6, 110 + 110 + 6]  # count 2 of vmax 4
    expect = np.rint(np.array([255, 255, 255])
                     + 0.5 * (np.array([8, 48, 107]) - 255.0))
    assert half.tolist() == expect.astype(int).tolist()


def test_heatmap_validation(tmp_path):
    with pytest.raises(ValueError):
        render_heatmap(np.zeros((2, 3)), ("A", "B"), tmp_path / "x.png")
    with pytest.raises(ValueError):
        render_heatmap(np.zeros((2, 2)) - 1, ("A", "B"), tmp_path / "x.png")
    with pytest.raises(ValueError):
        render_heatmap(np.zeros((3, 3)), ("A", "B"), tmp_path / "x.png")
