import colorsys
import random

import pytest
from hypothesis import given, strategies as st

from wcagfix.color import (BLACK, WHITE, Rgb, contrast_ratio, parse_color, relative_luminance,
                           repair_contrast, repair_contrast_quantized, to_hsl)
from wcagfix.errors import ContrastUnreachable, UnparsableColor


# Independent oracle: the WCAG formulas written out longhand.
def oracle_luminance(r, g, b):
    def lin(c):
        v = c / 255
        return v / 12.92 if v <= 0.03928 else ((v + 0.055) / 1.055) ** 2.4
    return 0.2126 * lin(r) + 0.7152 * lin(g) + 0.0722 * lin(b)


def oracle_ratio(c1, c2):
    l1, l2 = oracle_luminance(*c1), oracle_luminance(*c2)
    return (max(l1, l2) + 0.05) / (min(l1, l2) + 0.05)


def hue_distance(a, b):
    d = abs(a - b) % 360
    return min(d, 360 - d)


def test_parse_color_forms():
    assert parse_color("#fff") == (255, 255, 255)
    assert parse_color("#FFFFFF") == (255, 255, 255)
    assert parse_color("rgb(118,118,118)") == (118, 118, 118)
    assert parse_color("RGB( 1, 2, 3 )") == (1, 2, 3)
    assert parse_color("Navy") == (0, 0, 128)
    assert parse_color("rgb(100%, 0%, 0%)") == (255, 0, 0)


def test_parse_color_alpha_composites_over_white():
    c = parse_color("rgba(0, 0, 0, 0.5)")
    assert c == pytest.approx((127.5, 127.5, 127.5))


@pytest.mark.parametrize("bad", ["#76x", "#12345", "rgb(1,2)", "rgb(300,0,0)", "blurple", ""])
def test_parse_color_rejects(bad):
    with pytest.raises(UnparsableColor):
        parse_color(bad)


def test_luminance_endpoints():
    assert relative_luminance(BLACK) == 0.0
    assert relative_luminance(WHITE) == 1.0
    assert relative_luminance(Rgb(255, 0, 0)) == pytest.approx(0.2126, abs=1e-12)


def test_contrast_examples():
    assert contrast_ratio(BLACK, WHITE) == 21.0
    assert contrast_ratio(Rgb(40, 90, 200), Rgb(40, 90, 200)) == 1.0
    grey = Rgb(118, 118, 118)
    assert contrast_ratio(grey, WHITE) == pytest.approx(oracle_ratio(grey, WHITE), abs=1e-12)
    assert contrast_ratio(grey, WHITE) == pytest.approx(4.54, abs=0.01)
    assert contrast_ratio(parse_color("#999"), WHITE) == pytest.approx(2.85, abs=0.01)


_channel = st.integers(0, 255)
_rgb = st.tuples(_channel, _channel, _channel)


@given(_rgb, _rgb)
def test_ratio_symmetric_and_bounded(a, b):
    r = contrast_ratio(Rgb(*a), Rgb(*b))
    assert r == contrast_ratio(Rgb(*b), Rgb(*a))
    assert 1.0 <= r <= 21.0
    assert r == pytest.approx(oracle_ratio(a, b), rel=1e-12)


@given(_rgb, st.integers(0, 2), st.integers(1, 255))
def test_luminance_monotone(c, channel, bump):
    raised = list(c)
    raised[channel] = min(255, raised[channel] + bump)
    assert relative_luminance(Rgb(*raised)) >= relative_luminance(Rgb(*c))


def test_repair_unchanged_when_passing():
    fg = Rgb(60, 60, 60)
    assert contrast_ratio(fg, WHITE) > 7
    assert repair_contrast(fg, WHITE, 4.5) == fg


def test_repair_white_on_white_darkens():
    out = repair_contrast(WHITE, WHITE, 4.5)
    assert contrast_ratio(out, WHITE) >= 4.5
    assert max(out) - min(out) < 1e-9  # still achromatic
    assert out[0] < 255


def test_repair_red_keeps_hue():
    fg = Rgb(200, 0, 0)
    # (200, 0, 0) already reaches 6.08:1 on white, so 4.5 leaves it alone
    assert oracle_ratio(fg, WHITE) == pytest.approx(6.08, abs=0.01)
    assert repair_contrast(fg, WHITE, 4.5) == fg
    out = repair_contrast(fg, WHITE, 7.0)
    assert contrast_ratio(out, WHITE) >= 7.0
    assert relative_luminance(out) < relative_luminance(fg)
    h_in = colorsys.rgb_to_hls(*(c / 255 for c in fg))[0] * 360
    h_out = colorsys.rgb_to_hls(*(c / 255 for c in out))[0] * 360
    assert hue_distance(h_in, h_out) < 1.0


def test_repair_is_minimal_lightness_move():
    # a slightly smaller move in the chosen direction must fail the target
    fg, bg = Rgb(120, 160, 220), Rgb(255, 255, 255)
    out = repair_contrast(fg, bg, 4.5)
    h, s, l_in = to_hsl(fg)
    _, _, l_out = to_hsl(out)
    step = (l_out - l_in) * (1 - 1 / 255)
    r, g, b = colorsys.hls_to_rgb(h / 360, l_in + step, s)
    assert contrast_ratio(Rgb(r * 255, g * 255, b * 255), bg) < 4.5


def test_repair_picks_nearer_direction():
    # mid grey on mid grey: lighter or darker both work; result is the smaller move
    fg, bg = Rgb(128, 128, 128), Rgb(120, 120, 120)
    out = repair_contrast(fg, bg, 3.0)
    assert contrast_ratio(out, bg) >= 3.0
    _, _, l_in = to_hsl(fg)
    # brute-force scan of lightness in 1/1000 steps for the nearest passing value
    best = None
    for i in range(1001):
        l = i / 1000
        c = Rgb(l * 255, l * 255, l * 255)
        if contrast_ratio(c, bg) >= 3.0 and (best is None or abs(l - l_in) < abs(best - l_in)):
            best = l
    assert abs(to_hsl(out)[2] - best) <= 1e-3 + 1e-9


def test_repair_unreachable_and_bad_target():
    with pytest.raises(ContrastUnreachable):
        repair_contrast(Rgb(100, 100, 100), Rgb(118, 118, 118), 5.0)
    with pytest.raises(ValueError):
        repair_contrast(BLACK, WHITE, 0.5)
    with pytest.raises(ValueError):
        repair_contrast(BLACK, WHITE, 22)


def test_repair_random_cases():
    rng = random.Random(11)
    checked = 0
    while checked < 1000:
        fg = Rgb(*(rng.randrange(256) for _ in range(3)))
        bg = Rgb(*(rng.randrange(256) for _ in range(3)))
        best = max(oracle_ratio(BLACK, bg), oracle_ratio(WHITE, bg))
        target = rng.uniform(1.0, min(best, 21.0))
        out = repair_contrast(fg, bg, target)
        assert oracle_ratio(out, bg) >= target - 1e-9
        h, s, _ = to_hsl(fg)
        h2, s2, l2 = to_hsl(out)
        chroma = max(fg) - min(fg)
        if chroma > 0 and 1e-6 < l2 < 1 - 1e-6:
            assert hue_distance(h, h2) < 1.0
        checked += 1


def test_quantized_repair_meets_target():
    rng = random.Random(5)
    for _ in range(200):
        fg = Rgb(*(rng.randrange(256) for _ in range(3)))
        out = repair_contrast_quantized(fg, WHITE, 4.5)
        assert all(float(c).is_integer() for c in out)
        assert contrast_ratio(out, WHITE) >= 4.5


def test_quantized_repair_of_light_grey_is_767676():
    assert repair_contrast_quantized(parse_color("#aaaaaa"), WHITE, 4.5).hex() == "#767676"
