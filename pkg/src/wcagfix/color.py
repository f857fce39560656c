"""sRGB color parsing, WCAG luminance/contrast, and hue-preserving contrast repair."""
from __future__ import annotations

import colorsys
import re
from typing import NamedTuple

from .errors import ContrastUnreachable, UnparsableColor


class Rgb(NamedTuple):
    """sRGB color with channels in [0, 255].

    Channels may be fractional: repaired colors keep full precision so hue is
    preserved exactly. Use :meth:`hex` for a CSS literal.
    """

    r: float
    g: float
    b: float

    def rounded(self):
        return Rgb(*(int(round(min(255.0, max(0.0, c)))) for c in self))

    def hex(self):
        r, g, b = self.rounded()
        return f"#{r:02x}{g:02x}{b:02x}"


BLACK = Rgb(0, 0, 0)
WHITE = Rgb(255, 255, 255)

NAMED_COLORS = {
    "black": (0, 0, 0),
    "silver": (192, 192, 192),
    "gray": (128, 128, 128),
    "white": (255, 255, 255),
    "maroon": (128, 0, 0),
    "red": (255, 0, 0),
    "purple": (128, 0, 128),
    "fuchsia": (255, 0, 255),
    "green": (0, 128, 0),
    "lime": (0, 255, 0),
    "olive": (128, 128, 0),
    "yellow": (255, 255, 0),
    "navy": (0, 0, 128),
    "blue": (0, 0, 255),
    "teal": (0, 128, 128),
    "aqua": (0, 255, 255),
}

_HEX_RE = re.compile(r"^#([0-9a-f]{3}|[0-9a-f]{6})$")
_FUNC_RE = re.compile(r"^(rgba?)\(\s*([^)]*)\)$")


def _channel(token):
    token = token.strip()
    if token.endswith("%"):
        value = float(token[:-1]) * 255.0 / 100.0
    else:
        value = float(token)
    if not 0 <= value <= 255:
        raise ValueError(token)
    return value


def _alpha(token):
    token = token.strip()
    value = float(token[:-1]) / 100.0 if token.endswith("%") else float(token)
    if not 0 <= value <= 1:
        raise ValueError(token)
    return value


def parse_color_alpha(text) -> tuple[Rgb, float]:
    """Parse a CSS color literal into ``(rgb, alpha)`` without compositing."""
    s = str(text).strip().lower()
    m = _HEX_RE.match(s)
    if m:
        digits = m.group(1)
        if len(digits) == 3:
            digits = "".join(ch * 2 for ch in digits)
        return Rgb(*(int(digits[i:i + 2], 16) for i in (0, 2, 4))), 1.0
    if s in NAMED_COLORS:
        return Rgb(*NAMED_COLORS[s]), 1.0
    m = _FUNC_RE.match(s)
    if m:
        parts = [p for p in re.split(r"[,\s/]+", m.group(2).strip()) if p]
        try:
            if len(parts) == 3:
                return Rgb(*(_channel(p) for p in parts)), 1.0
            if len(parts) == 4:
                return Rgb(*(_channel(p) for p in parts[:3])), _alpha(parts[3])
        except ValueError:
            pass
    raise UnparsableColor(f"cannot parse color {text!r}")


def composite(color: Rgb, alpha: float, backdrop: Rgb = WHITE) -> Rgb:
    return Rgb(*(alpha * c + (1 - alpha) * b for c, b in zip(color, backdrop)))


def parse_color(text) -> Rgb:
    """Parse ``#rgb``, ``#rrggbb``, ``rgb()``, ``rgba()`` or a basic named color.

    Translucent colors are composited over white.
    """
    rgb, alpha = parse_color_alpha(text)
    if alpha < 1:
        return composite(rgb, alpha)
    return rgb


def _linearize(channel):
    v = channel / 255.0
    if v <= 0.03928:
        return v / 12.92
    return ((v + 0.055) / 1.055) ** 2.4


def relative_luminance(c: Rgb) -> float:
    r, g, b = (_linearize(x) for x in c)
    return 0.2126 * r + 0.7152 * g + 0.0722 * b


def _ratio_from_luminance(la, lb):
    hi, lo = (la, lb) if la >= lb else (lb, la)
    return (hi + 0.05) / (lo + 0.05)


def contrast_ratio(a: Rgb, b: Rgb) -> float:
    return _ratio_from_luminance(relative_luminance(a), relative_luminance(b))


def to_hsl(c: Rgb) -> tuple[float, float, float]:
    """Return ``(hue in degrees, saturation, lightness)`` with s, l in [0, 1]."""
    h, l, s = colorsys.rgb_to_hls(*(x / 255.0 for x in c))
    return h * 360.0, s, l


def from_hsl(hue, saturation, lightness) -> Rgb:
    r, g, b = colorsys.hls_to_rgb(hue / 360.0, lightness, saturation)
    return Rgb(r * 255.0, g * 255.0, b * 255.0)


def _search_lightness(hue, sat, start, end, meets, steps=48):
    """Smallest move from ``start`` toward ``end`` for which ``meets`` holds.

    ``meets`` must be monotone along the path; returns None if even ``end``
    fails.
    """
    if not meets(from_hsl(hue, sat, end)):
        return None
    near, far = start, end
    for _ in range(steps):
        mid = (near + far) / 2
        if meets(from_hsl(hue, sat, mid)):
            far = mid
        else:
            near = mid
    return far


def repair_contrast(fg: Rgb, bg: Rgb, target: float) -> Rgb:
    """Adjust only the HSL lightness of ``fg`` until it reaches ``target`` on ``bg``.

    Both directions (toward black and toward white) are searched and the one
    needing the smaller lightness change wins. Hue and saturation are kept, so
    the repaired color stays in the same color family.
    """
    if not 1 <= target <= 21:
        raise ValueError(f"target ratio must be in [1, 21], got {target}")
    fg, bg = Rgb(*fg), Rgb(*bg)
    if contrast_ratio(fg, bg) >= target:
        return fg
    hue, sat, light = to_hsl(fg)
    lum_bg = relative_luminance(bg)
    # ratio >= target  <=>  L <= dark_limit  or  L >= light_limit
    dark_limit = (lum_bg + 0.05) / target - 0.05
    light_limit = target * (lum_bg + 0.05) - 0.05

    darker = _search_lightness(hue, sat, light, 0.0,
                               lambda c: relative_luminance(c) <= dark_limit)
    lighter = _search_lightness(hue, sat, light, 1.0,
                                lambda c: relative_luminance(c) >= light_limit)
    options = [x for x in (darker, lighter) if x is not None]
    if not options:
        raise ContrastUnreachable(
            f"neither black nor white reaches {target}:1 on {bg.hex()}")
    best = min(options, key=lambda x: abs(x - light))
    return from_hsl(hue, sat, best)


def repair_contrast_quantized(fg: Rgb, bg: Rgb, target: float, max_steps=200) -> Rgb:
    """Integer-channel version of :func:`repair_contrast` for emitting CSS.

    Rounding can drop the ratio a hair below target, so the target is nudged
    upward until the rounded color passes.
    """
    fg = Rgb(*fg)
    if contrast_ratio(fg, bg) >= target:
        return fg.rounded()
    best_possible = max(contrast_ratio(BLACK, bg), contrast_ratio(WHITE, bg))
    goal = target
    for _ in range(max_steps):
        goal = min(goal, best_possible, 21.0)
        candidate = repair_contrast(fg, bg, goal).rounded()
        if contrast_ratio(candidate, bg) >= target:
            return candidate
        goal += 0.005
    raise ContrastUnreachable(f"no integer color reaches {target}:1 on {Rgb(*bg).hex()}")
