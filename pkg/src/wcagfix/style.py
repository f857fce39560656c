"""Minimal CSS resolution: inline styles, simple-selector <style> rules, inheritance.

Only what the contrast and color-misuse rules need. No media queries, no
combinators, no custom properties.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .color import WHITE, BLACK, Rgb, composite, parse_color_alpha
from .dom import DomNode, DomTree, TreeIndex
from .errors import UnparsableColor

DEFAULT_FONT_PX = 16.0


class Unresolvable(Exception):
    """Background cannot be reduced to one color (gradient, image)."""


@dataclass(frozen=True)
class ResolvedStyle:
    foreground: Rgb
    background: Rgb
    font_size_px: float = DEFAULT_FONT_PX
    font_weight: int = 400

    @property
    def is_large_text(self):
        return self.font_size_px >= 24 or (self.font_size_px >= 18.66 and self.font_weight >= 700)


def parse_declarations(text) -> dict[str, str]:
    """``"color: red; BACKGROUND:#000"`` -> ``{"color": "red", "background": "#000"}``."""
    out = {}
    for decl in (text or "").split(";"):
        if ":" not in decl:
            continue
        name, value = decl.split(":", 1)
        value = re.sub(r"\s*!important\s*$", "", value.strip(), flags=re.I)
        if name.strip() and value:
            out[name.strip().lower()] = value
    return out


def format_declarations(decls: dict[str, str]) -> str:
    return "; ".join(f"{k}: {v}" for k, v in decls.items())


@dataclass(frozen=True)
class _Selector:
    tag: str | None
    ident: str | None
    classes: tuple[str, ...]

    @property
    def specificity(self):
        return (1 if self.ident else 0, len(self.classes), 1 if self.tag else 0)

    def matches(self, node: DomNode):
        if self.tag and node.tag != self.tag:
            return False
        if self.ident and node.get("id") != self.ident:
            return False
        if self.classes:
            have = set((node.get("class") or "").split())
            if not set(self.classes) <= have:
                return False
        return True


_SIMPLE_SEL = re.compile(r"^(\*|[A-Za-z][A-Za-z0-9-]*)?((?:[.#][A-Za-z0-9_-]+)*)$")


def _parse_selector(text):
    text = text.strip()
    m = _SIMPLE_SEL.match(text)
    if not m or not text:
        return None
    tag = m.group(1)
    tag = None if tag in (None, "*") else tag.lower()
    ident, classes = None, []
    for kind, name in re.findall(r"([.#])([A-Za-z0-9_-]+)", m.group(2)):
        if kind == "#":
            ident = name
        else:
            classes.append(name)
    return _Selector(tag, ident, tuple(classes))


@dataclass(frozen=True)
class StyleRule:
    selector: _Selector
    declarations: tuple[tuple[str, str], ...]
    order: int


def _strip_at_blocks(css):
    # drop @media/@supports/... blocks including nested braces
    out, i = [], 0
    while i < len(css):
        j = css.find("@", i)
        if j < 0:
            out.append(css[i:])
            break
        out.append(css[i:j])
        brace = css.find("{", j)
        semi = css.find(";", j)
        if brace < 0 or (0 <= semi < brace):
            i = semi + 1 if semi >= 0 else len(css)
            continue
        depth, k = 0, brace
        while k < len(css):
            if css[k] == "{":
                depth += 1
            elif css[k] == "}":
                depth -= 1
                if depth == 0:
                    break
            k += 1
        i = k + 1
    return "".join(out)


def parse_stylesheet(css: str, start_order=0) -> list[StyleRule]:
    css = re.sub(r"/\*.*?\*/", "", css, flags=re.S)
    css = _strip_at_blocks(css)
    rules = []
    order = start_order
    for selectors, body in re.findall(r"([^{}]+)\{([^{}]*)\}", css):
        decls = tuple(parse_declarations(body).items())
        for sel_text in selectors.split(","):
            sel = _parse_selector(sel_text)
            if sel is None:
                continue
            rules.append(StyleRule(sel, decls, order))
            order += 1
    return rules


def collect_stylesheet(tree: DomTree) -> list[StyleRule]:
    rules: list[StyleRule] = []
    for node in tree.find_all("style"):
        rules.extend(parse_stylesheet(node.text_content(), len(rules)))
    return rules


def computed_declarations(node: DomNode, rules) -> dict[str, str]:
    """Declarations applying to ``node``: rules by specificity, then inline style."""
    matched = sorted((r for r in rules if r.selector.matches(node)),
                     key=lambda r: (r.selector.specificity, r.order))
    out: dict[str, str] = {}
    for rule in matched:
        out.update(rule.declarations)
    out.update(parse_declarations(node.get("style")))
    return out


_IMAGE_RE = re.compile(r"url\(|gradient\(|image-set\(", re.I)


_IMAGE = "image"


def _background_of(decls):
    """``(rgb, alpha)``, ``_IMAGE`` for image/gradient backgrounds, or None if unset."""
    image = decls.get("background-image", "")
    if image and _IMAGE_RE.search(image):
        return _IMAGE
    value = decls.get("background-color")
    shorthand = decls.get("background")
    if shorthand:
        if _IMAGE_RE.search(shorthand):
            return _IMAGE
        if value is None:
            value = _color_token(shorthand)
    if value is None or value.strip().lower() in ("transparent", "inherit", "initial", "none"):
        return None
    try:
        return parse_color_alpha(value)
    except UnparsableColor:
        return None


def _color_token(text):
    for token in re.findall(r"rgba?\([^)]*\)|#[0-9a-fA-F]+|[a-zA-Z]+", text):
        try:
            parse_color_alpha(token)
            return token
        except UnparsableColor:
            continue
    return None


_FONT_KEYWORDS = {
    "xx-small": 9, "x-small": 10, "small": 13, "medium": 16, "large": 18,
    "x-large": 24, "xx-large": 32, "xxx-large": 48,
}


def _font_size(value, parent_px):
    v = value.strip().lower()
    if v in _FONT_KEYWORDS:
        return float(_FONT_KEYWORDS[v])
    if v == "smaller":
        return parent_px / 1.2
    if v == "larger":
        return parent_px * 1.2
    m = re.match(r"^([0-9]*\.?[0-9]+)(px|pt|em|rem|%)?$", v)
    if not m:
        return parent_px
    n, unit = float(m.group(1)), m.group(2) or "px"
    return {"px": n, "pt": n * 4 / 3, "em": n * parent_px, "rem": n * DEFAULT_FONT_PX,
            "%": n * parent_px / 100}[unit]


def _font_weight(value, parent):
    v = value.strip().lower()
    if v.isdigit():
        return int(v)
    return {"normal": 400, "bold": 700, "bolder": max(700, parent),
            "lighter": min(400, parent)}.get(v, parent)


_BOLD_TAGS = frozenset(("b", "strong", "th", "h1", "h2", "h3", "h4", "h5", "h6"))
_HEADING_PX = {"h1": 32, "h2": 24, "h3": 18.72, "h4": 16, "h5": 13.28, "h6": 10.72}


def resolve_effective_style(tree: DomTree, node: DomNode, index: TreeIndex | None = None,
                            rules=None) -> ResolvedStyle:
    """Effective foreground, background, font size and weight for ``node``.

    Raises :class:`Unresolvable` when the nearest background is an image or
    gradient.
    """
    index = index or TreeIndex(tree)
    rules = collect_stylesheet(tree) if rules is None else rules
    chain = list(reversed(index.ancestors(node))) + [node]

    fg_raw: tuple[Rgb, float] | None = None
    size, weight = DEFAULT_FONT_PX, 400
    layers: list = []
    for element in chain:
        decls = computed_declarations(element, rules)
        color = decls.get("color")
        if color:
            try:
                fg_raw = parse_color_alpha(color)
            except UnparsableColor:
                pass
        if element.tag in _HEADING_PX:
            size = _HEADING_PX[element.tag] * size / DEFAULT_FONT_PX
        if element.tag in _BOLD_TAGS:
            weight = 700
        if "font-size" in decls:
            size = _font_size(decls["font-size"], size)
        if "font-weight" in decls:
            weight = _font_weight(decls["font-weight"], weight)
        bg = _background_of(decls)
        if bg is _IMAGE or (bg is not None and bg[1] >= 1):
            layers = [bg]
        elif bg is not None:
            layers.append(bg)

    if any(layer is _IMAGE for layer in layers):
        raise Unresolvable("background is an image or gradient")
    background = WHITE
    for rgb, alpha in layers:
        background = composite(rgb, alpha, background)
    if fg_raw is None:
        foreground = BLACK
    else:
        foreground = composite(fg_raw[0], fg_raw[1], background) if fg_raw[1] < 1 else fg_raw[0]
    return ResolvedStyle(foreground, background, size, weight)
