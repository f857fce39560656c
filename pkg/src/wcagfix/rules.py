"""The ten WCAG2 rules, document checking, report formats and corpus statistics."""
from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field

from .color import contrast_ratio
from .dom import DomNode, DomTree, TreeIndex, XPath, start_tag
from .errors import EmptyCorpus
from .style import Unresolvable, collect_stylesheet, computed_declarations, resolve_effective_style

SCHEMA_VERSION = 1
SNIPPET_LIMIT = 120


class Category(str, enum.Enum):
    VISION = "vision"
    LANGUAGE = "language"


class RuleId(str, enum.Enum):
    TEXT_CONTRAST_SUFFICIENT = "text_contrast_sufficient"
    IMG_ALT_VALID = "img_alt_valid"
    STYLE_COLOR_MISUSE = "style_color_misuse"
    CAPTION_TRACK_EXISTS = "caption_track_exists"
    SVG_GRAPHICS_LABELLED = "svg_graphics_labelled"
    ARIA_CONTENT_IN_LANDMARK = "aria_content_in_landmark"
    HTML_LANG_EXISTS = "html_lang_exists"
    PAGE_TITLE_EXISTS = "page_title_exists"
    SKIP_MAIN_EXISTS = "skip_main_exists"
    TEXT_BLOCK_HEADING = "text_block_heading"

    @property
    def category(self):
        return Category.VISION if _RULE_ORDER[self] < 5 else Category.LANGUAGE

    @property
    def help(self):
        return f"rules/{self.value}"


ALL_RULES = tuple(RuleId)
_RULE_ORDER = {rule: i for i, rule in enumerate(ALL_RULES)}
VISION_RULES = ALL_RULES[:5]
LANGUAGE_RULES = ALL_RULES[5:]

LANDMARK_ROLES = frozenset(
    ("banner", "navigation", "main", "contentinfo", "complementary", "search", "form", "region")
)
LANDMARK_TAGS = frozenset(("header", "nav", "main", "footer", "aside"))
HEADING_TAGS = frozenset(("h1", "h2", "h3", "h4", "h5", "h6"))

THRESHOLD_PROFILES = {
    "AA": (4.5, 3.0),
    "paper3to1": (3.0, 3.0),
}


@dataclass(frozen=True)
class RuleConfig:
    threshold_profile: str = "AA"
    word_threshold: int = 60

    def contrast_threshold(self, large_text: bool) -> float:
        normal, large = THRESHOLD_PROFILES[self.threshold_profile]
        return large if large_text else normal


@dataclass(frozen=True)
class Violation:
    rule: RuleId
    xpath: XPath
    snippet: str
    message: str
    order: int = field(default=0, compare=False, repr=False)

    @property
    def category(self):
        return self.rule.category

    def to_dict(self):
        return {
            "rule": self.rule.value,
            "category": self.category.value,
            "xpath": str(self.xpath),
            "snippet": self.snippet,
            "message": self.message,
        }


@dataclass
class ViolationReport:
    doc_id: str
    violations: list[Violation]

    @property
    def counts(self) -> dict[RuleId, int]:
        out = {rule: 0 for rule in ALL_RULES}
        for v in self.violations:
            out[v.rule] += 1
        return out

    @property
    def total(self):
        return len(self.violations)

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "doc_id": self.doc_id,
            "total": self.total,
            "counts": {rule.value: n for rule, n in self.counts.items()},
            "violations": [v.to_dict() for v in self.violations],
        }


def snippet_of(node: DomNode) -> str:
    text = start_tag(node)
    if len(text) > SNIPPET_LIMIT:
        text = text[:SNIPPET_LIMIT - 3] + "..."
    return text


class _Context:
    """Per-document state shared by all rules."""

    def __init__(self, tree: DomTree, cfg: RuleConfig):
        self.tree = tree
        self.cfg = cfg
        self.index = TreeIndex(tree)
        self.rules = collect_stylesheet(tree)

    def violation(self, rule, node, message):
        return Violation(rule, self.index.xpath(node), snippet_of(node), message,
                         self.index.order(node))


_NON_RENDERED = frozenset(("head", "script", "style", "noscript", "template", "svg", "math", "title"))


def _is_hidden(ctx, node):
    for el in [node] + ctx.index.ancestors(node):
        if el.tag in _NON_RENDERED or el.has("hidden"):
            return True
        display = computed_declarations(el, ctx.rules).get("display", "")
        if display.strip().lower() == "none":
            return True
    return False


def _check_contrast(ctx):
    out = []
    for node in ctx.index.elements:
        if not node.direct_text().strip() or _is_hidden(ctx, node):
            continue
        try:
            style = resolve_effective_style(ctx.tree, node, ctx.index, ctx.rules)
        except Unresolvable:
            continue
        threshold = ctx.cfg.contrast_threshold(style.is_large_text)
        ratio = contrast_ratio(style.foreground, style.background)
        if ratio < threshold:
            out.append(ctx.violation(
                RuleId.TEXT_CONTRAST_SUFFICIENT, node,
                f"Text contrast of {ratio:.2f}:1 is below the required {threshold:g}:1 "
                f"(foreground {style.foreground.hex()}, background {style.background.hex()})"))
    return out


def _is_decorative(node):
    return (node.get("role") or "").strip().lower() in ("presentation", "none")


def _check_img_alt(ctx):
    out = []
    for node in ctx.index.elements:
        if node.tag != "img":
            continue
        if not node.has("alt"):
            out.append(ctx.violation(RuleId.IMG_ALT_VALID, node,
                                     "The image has no alt attribute"))
        elif not node.get("alt").strip() and not _is_decorative(node):
            out.append(ctx.violation(RuleId.IMG_ALT_VALID, node,
                                     "The image alt text is empty"))
    return out


_FORM_CONTROLS = frozenset(("input", "select", "textarea"))
_NON_FIELD_INPUTS = frozenset(("hidden", "submit", "button", "reset", "image"))


def label_for(ctx, control):
    ident = control.get("id")
    if ident:
        for node in ctx.index.elements:
            if node.tag == "label" and node.get("for") == ident:
                return node
    for anc in ctx.index.ancestors(control):
        if anc.tag == "label":
            return anc
    return None


def _declares_color(ctx, node):
    return any("color" in computed_declarations(el, ctx.rules) for el in node.iter_elements())


def _check_color_misuse(ctx):
    out = []
    for node in ctx.index.elements:
        if node.tag not in _FORM_CONTROLS or not node.has("required"):
            continue
        if node.tag == "input" and (node.get("type") or "").lower() in _NON_FIELD_INPUTS:
            continue
        if (node.get("aria-required") or "").strip().lower() == "true":
            continue
        label = label_for(ctx, node)
        if label is None:
            continue
        text = label.text_content()
        if "*" in text or "required" in text.lower():
            continue
        if _declares_color(ctx, label):
            out.append(ctx.violation(RuleId.STYLE_COLOR_MISUSE, node,
                                     "Required field is indicated only by label color"))
    return out


def _check_caption_track(ctx):
    out = []
    for node in ctx.index.elements:
        if node.tag != "video":
            continue
        # a track without kind defaults to subtitles
        ok = any(c.tag == "track" and (c.get("kind") or "subtitles").strip().lower()
                 in ("captions", "subtitles") for c in node.element_children())
        if not ok:
            out.append(ctx.violation(RuleId.CAPTION_TRACK_EXISTS, node,
                                     "The video has no captions or subtitles track"))
    return out


def _check_svg_label(ctx):
    out = []
    for node in ctx.index.elements:
        if node.tag != "svg":
            continue
        if (node.get("aria-label") or "").strip() or (node.get("aria-labelledby") or "").strip():
            continue
        if any(c.tag == "title" and c.text_content().strip() for c in node.element_children()):
            continue
        out.append(ctx.violation(RuleId.SVG_GRAPHICS_LABELLED, node,
                                 "The SVG graphic has no accessible label"))
    return out


def _check_landmark(ctx):
    out = []
    body = ctx.tree.body
    if body is None:
        return out
    for node in body.element_children():
        if node.tag not in ("div", "section"):
            continue
        if (node.get("role") or "").strip():
            continue
        if not node.text_content().strip():
            continue
        out.append(ctx.violation(RuleId.ARIA_CONTENT_IN_LANDMARK, node,
                                 "Content is not contained within a landmark region"))
    return out


def _check_lang(ctx):
    root = ctx.tree.root
    if (root.get("lang") or "").strip():
        return []
    return [ctx.violation(RuleId.HTML_LANG_EXISTS, root,
                          "The html element has no lang attribute")]


def _check_title(ctx):
    head = ctx.tree.head
    if head is None:
        return [ctx.violation(RuleId.PAGE_TITLE_EXISTS, ctx.tree.root,
                              "The page has no head element and no title")]
    title = next((n for n in head.iter_elements() if n.tag == "title"), None)
    if title is None or not title.text_content().strip():
        return [ctx.violation(RuleId.PAGE_TITLE_EXISTS, head, "The page has no title")]
    return []


def _check_main(ctx):
    for node in ctx.index.elements:
        if node.tag == "main" or (node.get("role") or "").strip().lower() == "main":
            return []
    target = ctx.tree.body or ctx.tree.root
    return [ctx.violation(RuleId.SKIP_MAIN_EXISTS, target, "The page has no main landmark")]


_BLOCK_TAGS = frozenset(("p", "div", "blockquote", "li", "td", "dd", "pre", "figcaption"))
_INLINE_TAGS = frozenset(
    """a abbr b bdi bdo br cite code data dfn em font i kbd label mark q s samp small span
    strong sub sup time u var""".split()
)
_SECTION_TAGS = frozenset(("section", "article", "main", "aside", "nav", "header", "footer", "body"))


def inline_text(node):
    """Text of the node's own flow: direct text plus inline descendants."""
    parts = []
    for child in node.children:
        if child.kind == "text":
            parts.append(child.text)
        elif child.kind == "element" and child.tag in _INLINE_TAGS:
            parts.append(inline_text(child))
    return " ".join(parts)


def _is_heading(node):
    return node.tag in HEADING_TAGS or (node.get("role") or "").strip().lower() == "heading"


def section_of(index, node):
    return next((a for a in index.ancestors(node) if a.tag in _SECTION_TAGS), index.tree.root)


def _check_text_block(ctx):
    out = []
    limit = ctx.cfg.word_threshold
    for node in ctx.index.elements:
        if node.tag not in _BLOCK_TAGS or _is_hidden(ctx, node):
            continue
        words = len(inline_text(node).split())
        if words <= limit:
            continue
        section = section_of(ctx.index, node)
        pos = ctx.index.order(node)
        if any(_is_heading(n) and ctx.index.order(n) < pos for n in section.iter_elements()):
            continue
        out.append(ctx.violation(RuleId.TEXT_BLOCK_HEADING, node,
                                 f"A block of {words} words has no preceding heading"))
    return out


_CHECKS = {
    RuleId.TEXT_CONTRAST_SUFFICIENT: _check_contrast,
    RuleId.IMG_ALT_VALID: _check_img_alt,
    RuleId.STYLE_COLOR_MISUSE: _check_color_misuse,
    RuleId.CAPTION_TRACK_EXISTS: _check_caption_track,
    RuleId.SVG_GRAPHICS_LABELLED: _check_svg_label,
    RuleId.ARIA_CONTENT_IN_LANDMARK: _check_landmark,
    RuleId.HTML_LANG_EXISTS: _check_lang,
    RuleId.PAGE_TITLE_EXISTS: _check_title,
    RuleId.SKIP_MAIN_EXISTS: _check_main,
    RuleId.TEXT_BLOCK_HEADING: _check_text_block,
}


def check_rule(rule, tree: DomTree, cfg: RuleConfig | None = None, _ctx=None) -> list[Violation]:
    """Violations of a single rule, in document order."""
    ctx = _ctx or _Context(tree, cfg or RuleConfig())
    return sorted(_CHECKS[RuleId(rule)](ctx), key=lambda v: v.order)


def check_document(tree: DomTree, cfg: RuleConfig | None = None, doc_id="document") -> ViolationReport:
    ctx = _Context(tree, cfg or RuleConfig())
    found = []
    for rule in ALL_RULES:
        found.extend(_CHECKS[rule](ctx))
    found.sort(key=lambda v: (v.order, _RULE_ORDER[v.rule]))
    return ViolationReport(doc_id, found)


# --------------------------------------------------------------------------
# report formats


def format_text_report(report: ViolationReport) -> str:
    blocks = []
    for v in report.violations:
        blocks.append(
            "Level: violation\n"
            f"XPath: {v.xpath}\n"
            f"Snippet: {v.snippet}\n"
            f"Help: {v.rule.help}\n"
            f"- Message: {v.message}\n"
        )
    return "\n".join(blocks)


def format_json_report(report: ViolationReport) -> str:
    return json.dumps(report.to_dict(), indent=2) + "\n"


_BLOCK_RE = re.compile(
    r"Level: violation\nXPath: (?P<xpath>.*)\nSnippet: (?P<snippet>.*)\n"
    r"Help: rules/(?P<rule>\w+)\n- Message: (?P<message>.*)\n"
)


def parse_text_report(text: str, doc_id="document") -> ViolationReport:
    """Inverse of :func:`format_text_report`."""
    violations = [
        Violation(RuleId(m["rule"]), XPath.parse(m["xpath"]), m["snippet"], m["message"])
        for m in _BLOCK_RE.finditer(text)
    ]
    return ViolationReport(doc_id, violations)


# --------------------------------------------------------------------------
# corpus statistics


@dataclass
class CorpusStats:
    per_rule_percent: dict[RuleId, float]
    per_rule_percent_in_category: dict[RuleId, float]
    vision_percent: float
    language_percent: float
    avg_per_doc: float
    total: int
    documents: int

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "per_rule_percent": {r.value: p for r, p in self.per_rule_percent.items()},
            "per_rule_percent_in_category": {
                r.value: p for r, p in self.per_rule_percent_in_category.items()},
            "vision_percent": self.vision_percent,
            "language_percent": self.language_percent,
            "avg_per_doc": self.avg_per_doc,
            "total": self.total,
            "documents": self.documents,
        }


def summarize(reports) -> CorpusStats:
    """Share of each rule among all violations, split by vision/language.

    ``per_rule_percent_in_category`` normalizes each category to 100 on its
    own, which is how per-category tables are usually presented.
    """
    reports = list(reports)
    if not reports:
        raise EmptyCorpus("no reports to summarize")
    counts = {rule: 0 for rule in ALL_RULES}
    for report in reports:
        for rule, n in report.counts.items():
            counts[rule] += n
    total = sum(counts.values())
    vision = sum(counts[r] for r in VISION_RULES)
    language = total - vision

    def pct(n, d):
        return 100.0 * n / d if d else 0.0

    in_cat = {r: pct(counts[r], vision if r.category is Category.VISION else language)
              for r in ALL_RULES}
    return CorpusStats(
        per_rule_percent={r: pct(counts[r], total) for r in ALL_RULES},
        per_rule_percent_in_category=in_cat,
        vision_percent=pct(vision, total),
        language_percent=pct(language, total),
        avg_per_doc=total / len(reports),
        total=total,
        documents=len(reports),
    )
