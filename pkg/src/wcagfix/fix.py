"""Deterministic repairs for the ten rules and the detect/fix/re-detect loop."""
from __future__ import annotations

import copy
import enum
import os
import re
import shlex
import subprocess
from dataclasses import dataclass, field
from typing import Protocol
from urllib.parse import urlsplit

from .color import repair_contrast_quantized
from .dom import DomNode, DomTree, TreeIndex, resolve_xpath
from .errors import ContrastUnreachable, PathNotFound, StaleViolation
from .rules import (
    HEADING_TAGS,
    RuleConfig,
    RuleId,
    Violation,
    ViolationReport,
    _Context,
    check_document,
    inline_text,
    label_for,
)
from .style import Unresolvable, format_declarations, parse_declarations, resolve_effective_style


class Edit(str, enum.Enum):
    SET_ATTRIBUTE = "SetAttribute"
    INSERT_ELEMENT = "InsertElement"
    REPLACE_COLOR = "ReplaceColor"
    APPEND_TEXT = "AppendText"


@dataclass(frozen=True)
class FixAction:
    rule: RuleId
    xpath: str
    description: str
    edit: Edit
    # (relative file name, placeholder content) for caption stubs
    sidecar: tuple[str, str] | None = None

    def to_dict(self):
        out = {"rule": self.rule.value, "xpath": self.xpath,
               "description": self.description, "edit": self.edit.value}
        if self.sidecar:
            out["sidecar"] = self.sidecar[0]
        return out


class CaptionProvider(Protocol):
    def caption(self, image_src: str) -> str | None:
        """Alt text for the image, or None when no caption can be produced."""


class CommandCaptioner:
    """Runs ``command <image path>`` and uses its stdout as the caption.

    A nonzero exit status or empty output means the caption is unavailable.
    """

    def __init__(self, command, base_dir=".", timeout=60):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.base_dir = base_dir
        self.timeout = timeout

    def caption(self, image_src):
        path = os.path.join(self.base_dir, urlsplit(image_src).path)
        try:
            proc = subprocess.run(self.argv + [path], capture_output=True, text=True,
                                  timeout=self.timeout)
        except (OSError, subprocess.TimeoutExpired):
            return None
        text = proc.stdout.strip()
        if proc.returncode != 0 or not text:
            return None
        return " ".join(text.split())


@dataclass
class FixConfig:
    default_lang: str = "en"
    contrast_target: float = 4.5
    max_iterations: int = 5
    caption_provider: CaptionProvider | None = None
    title_strategy: str = "heading"  # "heading" or "doc_id"
    rules: RuleConfig = field(default_factory=RuleConfig)

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.title_strategy not in ("heading", "doc_id"):
            raise ValueError(f"unknown title strategy {self.title_strategy!r}")


# --------------------------------------------------------------------------
# helpers


def _words(text):
    return " ".join(text.split())


_GENERIC_NAME_TOKENS = frozenset(("img", "image", "pic", "dsc", "dscn", "screenshot", "file"))


def filename_words(src) -> str:
    """``"images/red-car.png"`` -> ``"red car"``; empty when nothing readable is left."""
    if not src or src.strip().lower().startswith("data:"):
        return ""
    name = os.path.basename(urlsplit(src.strip()).path)
    stem = name.rsplit(".", 1)[0] if "." in name else name
    tokens = [t.lower() for t in re.split(r"[-_.\s]+", stem) if t]
    return " ".join(t for t in tokens if t.isalpha() and t not in _GENERIC_NAME_TOKENS)


def _first_heading_text(nodes):
    for node in nodes:
        if node.tag in HEADING_TAGS:
            text = _words(node.text_content())
            if text:
                return text
    return ""


def _text_node(text):
    return DomNode.text_node(text)


# --------------------------------------------------------------------------
# per-rule fixes; each edits ``tree`` in place and returns a FixAction or None


def _fix_lang(tree, node, v, cfg, doc_id):
    tree.root.set("lang", cfg.default_lang)
    return FixAction(v.rule, str(v.xpath), f'set lang="{cfg.default_lang}"', Edit.SET_ATTRIBUTE)


_MOVABLE_HEAD = frozenset(("title", "meta", "link", "style", "base"))


def _fix_title(tree, node, v, cfg, doc_id):
    root = tree.root
    if cfg.title_strategy == "heading":
        text = _first_heading_text(root.iter_elements()) or doc_id
    else:
        text = doc_id
    head = tree.head
    inserted = []
    if head is None:
        head = DomNode.element("head")
        # adopt head-only elements that were left at the html level
        stray = [c for c in root.children if c.kind == "element" and c.tag in _MOVABLE_HEAD]
        root.children = [c for c in root.children if not any(c is s for s in stray)]
        head.children = stray
        pos = next((i for i, c in enumerate(root.children) if c.kind == "element"),
                   len(root.children))
        root.children.insert(pos, head)
        inserted.append("head")
    title = next((n for n in head.iter_elements() if n.tag == "title"), None)
    if title is None:
        title = DomNode.element("title", children=[_text_node(text)])
        head.children.insert(0, title)
        inserted.append("title")
    elif not title.text_content().strip():
        title.children = [_text_node(text)]
    else:
        return None
    what = " and ".join(inserted) or "title text"
    return FixAction(v.rule, str(v.xpath), f"inserted {what} ({text!r})", Edit.INSERT_ELEMENT)


_NON_MAIN = frozenset(("header", "nav", "footer", "aside", "script", "style", "noscript", "template"))


def _fix_main(tree, node, v, cfg, doc_id):
    body = tree.body
    if body is None:
        return None
    candidates = [c for c in body.element_children() if c.tag not in _NON_MAIN]
    if not candidates:
        body.children.append(DomNode.element("main"))
        return FixAction(v.rule, str(v.xpath), "appended empty <main>", Edit.INSERT_ELEMENT)
    best = max(candidates, key=lambda c: len(c.text_content().split()))
    if best.tag in ("div", "section") and not (best.get("role") or "").strip():
        best.set("role", "main")
        return FixAction(v.rule, str(v.xpath), f'set role="main" on <{best.tag}>',
                         Edit.SET_ATTRIBUTE)
    pos = next(i for i, c in enumerate(body.children) if c is best)
    body.children[pos] = DomNode.element("main", children=[best])
    return FixAction(v.rule, str(v.xpath), f"wrapped <{best.tag}> in <main>", Edit.INSERT_ELEMENT)


_ROLE_BY_TAG = {"nav": "navigation", "header": "banner", "footer": "contentinfo",
                "aside": "complementary"}
_ROLE_HINTS = (
    (("header", "banner", "masthead", "topbar"), "banner"),
    (("nav", "navbar", "navigation", "menu"), "navigation"),
    (("footer", "colophon"), "contentinfo"),
    (("sidebar", "aside"), "complementary"),
    (("search",), "search"),
)


def _landmark_role(node):
    if node.tag in _ROLE_BY_TAG:
        return _ROLE_BY_TAG[node.tag]
    tokens = set(re.split(r"[-_\s]+", f"{node.get('id') or ''} {node.get('class') or ''}".lower()))
    for hints, role in _ROLE_HINTS:
        if tokens & set(hints):
            return role
    return "region"


def _fix_landmark(tree, node, v, cfg, doc_id):
    role = _landmark_role(node)
    node.set("role", role)
    if role == "region" and not (node.get("aria-label") or "").strip():
        label = _first_heading_text(node.iter_elements()) or \
            " ".join(node.text_content().split()[:5])
        node.set("aria-label", label or "Section")
    return FixAction(v.rule, str(v.xpath), f'set role="{role}"', Edit.SET_ATTRIBUTE)


def heading_from_text(text, max_words=8):
    first = re.split(r"(?<=[.!?])\s", _words(text), maxsplit=1)[0]
    words = first.rstrip(".!?").split()[:max_words]
    return " ".join(words)


def _fix_text_block(tree, node, v, cfg, doc_id):
    index = TreeIndex(tree)
    parent = index.parent(node)
    heading = heading_from_text(inline_text(node))
    if parent is None or not heading:
        return None
    pos = next(i for i, c in enumerate(parent.children) if c is node)
    if node.tag == "li" or parent.tag in ("tr", "ul", "ol", "dl"):
        node.children.insert(0, DomNode.element("h2", children=[_text_node(heading)]))
    else:
        parent.children.insert(pos, DomNode.element("h2", children=[_text_node(heading)]))
    return FixAction(v.rule, str(v.xpath), f"inserted <h2> {heading!r}", Edit.INSERT_ELEMENT)


def _fix_img_alt(tree, node, v, cfg, doc_id):
    src = node.get("src") or ""
    alt = None
    if cfg.caption_provider is not None and src:
        alt = cfg.caption_provider.caption(src)
    if not alt:
        alt = filename_words(src)
    if not alt:
        return None
    node.set("alt", alt)
    return FixAction(v.rule, str(v.xpath), f'set alt="{alt}"', Edit.SET_ATTRIBUTE)


def _fix_contrast(tree, node, v, cfg, doc_id):
    try:
        style = resolve_effective_style(tree, node)
    except Unresolvable:
        return None
    target = max(cfg.contrast_target, cfg.rules.contrast_threshold(style.is_large_text))
    try:
        new = repair_contrast_quantized(style.foreground, style.background, target)
    except ContrastUnreachable:
        return None
    decls = parse_declarations(node.get("style"))
    decls["color"] = new.hex()
    node.set("style", format_declarations(decls))
    return FixAction(v.rule, str(v.xpath),
                     f"color {style.foreground.hex()} -> {new.hex()} on {style.background.hex()}",
                     Edit.REPLACE_COLOR)


def _fix_color_misuse(tree, node, v, cfg, doc_id):
    ctx = _Context(tree, cfg.rules)
    label = label_for(ctx, node)
    if label is None:
        return None
    if label.children and label.children[-1].kind == "text":
        label.children[-1].text = label.children[-1].text.rstrip() + " *"
    else:
        label.children.append(_text_node(" *"))
    node.set("aria-required", "true")
    return FixAction(v.rule, str(v.xpath), 'appended "*" to label, set aria-required="true"',
                     Edit.APPEND_TEXT)


def _video_source(node):
    src = node.get("src")
    if not src:
        src = next((c.get("src") for c in node.element_children()
                    if c.tag == "source" and c.get("src")), None)
    return src


def _fix_caption_track(tree, node, v, cfg, doc_id):
    src = _video_source(node)
    stem = ""
    if src and not src.startswith("data:"):
        stem = os.path.basename(urlsplit(src).path).rsplit(".", 1)[0]
    if not stem:
        stem = f"{doc_id}-video-{len(tree.find_all('video'))}"
    vtt = f"{stem}.vtt"
    track = DomNode.element("track", [("kind", "captions"), ("src", vtt),
                                      ("srclang", cfg.default_lang), ("label", "Captions")])
    node.children.append(track)
    return FixAction(v.rule, str(v.xpath), f"inserted captions track {vtt!r}",
                     Edit.INSERT_ELEMENT, sidecar=(vtt, "WEBVTT\n\n"))


def _fix_svg_label(tree, node, v, cfg, doc_id):
    index = TreeIndex(tree)
    pos = index.order(node)
    preceding = [n for n in index.elements[:pos] if n.tag in HEADING_TAGS]
    label = _first_heading_text(reversed(preceding))
    if not label:
        hrefs = [c.get("href") or c.get("xlink:href") or "" for c in node.iter_elements()
                 if c.tag == "use"]
        names = [filename_words(h.split("#")[-1] or h) for h in hrefs]
        names.append(filename_words(node.get("id") or ""))
        names.append(filename_words((node.get("class") or "").replace(" ", "-")))
        label = next((n for n in names if n), "graphic")
    node.set("aria-label", label)
    return FixAction(v.rule, str(v.xpath), f'set aria-label="{label}"', Edit.SET_ATTRIBUTE)


_FIXERS = {
    RuleId.TEXT_CONTRAST_SUFFICIENT: _fix_contrast,
    RuleId.IMG_ALT_VALID: _fix_img_alt,
    RuleId.STYLE_COLOR_MISUSE: _fix_color_misuse,
    RuleId.CAPTION_TRACK_EXISTS: _fix_caption_track,
    RuleId.SVG_GRAPHICS_LABELLED: _fix_svg_label,
    RuleId.ARIA_CONTENT_IN_LANDMARK: _fix_landmark,
    RuleId.HTML_LANG_EXISTS: _fix_lang,
    RuleId.PAGE_TITLE_EXISTS: _fix_title,
    RuleId.SKIP_MAIN_EXISTS: _fix_main,
    RuleId.TEXT_BLOCK_HEADING: _fix_text_block,
}


def fix_violation(tree: DomTree, v: Violation, cfg: FixConfig | None = None,
                  doc_id="document") -> tuple[DomTree, FixAction | None]:
    """Repair one violation on a copy of ``tree``.

    Returns the input tree unchanged with no action when the repair needs
    input that is not available (no captioner and no usable filename, an
    image background, ...).
    """
    cfg = cfg or FixConfig()
    edited = copy.deepcopy(tree)
    try:
        node = resolve_xpath(edited, v.xpath)
    except PathNotFound as exc:
        raise StaleViolation(f"{v.rule.value} at {v.xpath} no longer resolves") from exc
    action = _FIXERS[v.rule](edited, node, v, cfg, doc_id)
    if action is None:
        return tree, None
    return edited, action


# --------------------------------------------------------------------------
# fixed-point loop


@dataclass
class FixRound:
    report: ViolationReport
    actions: list[FixAction]
    rejected: list[tuple[Violation, str]] = field(default_factory=list)

    def to_dict(self):
        return {
            "total": self.report.total,
            "counts": {r.value: n for r, n in self.report.counts.items()},
            "actions": [a.to_dict() for a in self.actions],
            "rejected": [{"rule": v.rule.value, "xpath": str(v.xpath), "reason": why}
                         for v, why in self.rejected],
        }


def _priority(v):
    # role="main" first: it can also settle landmark violations on the same element
    return (0 if v.rule is RuleId.SKIP_MAIN_EXISTS else 1, v.order)


def _regression(before: ViolationReport, after: ViolationReport):
    if after.total >= before.total:
        return "no net reduction"
    b, a = before.counts, after.counts
    worse = [r.value for r in b if a[r] > b[r]]
    if worse:
        return "introduced " + ", ".join(worse)
    return None


def fix_to_fixed_point(tree: DomTree, cfg: FixConfig | None = None,
                       doc_id="document") -> tuple[DomTree, list[FixRound]]:
    """Check, fix everything fixable, re-check; repeat until clean or stuck.

    A single fix that does not lower the total, or raises the count of any
    rule, is rolled back and listed in the round's ``rejected``.
    """
    cfg = cfg or FixConfig()
    current = tree
    history: list[FixRound] = []
    for _ in range(cfg.max_iterations):
        report = check_document(current, cfg.rules, doc_id)
        if report.total == 0:
            history.append(FixRound(report, []))
            break
        fix_round = FixRound(report, [])
        live = report
        attempted = set()
        while True:
            pending = sorted((v for v in live.violations
                              if (v.rule, str(v.xpath)) not in attempted), key=_priority)
            if not pending:
                break
            v = pending[0]
            attempted.add((v.rule, str(v.xpath)))
            try:
                candidate, action = fix_violation(current, v, cfg, doc_id)
            except StaleViolation:
                continue
            if action is None:
                fix_round.rejected.append((v, "no fix available"))
                continue
            after = check_document(candidate, cfg.rules, doc_id)
            reason = _regression(live, after)
            if reason:
                fix_round.rejected.append((v, reason))
                continue
            current, live = candidate, after
            fix_round.actions.append(action)
        history.append(fix_round)
        if not fix_round.actions:
            break
    return current, history
