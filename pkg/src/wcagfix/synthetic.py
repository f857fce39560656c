"""A small deterministic corpus of pages seeded with known violations of every rule.

Each page is assembled from snippets; a snippet either complies or trips
exactly one rule, so the expected per-rule counts of every page are known
before the checker runs.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .rules import ALL_RULES, RuleId

DEFAULT_SEED = 2024
DEFAULT_PAGES = 50

_TOPICS = [
    ("Harbor Bakery", "bread", ["sourdough-loaf-on-board.jpg", "croissant-tray.png"]),
    ("City Library", "books", ["reading-room-windows.jpg", "children-story-corner.png"]),
    ("Trail Runners Club", "running", ["mountain-trail-sunrise.jpg", "runners-at-finish.png"]),
    ("Green Thumb Nursery", "plants", ["potted-fern-shelf.jpg", "tomato-seedlings.png"]),
    ("Riverside Clinic", "health", ["clinic-front-desk.jpg", "nurse-with-patient.png"]),
    ("Pixel Repair Shop", "phones", ["cracked-phone-screen.jpg", "technician-soldering.png"]),
    ("Northside Swim School", "swimming", ["indoor-pool-lanes.jpg", "kids-swim-lesson.png"]),
    ("Old Town Museum", "history", ["bronze-age-axe.jpg", "museum-main-hall.png"]),
]

_FILLER = (
    "Our team has served the neighborhood for many years and we are proud of the "
    "community that has grown around us. Visitors often tell us that the friendly "
    "atmosphere is what brings them back, along with the care we put into every "
    "detail of the experience. We publish updates every season, host open days for "
    "families, and welcome feedback from everyone who stops by. Opening hours change "
    "during public holidays, so please check this page before planning a visit. "
    "Accessibility matters to us, and staff are always happy to help with directions, "
    "seating, or anything else that makes the day easier."
).split()

_LOW_CONTRAST = ["#999999", "#aaaaaa", "#b0b0b0", "silver", "rgb(150, 150, 150)",
                 "#e08080", "#7fb3d5", "#f0a030"]
_DARK_PAIRS = [("#1f2a44", "#3a4a6a"), ("#203020", "#405a40"), ("#333333", "#666666")]
_ICONS = ["icon-search", "icon-cart", "icon-phone", "icon-calendar"]
_VIDEOS = ["intro-tour.mp4", "how-we-bake.mp4", "opening-day.mp4"]


@dataclass
class SyntheticPage:
    doc_id: str
    html: str
    expected: dict[RuleId, int]
    assets: list[str] = field(default_factory=list)


def _words(rng, n):
    start = rng.randrange(len(_FILLER))
    return " ".join(_FILLER[(start + i) % len(_FILLER)] for i in range(n))


def _sentence(rng, n):
    text = _words(rng, n).rstrip(",.")
    return text[0].upper() + text[1:] + "."


def make_page(rng: random.Random, doc_id: str, seeds: set[RuleId]) -> SyntheticPage:
    """Build one page tripping the rules in ``seeds``.

    ``expected`` counts how often each rule fires: contrast and image rules
    may fire twice, and a missing main wrapper also counts as stray content.
    """
    name, slug, images = _TOPICS[rng.randrange(len(_TOPICS))]
    expected = {rule: 0 for rule in ALL_RULES}
    assets = []

    def trip(rule, n=1):
        expected[rule] += n

    html_open = "<html>" if RuleId.HTML_LANG_EXISTS in seeds else '<html lang="en">'
    if RuleId.HTML_LANG_EXISTS in seeds:
        trip(RuleId.HTML_LANG_EXISTS)

    head = ['<meta charset="utf-8">']
    css = ["body { color: #222222; background: #ffffff; }"]
    wrap_head = True
    if RuleId.PAGE_TITLE_EXISTS not in seeds:
        head.insert(0, f"<title>{name}</title>")
    else:
        trip(RuleId.PAGE_TITLE_EXISTS)
        # half the time there is no head element at all, only loose meta/style
        wrap_head = rng.random() < 0.5

    header = (f'<header><h1>{name}</h1><nav><a href="#about">About</a> '
              f'<a href="#visit">Visit</a></nav></header>')
    blocks = []

    # intro paragraph, compliant text
    blocks.append(f"<p>{_sentence(rng, rng.randint(8, 20))}</p>")

    if RuleId.TEXT_CONTRAST_SUFFICIENT in seeds:
        n = rng.choice((1, 2))
        for i in range(n):
            if i == 1 and rng.random() < 0.5:
                bg, fg = rng.choice(_DARK_PAIRS)
                blocks.append(f'<div class="note" style="background-color: {bg}">'
                              f'<span style="color: {fg}">{_sentence(rng, 6)}</span></div>')
            elif rng.random() < 0.5:
                color = rng.choice(_LOW_CONTRAST)
                blocks.append(f'<p style="color: {color}">{_sentence(rng, 7)}</p>')
            else:
                css.append(f".muted-{i} {{ color: {rng.choice(_LOW_CONTRAST)}; }}")
                blocks.append(f'<p class="muted-{i}">{_sentence(rng, 7)}</p>')
        trip(RuleId.TEXT_CONTRAST_SUFFICIENT, n)

    pictures = list(images)
    rng.shuffle(pictures)
    if RuleId.IMG_ALT_VALID in seeds:
        n = rng.choice((1, 2))
        for src in pictures[:n]:
            alt = ' alt=""' if rng.random() < 0.3 else ""
            blocks.append(f'<figure><img src="images/{src}"{alt}></figure>')
            assets.append(f"images/{src}")
        trip(RuleId.IMG_ALT_VALID, n)
    else:
        src = pictures[0]
        alt = " ".join(src.rsplit(".", 1)[0].split("-"))
        blocks.append(f'<figure><img src="images/{src}" alt="{alt}"></figure>')
        assets.append(f"images/{src}")

    if RuleId.STYLE_COLOR_MISUSE in seeds:
        blocks.append('<form action="#"><label for="email" style="color: #c00000">Email</label>'
                      '<input id="email" type="email" required>'
                      '<button type="submit">Join</button></form>')
        trip(RuleId.STYLE_COLOR_MISUSE)
    else:
        blocks.append('<form action="#"><label for="email">Email *</label>'
                      '<input id="email" type="email" required>'
                      '<button type="submit">Join</button></form>')

    video = rng.choice(_VIDEOS)
    assets.append(f"media/{video}")
    if RuleId.CAPTION_TRACK_EXISTS in seeds:
        blocks.append(f'<video controls src="media/{video}"></video>')
        trip(RuleId.CAPTION_TRACK_EXISTS)
    else:
        stem = video.rsplit(".", 1)[0]
        blocks.append(f'<video controls src="media/{video}"><track kind="captions" '
                      f'src="media/{stem}.vtt" srclang="en"></video>')
        assets.append(f"media/{stem}.vtt")

    icon = rng.choice(_ICONS)
    if RuleId.SVG_GRAPHICS_LABELLED in seeds:
        blocks.append(f'<svg class="{icon}" viewBox="0 0 24 24" width="24" height="24">'
                      f'<use href="#{icon}"></use></svg>')
        trip(RuleId.SVG_GRAPHICS_LABELLED)
    else:
        blocks.append(f'<svg class="{icon}" viewBox="0 0 24 24" width="24" height="24" '
                      f'role="img"><title>{icon.split("-", 1)[1]}</title>'
                      f'<use href="#{icon}"></use></svg>')

    article_heading = "" if RuleId.TEXT_BLOCK_HEADING in seeds else f"<h2>About our {slug}</h2>"
    long_text = _sentence(rng, 75)
    blocks.append(f'<article id="about">{article_heading}<p>{long_text}</p></article>')
    if RuleId.TEXT_BLOCK_HEADING in seeds:
        trip(RuleId.TEXT_BLOCK_HEADING)

    content = "".join(blocks)
    if RuleId.SKIP_MAIN_EXISTS in seeds:
        trip(RuleId.SKIP_MAIN_EXISTS)
        # a landmark-less wrapper also counts as stray content
        main = f'<div class="content">{content}</div>'
        trip(RuleId.ARIA_CONTENT_IN_LANDMARK)
    else:
        main = f"<main>{content}</main>"

    extra = ""
    if RuleId.ARIA_CONTENT_IN_LANDMARK in seeds:
        kind = rng.choice(("sidebar", "promo", "footer-links"))
        extra = f'<div class="{kind}"><p>{_sentence(rng, 9)}</p></div>'
        trip(RuleId.ARIA_CONTENT_IN_LANDMARK)

    footer = f"<footer><p>&copy; {name}</p></footer>"
    head.append(f"<style>{' '.join(css)}</style>")
    head_html = f"<head>{''.join(head)}</head>" if wrap_head else "".join(head)
    html = (f"<!DOCTYPE html>\n{html_open}{head_html}<body>{header}{main}{extra}{footer}"
            f"</body></html>\n")
    return SyntheticPage(doc_id, html, expected, sorted(set(assets)))


def generate_corpus(n_pages=DEFAULT_PAGES, seed=DEFAULT_SEED) -> list[SyntheticPage]:
    """Deterministic pages; the first ten each seed one rule alone, the rest mix rules."""
    rng = random.Random(seed)
    pages = []
    for i in range(n_pages):
        if i < len(ALL_RULES):
            seeds = {ALL_RULES[i]}
        else:
            k = rng.randint(2, 6)
            seeds = set(rng.sample(ALL_RULES, k))
        pages.append(make_page(rng, f"page-{i:03d}", seeds))
    return pages


def _placeholder_png(path):
    from PIL import Image

    Image.new("L", (16, 16), 200).save(path, format="PNG")


def write_corpus(directory, pages=None) -> Path:
    """Write pages, placeholder assets and ``manifest.jsonl``; returns the manifest path."""
    directory = Path(directory)
    pages = generate_corpus() if pages is None else pages
    (directory / "pages").mkdir(parents=True, exist_ok=True)
    rows = []
    for page in pages:
        html_rel = f"pages/{page.doc_id}.html"
        (directory / html_rel).write_text(page.html, encoding="utf-8")
        asset_rels = []
        for asset in page.assets:
            rel = f"pages/{asset}"
            target = directory / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            if not target.exists():
                if asset.endswith(".png") or asset.endswith(".jpg"):
                    _placeholder_png(target)
                elif asset.endswith(".vtt"):
                    target.write_text("WEBVTT\n\n", encoding="utf-8")
                else:
                    target.write_bytes(b"")
            asset_rels.append(rel)
        rows.append({"doc_id": page.doc_id, "html_path": html_rel, "asset_paths": asset_rels,
                     "expected": {r.value: n for r, n in page.expected.items() if n}})
    manifest = directory / "manifest.jsonl"
    manifest.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return manifest
