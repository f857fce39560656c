"""
Checking and repairing a page
=============================

Parse a small page, list its violations, then let the fixer iterate until
nothing it can repair is left.
"""

# %%
# A page with three problems: pale text, an image with no alt text, and an
# icon nobody can name.
from wcagfix import check_document, fix_to_fixed_point, parse_html, serialize
from wcagfix.rules import format_text_report

page = """<!DOCTYPE html>
<html lang="en"><head><title>Lunch</title></head>
<body><main>
  <h1>Lunch menu</h1>
  <p style="color: #aaaaaa">Served from noon.</p>
  <img src="images/tomato-soup.jpg">
  <svg viewBox="0 0 10 10"><circle cx="5" cy="5" r="4"></circle></svg>
</main></body></html>"""

tree = parse_html(page)
report = check_document(tree, doc_id="lunch")
print(format_text_report(report))

# %%
# The fixer works on copies. Each round re-checks the page, and a fix that
# makes things worse is rolled back.
fixed, rounds = fix_to_fixed_point(tree, doc_id="lunch")
for i, r in enumerate(rounds):
    print(f"round {i}: {r.report.total} violation(s) before fixing")
    for action in r.actions:
        print("   ", action.rule.value, "->", action.description)

# %%
# The repaired markup. The grey became #767676, the lightest grey
# that still clears 4.5:1 on white.
print(serialize(fixed))
print("remaining:", check_document(fixed).total)

# %%
# Counts per rule for a whole folder of pages. The synthetic corpus ships
# with the tests.
from pathlib import Path

from wcagfix.rules import summarize

pages = sorted(Path(__file__).resolve().parents[1].glob("tests/fixtures/synthetic/pages/*.html"))
reports = [check_document(parse_html(p.read_bytes()), doc_id=p.stem) for p in pages]
stats = summarize(reports)
print(f"{len(reports)} pages, {stats.avg_per_doc:.2f} violations per page")
print(f"vision {stats.vision_percent:.1f}%  language {stats.language_percent:.1f}%")
