"""
Structure and pixel metrics
===========================

Tree edit distance compares tag trees; SSIM compares screenshots.
"""

# %%
from wcagfix import parse_html, tree_edit_distance
from wcagfix.metrics import tag_tree

before = parse_html("<body><div><p>a</p><img src='x.png'></div></body>")
after = parse_html("<body><main><div><p>a</p><img src='x.png' alt='x'></div></main></body>")
print(tag_tree(before))
print(tag_tree(after))
print("distance:", tree_edit_distance(before, after))  # one inserted <main>

# %%
# SSIM on synthetic "screenshots": a white page with dark text-like bars,
# the same page with faint noise, and a shuffled copy with the same pixel
# histogram.
import numpy as np

from wcagfix import RasterImage, ssim, structural_accuracy

rng = np.random.default_rng(0)
base = np.full((80, 120), 255.0)
for row in range(8, 72, 8):
    base[row:row + 3, 10:10 + int(rng.integers(40, 100))] = 30.0
noisy = np.clip(base + rng.normal(0, 3, base.shape), 0, 255)
shuffled = rng.permutation(base.ravel()).reshape(base.shape)

a, b, c = (RasterImage.from_array(x) for x in (base, noisy, shuffled))
print(f"ssim(base, noisy)    = {ssim(a, b):.3f}")
print(f"ssim(base, shuffled) = {ssim(a, c):.3f}")
print("structural accuracy:", structural_accuracy([(a, b), (a, c)]))

# %%
# Relative improvement in violations, as a percentage of the raw average.
from wcagfix import violation_improvement

print(f"{violation_improvement(5.335, 0.439):.1f}%")
