"""Evaluation metrics: tag-tree edit distance, SSIM, caption/image alignment, improvement."""
from __future__ import annotations

import math
import shlex
import subprocess
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .dom import DomNode, DomTree
from .errors import (DimensionMismatch, EmptyInput, ImageTooSmall, ProviderUnavailable,
                     ZeroBaseline)

# --------------------------------------------------------------------------
# tree edit distance


def tag_tree(node) -> tuple:
    """``(tag, (child, ...))`` over element nodes only; text and comments dropped."""
    if isinstance(node, DomTree):
        node = node.root
    return (node.tag, tuple(tag_tree(c) for c in node.element_children()))


def _postorder(tree):
    """Labels and leftmost-leaf indices in postorder."""
    labels, leftmost = [], []

    def walk(node):
        first = None
        for child in node[1]:
            idx = walk(child)
            if first is None:
                first = leftmost[idx]
        labels.append(node[0])
        leftmost.append(len(labels) - 1 if first is None else first)
        return len(labels) - 1

    walk(tree)
    return labels, leftmost


def _keyroots(leftmost):
    # highest postorder node for each distinct leftmost leaf
    last = {}
    for i, lm in enumerate(leftmost):
        last[lm] = i
    return sorted(last.values())


def tree_edit_distance(a, b) -> int:
    """Unit-cost ordered tree edit distance (Zhang and Shasha, 1989).

    ``a`` and ``b`` may be :class:`DomTree`, :class:`DomNode` or
    ``(label, children)`` tuples. For DOM input only element nodes count,
    labeled by tag name.
    """
    if isinstance(a, (DomTree, DomNode)):
        a = tag_tree(a)
    if isinstance(b, (DomTree, DomNode)):
        b = tag_tree(b)
    la, lma = _postorder(a)
    lb, lmb = _postorder(b)
    n, m = len(la), len(lb)
    td = [[0] * m for _ in range(n)]

    for i in _keyroots(lma):
        for j in _keyroots(lmb):
            li, lj = lma[i], lmb[j]
            rows, cols = i - li + 2, j - lj + 2
            fd = [[0] * cols for _ in range(rows)]
            for x in range(1, rows):
                fd[x][0] = x
            for y in range(1, cols):
                fd[0][y] = y
            for x in range(1, rows):
                i1 = li + x - 1
                for y in range(1, cols):
                    j1 = lj + y - 1
                    delete = fd[x - 1][y] + 1
                    insert = fd[x][y - 1] + 1
                    if lma[i1] == li and lmb[j1] == lj:
                        relabel = fd[x - 1][y - 1] + (la[i1] != lb[j1])
                        fd[x][y] = min(delete, insert, relabel)
                        td[i1][j1] = fd[x][y]
                    else:
                        px, py = lma[i1] - li, lmb[j1] - lj
                        fd[x][y] = min(delete, insert, fd[px][py] + td[i1][j1])
    return td[n - 1][m - 1]


# --------------------------------------------------------------------------
# images and SSIM

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_DATA_RANGE = 255.0
STRUCTURAL_THRESHOLD = 0.9
DEFAULT_SCREEN_SIZE = (640, 360)


def ssim_parameters():
    return {"window": SSIM_WINDOW, "sigma": SSIM_SIGMA, "k1": SSIM_K1, "k2": SSIM_K2,
            "data_range": SSIM_DATA_RANGE, "threshold": STRUCTURAL_THRESHOLD}


@dataclass(frozen=True)
class RasterImage:
    """Grayscale image, row-major intensities in [0, 255]."""

    width: int
    height: int
    data: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=float).reshape(-1)
        if arr.size != self.width * self.height:
            raise ValueError(f"data has {arr.size} values, expected {self.width}x{self.height}")
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, array):
        array = np.asarray(array, dtype=float)
        if array.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls(array.shape[1], array.shape[0], array.reshape(-1))

    def as_array(self):
        return self.data.reshape(self.height, self.width)


def load_image(path, size=DEFAULT_SCREEN_SIZE) -> RasterImage:
    """Read a PNG or PGM file as grayscale, optionally resizing to ``size`` (w, h).

    Color pixels are reduced with luma weights 0.299/0.587/0.114; any alpha
    channel is composited over white first.
    """
    from PIL import Image

    with Image.open(path) as img:
        img.load()
        if img.mode in ("L", "I", "I;16", "F"):
            gray = np.asarray(img, dtype=float)
            if img.mode in ("I", "I;16") and gray.max(initial=0) > 255:
                gray = gray * 255.0 / 65535.0
        else:
            rgba = np.asarray(img.convert("RGBA"), dtype=float)
            alpha = rgba[..., 3:4] / 255.0
            rgb = rgba[..., :3] * alpha + 255.0 * (1 - alpha)
            gray = rgb @ np.array([0.299, 0.587, 0.114])
    if size is not None and (gray.shape[1], gray.shape[0]) != tuple(size):
        resized = Image.fromarray(gray.astype(np.float32), mode="F").resize(
            tuple(size), Image.BILINEAR)
        gray = np.asarray(resized, dtype=float)
    return RasterImage.from_array(np.clip(gray, 0, 255))


def gaussian_window(size=SSIM_WINDOW, sigma=SSIM_SIGMA) -> np.ndarray:
    """Normalized 1-D Gaussian; the 2-D window is its outer product."""
    x = np.arange(size) - (size - 1) / 2
    w = np.exp(-(x ** 2) / (2 * sigma ** 2))
    return w / w.sum()


def _filter_valid(img, w):
    # separable correlation keeping only positions where the window fits
    k = len(w)
    rows = np.lib.stride_tricks.sliding_window_view(img, k, axis=1) @ w
    return np.lib.stride_tricks.sliding_window_view(rows, k, axis=0) @ w


def ssim_map(a: RasterImage, b: RasterImage) -> np.ndarray:
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(f"{a.width}x{a.height} vs {b.width}x{b.height}")
    if min(a.width, a.height) < SSIM_WINDOW:
        raise ImageTooSmall(f"images must be at least {SSIM_WINDOW} pixels on each side")
    x, y = a.as_array(), b.as_array()
    w = gaussian_window()
    c1 = (SSIM_K1 * SSIM_DATA_RANGE) ** 2
    c2 = (SSIM_K2 * SSIM_DATA_RANGE) ** 2
    mx, my = _filter_valid(x, w), _filter_valid(y, w)
    vx = _filter_valid(x * x, w) - mx * mx
    vy = _filter_valid(y * y, w) - my * my
    cxy = _filter_valid(x * y, w) - mx * my
    return ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))


def ssim(a: RasterImage, b: RasterImage) -> float:
    """Mean SSIM over every position where the 11x11 Gaussian window fits."""
    return float(ssim_map(a, b).mean())


def structural_accuracy(pairs) -> float:
    """Fraction of image pairs with SSIM strictly above 0.9."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyInput("no image pairs")
    hits = sum(1 for a, b in pairs if ssim(a, b) > STRUCTURAL_THRESHOLD)
    return hits / len(pairs)


# --------------------------------------------------------------------------
# caption / image alignment


class EmbeddingProvider(Protocol):
    def embed_text(self, text: str) -> np.ndarray:
        ...

    def embed_image(self, image) -> np.ndarray:
        ...


class CommandEmbedder:
    """Embedding provider backed by an external command.

    The command is called as ``<command> text <string>`` or
    ``<command> image <path>`` and must print whitespace-separated floats.
    """

    def __init__(self, command, timeout=120.0):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout
        self.dim = None

    def _run(self, kind, arg):
        try:
            proc = subprocess.run(self.argv + [kind, str(arg)], capture_output=True,
                                  text=True, timeout=self.timeout)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise ProviderUnavailable(f"embedder failed: {exc}") from exc
        if proc.returncode != 0:
            raise ProviderUnavailable(f"embedder exited with {proc.returncode}: {proc.stderr.strip()}")
        try:
            vec = np.array([float(v) for v in proc.stdout.split()])
        except ValueError as exc:
            raise ProviderUnavailable("embedder printed non-numeric output") from exc
        if vec.size == 0:
            raise ProviderUnavailable("embedder printed nothing")
        if self.dim is None:
            self.dim = vec.size
        elif vec.size != self.dim:
            raise ProviderUnavailable(f"embedding size changed from {self.dim} to {vec.size}")
        return vec

    def embed_text(self, text):
        return self._run("text", text)

    def embed_image(self, image):
        return self._run("image", image)


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DimensionMismatch(f"embedding sizes differ: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    return float(u @ v / (nu * nv))


def caption_image_score(pairs, provider: EmbeddingProvider | None) -> float:
    """Mean cosine similarity between alt-text and image embeddings.

    A pair whose alt text is empty or missing scores 0.
    """
    if provider is None:
        raise ProviderUnavailable("no embedding provider configured")
    pairs = list(pairs)
    if not pairs:
        raise EmptyInput("no caption/image pairs")
    scores = []
    for alt, image in pairs:
        if not alt or not alt.strip():
            scores.append(0.0)
            continue
        scores.append(cosine(provider.embed_text(alt), provider.embed_image(image)))
    return math.fsum(scores) / len(scores)


def violation_improvement(raw_avg: float, fixed_avg: float) -> float:
    """Percentage reduction of the average violation count relative to raw HTML."""
    if raw_avg <= 0:
        raise ZeroBaseline("raw average must be positive")
    return 100.0 * (raw_avg - fixed_avg) / raw_avg


def mean(values: Sequence[float]) -> float:
    values = list(values)
    if not values:
        raise EmptyInput("mean of nothing")
    return math.fsum(values) / len(values)

