import random

import numpy as np
import pytest
from PIL import Image
from skimage.metrics import structural_similarity

from ted_oracle import all_shapes, all_trees, brute_force_ted
from wcagfix.dom import parse_html
from wcagfix.errors import (DimensionMismatch, EmptyInput, ImageTooSmall, ProviderUnavailable,
                            ZeroBaseline)
from wcagfix.metrics import (RasterImage, caption_image_score, cosine, load_image, ssim,
                             structural_accuracy, tag_tree, tree_edit_distance,
                             violation_improvement)


def leaf(label):
    return (label, ())


def test_ted_small_examples():
    a = ("a", (leaf("b"), leaf("c")))
    assert tree_edit_distance(a, a) == 0
    assert tree_edit_distance(a, ("a", (leaf("b"),))) == 1
    assert tree_edit_distance(a, ("x", (leaf("b"), leaf("c")))) == 1
    assert tree_edit_distance(leaf("a"), ("a", (leaf("b"), leaf("c"), leaf("d")))) == 3
    # classic Zhang-Shasha example: f(d(a c(b)) e) vs f(c(d(a b)) e) has distance 2
    t1 = ("f", (("d", (leaf("a"), ("c", (leaf("b"),)))), leaf("e")))
    t2 = ("f", (("c", (("d", (leaf("a"), leaf("b"))),)), leaf("e")))
    assert tree_edit_distance(t1, t2) == 2


def test_ted_on_dom_ignores_text():
    a = parse_html("<div><p>one</p><p>two</p></div>")
    b = parse_html("<div><p>three</p><span>x</span></div>")
    assert tag_tree(a)[0] == "html"
    assert tree_edit_distance(a, b) == 1


def test_ted_matches_oracle_sample():
    rng = random.Random(11)
    trees = all_trees(5, "ab")
    for _ in range(300):
        t1, t2 = rng.choice(trees), rng.choice(trees)
        assert tree_edit_distance(t1, t2) == brute_force_ted(t1, t2)


def test_shapes_count():
    assert len(all_shapes(6)) == 1 + 1 + 2 + 5 + 14 + 42


def test_ted_axioms_random():
    rng = random.Random(3)
    trees = all_trees(6, "abc")
    for _ in range(100):
        a, b, c = (rng.choice(trees) for _ in range(3))
        ab = tree_edit_distance(a, b)
        assert ab == tree_edit_distance(b, a)
        assert (ab == 0) == (a == b)
        assert tree_edit_distance(a, c) <= ab + tree_edit_distance(b, c)


def img(array):
    return RasterImage.from_array(np.asarray(array, dtype=float))


def test_ssim_identical_and_constant_closed_form():
    rng = np.random.default_rng(0)
    x = rng.integers(0, 256, (40, 50))
    assert ssim(img(x), img(x)) == pytest.approx(1.0)
    c1 = (0.01 * 255) ** 2
    got = ssim(img(np.full((20, 20), 64)), img(np.full((20, 20), 128)))
    assert got == pytest.approx((2 * 64 * 128 + c1) / (64 ** 2 + 128 ** 2 + c1), rel=1e-12)
    assert got == pytest.approx((16384 + 6.5025) / (20480 + 6.5025), rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_ssim_matches_skimage(seed):
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 256, (48, 64)).astype(float)
    y = np.clip(x + rng.normal(0, 25, x.shape), 0, 255)
    ours = ssim(img(x), img(y))
    _, full = structural_similarity(x, y, gaussian_weights=True, sigma=1.5,
                                    use_sample_covariance=False, data_range=255, full=True)
    # skimage pads the borders; compare on the region where the window fits
    assert ours == pytest.approx(full[5:-5, 5:-5].mean(), abs=1e-9)


def test_ssim_brightness_shift_is_small():
    rng = np.random.default_rng(1)
    x = rng.integers(20, 200, (32, 32)).astype(float)
    assert ssim(img(x), img(x + 1)) > 1 - 1e-3


def test_ssim_errors():
    with pytest.raises(DimensionMismatch):
        ssim(img(np.zeros((20, 20))), img(np.zeros((20, 21))))
    with pytest.raises(ImageTooSmall):
        ssim(img(np.zeros((10, 20))), img(np.zeros((10, 20))))


def test_structural_accuracy():
    a = img(np.random.default_rng(2).integers(0, 256, (20, 20)))
    b = img(np.random.default_rng(3).integers(0, 256, (20, 20)))
    assert structural_accuracy([(a, a), (b, b)]) == 1.0
    assert structural_accuracy([(a, a), (a, b)]) == 0.5
    with pytest.raises(EmptyInput):
        structural_accuracy([])


class VecProvider:
    def __init__(self, text, image):
        self.text, self.image = text, image

    def embed_text(self, text):
        return np.array(self.text[text])

    def embed_image(self, image):
        return np.array(self.image[image])


def test_caption_score():
    p = VecProvider({"cat": [1, 0], "dog": [0, 1]}, {"c.png": [2, 0], "d.png": [1, 0]})
    assert caption_image_score([("cat", "c.png")], p) == pytest.approx(1.0)
    assert caption_image_score([("dog", "d.png")], p) == pytest.approx(0.0)
    assert caption_image_score([("cat", "c.png"), ("", "d.png")], p) == pytest.approx(0.5)
    with pytest.raises(ProviderUnavailable):
        caption_image_score([("cat", "c.png")], None)
    with pytest.raises(EmptyInput):
        caption_image_score([], p)
    assert cosine([0, 0], [1, 1]) == 0.0


def test_improvement():
    assert violation_improvement(5.335, 0.439) == pytest.approx(91.77, abs=0.01)
    assert violation_improvement(5.335, 0.509) == pytest.approx(90.46, abs=0.01)
    with pytest.raises(ZeroBaseline):
        violation_improvement(0, 0)


def test_load_image_png_and_pgm(tmp_path):
    arr = np.arange(12 * 16, dtype=np.uint8).reshape(12, 16)
    Image.fromarray(arr, mode="L").save(tmp_path / "a.png")
    Image.fromarray(arr, mode="L").save(tmp_path / "a.pgm")
    for name in ("a.png", "a.pgm"):
        got = load_image(tmp_path / name, size=None)
        assert (got.width, got.height) == (16, 12)
        assert np.array_equal(got.as_array(), arr.astype(float))
    resized = load_image(tmp_path / "a.png")
    assert (resized.width, resized.height) == (640, 360)


def test_load_image_rgba_over_white(tmp_path):
    Image.new("RGBA", (4, 4), (0, 0, 0, 0)).save(tmp_path / "t.png")
    assert np.allclose(load_image(tmp_path / "t.png", size=None).as_array(), 255)
