"""Acceptance criteria, one check each.

Every check prints a single ``PASS``/``FAIL`` line with its measured values
and runtime. Run under pytest, or directly with ``python tests/test_acceptance.py``.
"""
import random
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from decode_oracle import random_table, simulate  # noqa: E402
from ted_oracle import all_shapes, all_trees, brute_force_ted  # noqa: E402
from wcagfix.cli import main as cli_main  # noqa: E402
from wcagfix.color import BLACK, WHITE, Rgb, contrast_ratio, parse_color, repair_contrast, to_hsl  # noqa: E402
from wcagfix.dom import parse_html, serialize  # noqa: E402
from wcagfix.fix import fix_to_fixed_point  # noqa: E402
from wcagfix.guidance import (GuidanceConfig, decode, guided_distribution,  # noqa: E402
                              guided_logits, make_toy_model)
from wcagfix.metrics import tree_edit_distance, violation_improvement  # noqa: E402
from wcagfix.rules import ALL_RULES, check_document  # noqa: E402
from wcagfix.stats import bonferroni, chi2_goodness, chi2_pairwise  # noqa: E402

TESTS = Path(__file__).resolve().parent
RESULTS = {}


def report(number, ok, detail, elapsed, budget):
    within = elapsed <= budget
    status = "PASS" if ok and within else "FAIL"
    line = f"criterion {number}: {status} ({detail}; {elapsed:.2f}s of {budget:g}s budget)"
    RESULTS[number] = line
    print(line)
    return ok and within


# --------------------------------------------------------------------------


def criterion_1():
    t = time.perf_counter()
    g = chi2_goodness((248, 54, 99))
    pair, _ = chi2_pairwise(248, 99)
    alpha = bonferroni(0.05, 3)
    ok = (abs(g.chi2 - 154.27) <= 0.01 and g.dof == 2 and g.p_value < 0.001
          and abs(pair - 64.00) <= 0.05 and abs(alpha - 0.0167) <= 1e-4)
    detail = f"chi2={g.chi2:.4f} dof={g.dof} p={g.p_value:.3g} pairwise={pair:.4f} alpha={alpha:.5f}"
    return report(1, ok, detail, time.perf_counter() - t, 1)


def criterion_2():
    t = time.perf_counter()
    a = violation_improvement(5.335, 0.439)
    b = violation_improvement(5.335, 0.509)
    ok = abs(a - 91.8) <= 0.1 and abs(b - 90.5) <= 0.1
    return report(2, ok, f"{a:.3f}% and {b:.3f}%", time.perf_counter() - t, 1)


def _oracle_ratio(c1, c2):
    def lum(c):
        def lin(v):
            v = v / 255
            return v / 12.92 if v <= 0.03928 else ((v + 0.055) / 1.055) ** 2.4
        return 0.2126 * lin(c[0]) + 0.7152 * lin(c[1]) + 0.0722 * lin(c[2])
    l1, l2 = lum(c1), lum(c2)
    return (max(l1, l2) + 0.05) / (min(l1, l2) + 0.05)


def criterion_3():
    t = time.perf_counter()
    bw = contrast_ratio(BLACK, WHITE)
    grey = contrast_ratio(parse_color("#767676"), WHITE)
    grey_oracle = _oracle_ratio((0x76, 0x76, 0x76), (255, 255, 255))
    rng = random.Random(2024)
    met = hue_ok = hue_checked = 0
    worst_hue = 0.0
    for _ in range(1000):
        fg = Rgb(*(rng.randrange(256) for _ in range(3)))
        bg = Rgb(*(rng.randrange(256) for _ in range(3)))
        reachable = max(_oracle_ratio(BLACK, bg), _oracle_ratio(WHITE, bg))
        target = rng.uniform(1.0, min(reachable, 21.0))
        out = repair_contrast(fg, bg, target)
        met += _oracle_ratio(out, bg) >= target - 1e-9
        h_in, _, _ = to_hsl(fg)
        h_out, _, l_out = to_hsl(out)
        # hue is undefined for greys and for pure black or white
        if max(fg) != min(fg) and 1e-6 < l_out < 1 - 1e-6:
            hue_checked += 1
            d = abs(h_in - h_out) % 360
            d = min(d, 360 - d)
            worst_hue = max(worst_hue, d)
            hue_ok += d < 1.0
    ok = (bw == 21.0 and abs(grey - 4.54) <= 0.01 and abs(grey - grey_oracle) < 1e-12
          and met == 1000 and hue_ok == hue_checked)
    detail = (f"black/white={bw} #767676={grey:.4f} target met {met}/1000, "
              f"hue within 1 deg {hue_ok}/{hue_checked} (worst {worst_hue:.2e} deg)")
    return report(3, ok, detail, time.perf_counter() - t, 5)


def criterion_4():
    t = time.perf_counter()
    rng = np.random.default_rng(4)
    endpoints = affine = softmax = 0
    for _ in range(1000):
        k = int(rng.integers(1, 12))
        pos, neg = rng.normal(0, 10, k), rng.normal(0, 10, k)
        endpoints += (np.array_equal(guided_logits(pos, neg, 1), pos)
                      and np.array_equal(guided_logits(pos, neg, 0), neg))
        affine += all(np.allclose(guided_logits(pos, neg, g), neg + g * (pos - neg),
                                  rtol=0, atol=1e-9) for g in (0.5, 1.05, 1.1, 2))
        p = guided_distribution(pos)
        softmax += (abs(p.sum() - 1) <= 1e-9
                    and np.allclose(p, guided_distribution(pos + rng.normal(0, 100)), atol=1e-9))
    decode_ok = 0
    prng = random.Random(4)
    runs = 0
    for _ in range(50):
        table = random_table(prng, ["t0", "t1", "t2", "t3", "</s>"])
        model = make_toy_model(table)
        for gamma in (0, 0.5, 1, 1.05, 1.1, 2):
            runs += 1
            got = decode(model, ["prompt"], GuidanceConfig(gamma=gamma, max_tokens=16))
            decode_ok += got == simulate(table, list(model.vocabulary), ["prompt"], gamma, 16)
    ok = endpoints == affine == softmax == 1000 and decode_ok == runs
    detail = (f"exact endpoints {endpoints}/1000, affine {affine}/1000, softmax {softmax}/1000, "
              f"decode vs simulation {decode_ok}/{runs}")
    return report(4, ok, detail, time.perf_counter() - t, 10)


def _relabel(shape, labels, rng):
    return (rng.choice(labels), tuple(_relabel(c, labels, rng) for c in shape[1]))


def criterion_5():
    t = time.perf_counter()
    rng = random.Random(5)
    trees = all_trees(6, "abc")
    mismatches = pairs = 0
    # every labeled tree against a seeded partner drawn from the same family
    for a in trees:
        b = rng.choice(trees)
        pairs += 1
        mismatches += tree_edit_distance(a, b) != brute_force_ted(a, b)
    # every pair of shapes, labels drawn at random
    shapes = all_shapes(6)
    for s1 in shapes:
        for s2 in shapes:
            a, b = _relabel(s1, "abc", rng), _relabel(s2, "abc", rng)
            pairs += 1
            mismatches += tree_edit_distance(a, b) != brute_force_ted(a, b)
    # every pair among the trees of at most three nodes
    small = all_trees(3, "abc")
    for a in small:
        for b in small:
            pairs += 1
            mismatches += tree_edit_distance(a, b) != brute_force_ted(a, b)
    axioms = 0
    for _ in range(500):
        a, b, c = (rng.choice(trees) for _ in range(3))
        ab, ba = tree_edit_distance(a, b), tree_edit_distance(b, a)
        axioms += (ab == ba and tree_edit_distance(a, a) == 0 and (ab == 0) == (a == b)
                   and tree_edit_distance(a, c) <= ab + tree_edit_distance(b, c))
    ok = mismatches == 0 and axioms == 500
    detail = (f"{len(trees)} trees, {pairs} pairs vs brute force, {mismatches} mismatches, "
              f"axioms {axioms}/500")
    return report(5, ok, detail, time.perf_counter() - t, 60)


def criterion_6():
    t = time.perf_counter()
    pages = sorted((TESTS / "fixtures" / "synthetic" / "pages").glob("*.html"))
    seeded = {r: 0 for r in ALL_RULES}
    residual = increases = not_idempotent = nondeterministic = 0
    for path in pages:
        tree = parse_html(path.read_bytes())
        for rule, n in check_document(tree).counts.items():
            seeded[rule] += n
        fixed, history = fix_to_fixed_point(tree)
        reports = [h.report for h in history] + [check_document(fixed)]
        for before, after in zip(reports, reports[1:]):
            increases += after.total > before.total or any(
                after.counts[r] > before.counts[r] for r in ALL_RULES)
        residual += reports[-1].total
        again, _ = fix_to_fixed_point(fixed)
        not_idempotent += serialize(again) != serialize(fixed)
        twice, _ = fix_to_fixed_point(parse_html(path.read_bytes()))
        nondeterministic += serialize(twice) != serialize(fixed)
    all_rules_seeded = all(n > 0 for n in seeded.values())
    ok = (len(pages) == 50 and all_rules_seeded and residual == 0 and increases == 0
          and not_idempotent == 0 and nondeterministic == 0)
    detail = (f"{len(pages)} pages, {sum(seeded.values())} seeded violations over "
              f"{sum(n > 0 for n in seeded.values())}/10 rules, residual {residual}, "
              f"count increases {increases}, non-idempotent {not_idempotent}")
    return report(6, ok, detail, time.perf_counter() - t, 30)


def _block_structure_ok(text):
    blocks = [b for b in text.split("\n\n") if b.strip()]
    prefixes = ["Level: violation", "XPath: /", "Snippet: <", "Help: ", "- Message: "]
    return all(len(b.rstrip("\n").split("\n")) == 5 and all(
        line.startswith(p) for line, p in zip(b.split("\n"), prefixes)) for b in blocks)


def criterion_7(tmp_dir):
    t = time.perf_counter()
    out = Path(tmp_dir)
    import contextlib
    import io

    with contextlib.redirect_stdout(io.StringIO()):
        cli_main(["check", str(TESTS / "fixtures" / "pages"), "--output-dir", str(out)])
    goldens = sorted((TESTS / "golden").glob("*.txt"))
    identical = structured = 0
    for golden in goldens:
        expected = golden.read_bytes()
        got = (out / "reports" / golden.name).read_bytes()
        identical += got == expected
        structured += _block_structure_ok(expected.decode("utf-8"))
    ok = len(goldens) == 3 and identical == structured == len(goldens)
    detail = f"{identical}/{len(goldens)} reports byte-identical, {structured} in block format"
    return report(7, ok, detail, time.perf_counter() - t, 10)


CRITERION_8 = ("criterion 8: NOT REPRODUCIBLE (declared; the dataset-scale violation "
               "reduction and CLIP scores need the benchmark data and a fine-tuned model, "
               "covered in substitute by criteria 2, 4 and 6)")


# --------------------------------------------------------------------------


def test_criterion_1():
    assert criterion_1(), RESULTS[1]


def test_criterion_2():
    assert criterion_2(), RESULTS[2]


def test_criterion_3():
    assert criterion_3(), RESULTS[3]


def test_criterion_4():
    assert criterion_4(), RESULTS[4]


def test_criterion_5():
    assert criterion_5(), RESULTS[5]


def test_criterion_6():
    assert criterion_6(), RESULTS[6]


def test_criterion_7(tmp_path):
    assert criterion_7(tmp_path), RESULTS[7]


def test_criterion_8():
    RESULTS[8] = CRITERION_8
    print(CRITERION_8)
    pytest.skip("declared not reproducible without the benchmark dataset and model")


if __name__ == "__main__":
    import tempfile

    outcomes = [criterion_1(), criterion_2(), criterion_3(), criterion_4(), criterion_5(),
                criterion_6()]
    with tempfile.TemporaryDirectory() as tmp:
        outcomes.append(criterion_7(tmp))
    print(CRITERION_8)
    sys.exit(0 if all(outcomes) else 1)
