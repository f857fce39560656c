"""Chi-squared statistics for preference votes: goodness of fit, pairwise tests, effect size."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import EmptyCounts

_EPS = 1e-16
_MAX_TERMS = 10_000


def _lower_series(a, x):
    # P(a, x) by the power series; converges fast for x < a + 1
    term = total = 1.0 / a
    ap = a
    for _ in range(_MAX_TERMS):
        ap += 1
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_fraction(a, x):
    # Q(a, x) by the continued fraction (modified Lentz); good for x >= a + 1
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def regularized_upper_gamma(a: float, x: float) -> float:
    """Q(a, x) = Gamma(a, x) / Gamma(a) for a > 0, x >= 0."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 1.0
    if x < a + 1:
        return max(0.0, 1.0 - _lower_series(a, x))
    return _upper_fraction(a, x)


def chi2_sf(x: float, dof: int) -> float:
    """Upper-tail probability of the chi-squared distribution."""
    if dof < 1:
        raise ValueError("dof must be >= 1")
    if x <= 0:
        return 1.0
    return regularized_upper_gamma(dof / 2.0, x / 2.0)


@dataclass(frozen=True)
class VoteCounts:
    """Preference tallies per method, in presentation order."""

    counts: tuple[tuple[str, int], ...]

    def __post_init__(self):
        for name, c in self.counts:
            if c < 0:
                raise ValueError(f"negative count for {name}")

    @classmethod
    def from_mapping(cls, mapping):
        return cls(tuple((str(k), int(v)) for k, v in dict(mapping).items()))

    @property
    def n(self):
        return sum(c for _, c in self.counts)

    @property
    def names(self):
        return [name for name, _ in self.counts]

    @property
    def values(self):
        return [c for _, c in self.counts]


def _values(counts):
    if isinstance(counts, VoteCounts):
        return counts.values
    if isinstance(counts, dict):
        return list(counts.values())
    return list(counts)


@dataclass(frozen=True)
class ChiSquared:
    chi2: float
    dof: int
    p_value: float

    def __iter__(self):
        return iter((self.chi2, self.dof, self.p_value))


def chi2_goodness(counts) -> ChiSquared:
    """Pearson statistic against equal proportions across ``k`` categories."""
    values = _values(counts)
    k, n = len(values), sum(values)
    if k < 2 or n <= 0:
        raise EmptyCounts("need at least two categories and a positive total")
    expected = n / k
    chi2 = math.fsum((v - expected) ** 2 for v in values) / expected
    return ChiSquared(chi2, k - 1, chi2_sf(chi2, k - 1))


def chi2_pairwise(n_i: int, n_j: int, yates: bool = False) -> tuple[float, float]:
    """Two-cell equal-proportion test of ``n_i`` against ``n_j``.

    Returns ``(chi2, p)`` where ``p`` is one-tailed for the hypothesis that
    the first option is preferred: half the two-sided p when ``n_i > n_j``,
    otherwise one minus that half.
    """
    total = n_i + n_j
    if total <= 0:
        raise EmptyCounts("pairwise test needs at least one vote")
    m = total / 2.0
    dev = abs(n_i - m)
    if yates:
        dev = max(0.0, dev - 0.5)
    chi2 = 2.0 * dev * dev / m
    two_sided = chi2_sf(chi2, 1)
    p = two_sided / 2.0 if n_i > n_j else 1.0 - two_sided / 2.0
    return chi2, p


def cramers_v(chi2: float, n: int, k: int) -> float:
    if n <= 0 or k < 2:
        raise ValueError("need n > 0 and k >= 2")
    return math.sqrt(chi2 / (n * (k - 1)))


def bonferroni(alpha: float, m: int) -> float:
    if m < 1:
        raise ValueError("m must be >= 1")
    return alpha / m


def read_vote_counts(path) -> VoteCounts:
    """Read ``method count`` rows (comma, tab or space separated; ``#`` comments)."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p for p in line.replace(",", " ").replace("\t", " ").split(" ") if p]
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'method count'")
        name, count = parts
        try:
            rows.append((name, int(count)))
        except ValueError:
            if not rows and lineno == 1:
                continue  # header row
            raise ValueError(f"{path}:{lineno}: count must be an integer") from None
    if not rows:
        raise EmptyCounts(f"{path}: no counts")
    return VoteCounts(tuple(rows))


def _fmt_p(p):
    if p < 1e-15:
        return "< 1e-15"
    if p < 0.001:
        return f"= {p:.3g} (< 0.001)"
    return f"= {p:.4f}"


def study_summary(votes: VoteCounts, alpha: float = 0.05) -> str:
    """Plain-text report: global test, effect size, pairwise tests, adjusted threshold.

    Every pair of methods is tested, the more-voted one first, and the
    threshold is divided by the number of pairs.
    """
    g = chi2_goodness(votes)
    k, n = len(votes.counts), votes.n
    ranked = sorted(votes.counts, key=lambda kv: -kv[1])
    pairs = list(itertools.combinations(ranked, 2))
    m = len(pairs)
    adjusted = bonferroni(alpha, m)
    lines = [
        f"responses: {n}",
        "votes: " + ", ".join(f"{name}={c}" for name, c in votes.counts),
        f"global chi2({g.dof}) = {g.chi2:.2f}, p {_fmt_p(g.p_value)}",
        f"Cramer's V = {cramers_v(g.chi2, n, k):.4f}",
        f"Bonferroni-adjusted alpha = {alpha}/{m} = {adjusted:.4f}",
    ]
    for (a, na), (b, nb) in pairs:
        chi2, p = chi2_pairwise(na, nb)
        verdict = "significant" if p < adjusted else "not significant"
        lines.append(f"{a} > {b}: chi2 = {chi2:.2f}, one-tailed p {_fmt_p(p)} ({verdict})")
    return "\n".join(lines) + "\n"


def all_pairwise(votes: VoteCounts):
    """``{(a, b): (chi2, p)}`` for every ordered pair with ``a`` listed first."""
    return {(a, b): chi2_pairwise(na, nb)
            for (a, na), (b, nb) in itertools.combinations(votes.counts, 2)}
