"""Violation-conditioned negative-guidance decoding over a pluggable next-token model.

The model is queried twice per step, once under each violation condition,
and the two logit vectors are blended before greedy (top-1) selection.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .errors import IncompleteTable, LengthMismatch, NoHtmlFound

EOS = "</s>"
START = "<s>"
DEFAULT_GAMMA = 1.1
DEFAULT_MAX_TOKENS = 2048
MISSING_LOGIT = -20.0


class Condition(enum.Enum):
    ZERO_VIOLATIONS = "zero"
    NONZERO_VIOLATIONS = "nonzero"

    @property
    def prompt_text(self):
        slot = "zero" if self is Condition.ZERO_VIOLATIONS else "non-zero"
        return f"The expected output HTML has {slot} violations"


@dataclass(frozen=True)
class GuidanceConfig:
    gamma: float = DEFAULT_GAMMA
    max_tokens: int = DEFAULT_MAX_TOKENS
    sampling: str = "top1"

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.sampling != "top1":
            raise ValueError("only top-1 sampling is supported")


class ConditionalModel(Protocol):
    vocabulary: Sequence[str]
    eos_token: str

    def next_logits(self, prefix: Sequence[str], condition: Condition) -> np.ndarray:
        ...


def guided_logits(pos, neg, gamma: float) -> np.ndarray:
    """Blend ``pos`` (zero-violation logits) and ``neg`` (non-zero) as
    ``neg + gamma * (pos - neg)``.

    Evaluated as ``(1 - gamma) * neg + gamma * pos`` so that gamma=1 returns
    ``pos`` and gamma=0 returns ``neg`` bit for bit.
    """
    pos = np.asarray(pos, dtype=float)
    neg = np.asarray(neg, dtype=float)
    if pos.shape != neg.shape:
        raise LengthMismatch(f"logit lengths differ: {pos.shape} vs {neg.shape}")
    if gamma == 1:
        return pos.copy()
    if gamma == 0:
        return neg.copy()
    return (1.0 - gamma) * neg + gamma * pos


def guided_distribution(logits) -> np.ndarray:
    """Softmax over the vocabulary, stabilized by subtracting the max."""
    z = np.asarray(logits, dtype=float)
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def decode(model: ConditionalModel, prompt_tokens: Sequence[str],
           cfg: GuidanceConfig | None = None) -> list[str]:
    """Greedy decoding on negative-guided logits.

    Stops at the end-of-sequence token (not included in the output) or after
    ``cfg.max_tokens`` tokens. Ties go to the lowest vocabulary index.
    """
    cfg = cfg or GuidanceConfig()
    if not prompt_tokens:
        raise ValueError("prompt must not be empty")
    prefix = list(prompt_tokens)
    out: list[str] = []
    vocab = list(model.vocabulary)
    while len(out) < cfg.max_tokens:
        pos = model.next_logits(prefix, Condition.ZERO_VIOLATIONS)
        neg = model.next_logits(prefix, Condition.NONZERO_VIOLATIONS)
        token = vocab[int(np.argmax(guided_logits(pos, neg, cfg.gamma)))]
        if token == model.eos_token:
            break
        out.append(token)
        prefix.append(token)
    return out


def decode_single(model: ConditionalModel, prompt_tokens: Sequence[str],
                  cfg: GuidanceConfig | None = None,
                  condition: Condition = Condition.ZERO_VIOLATIONS) -> list[str]:
    """Plain greedy decoding under one condition (one forward pass per step)."""
    cfg = cfg or GuidanceConfig()
    prefix = list(prompt_tokens)
    out: list[str] = []
    vocab = list(model.vocabulary)
    while len(out) < cfg.max_tokens:
        token = vocab[int(np.argmax(model.next_logits(prefix, condition)))]
        if token == model.eos_token:
            break
        out.append(token)
        prefix.append(token)
    return out


INSTRUCTION = (
    "Modify the following HTML code to comply with WCAG 2.2 accessibility guidelines. "
    "Ensure the output is a properly formatted HTML file without additional explanations "
    "or descriptions. Return only the modified HTML code without extra text or commentary."
)


def assemble_prompt(input_html: str, condition: Condition) -> str:
    return f"{INSTRUCTION}\n\n{condition.prompt_text}.\n\nInput HTML:\n{input_html}"


_HTML_SEGMENT = re.compile(r"<html\b[^>]*>.*?</html\s*>", re.IGNORECASE | re.DOTALL)


def extract_html_segment(text: str) -> str:
    """First ``<html ...>...</html>`` span, tags included (non-greedy)."""
    m = _HTML_SEGMENT.search(text)
    if not m:
        raise NoHtmlFound("no <html>...</html> segment in model output")
    return m.group(0)


# --------------------------------------------------------------------------
# toy bigram model


class ToyModel:
    """Deterministic bigram model: logits depend on the last prefix token and the condition.

    Prefix tokens outside the vocabulary (for instance prompt words) are
    looked up as the start token.
    """

    def __init__(self, vocabulary, rows, eos_token=EOS):
        self.vocabulary = tuple(vocabulary)
        self.eos_token = eos_token
        self._rows = rows

    def next_logits(self, prefix, condition):
        last = prefix[-1] if prefix else START
        if (last, condition) not in self._rows:
            last = START
        return self._rows[(last, condition)].copy()


def make_toy_model(table, eos_token=EOS, missing_logit=MISSING_LOGIT) -> ToyModel:
    """Build a :class:`ToyModel` from ``{(prefix_token, condition): {next_token: logit}}``.

    Vocabulary order is first appearance of each next token, with the
    end-of-sequence token appended if no row mentions it. Every non-EOS token
    (plus the start token) needs a row under both conditions; tokens a row
    does not mention get ``missing_logit``.
    """
    vocab: list[str] = []
    for row in table.values():
        for token in row:
            if token not in vocab:
                vocab.append(token)
    if eos_token not in vocab:
        vocab.append(eos_token)
    needed = [START] + [t for t in vocab if t != eos_token]
    rows = {}
    for prev in needed:
        for cond in Condition:
            key = (prev, cond)
            if key not in table:
                raise IncompleteTable(f"no row for prefix {prev!r} under {cond.value}")
            row = table[key]
            values = np.array([float(row.get(t, missing_logit)) for t in vocab])
            if not np.all(np.isfinite(values)):
                raise IncompleteTable(f"row ({prev!r}, {cond.value}) has non-finite logits")
            rows[key] = values
    return ToyModel(vocab, rows, eos_token)


_COND_NAMES = {"zero": Condition.ZERO_VIOLATIONS, "nonzero": Condition.NONZERO_VIOLATIONS,
               "non-zero": Condition.NONZERO_VIOLATIONS}


def _unescape(token):
    return token.replace("\\s", " ")


def parse_toy_table(text: str):
    """Parse ``prefix_token condition next_token logit`` lines.

    Blank lines and ``#`` comment lines are skipped; ``\\s`` inside a token
    stands for a space.
    """
    table: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4 or parts[1].lower() not in _COND_NAMES:
            raise IncompleteTable(f"line {lineno}: expected 'prefix condition next logit'")
        prev, cond, nxt, logit = parts
        try:
            value = float(logit)
        except ValueError:
            raise IncompleteTable(f"line {lineno}: bad logit {logit!r}") from None
        if not math.isfinite(value):
            raise IncompleteTable(f"line {lineno}: non-finite logit")
        table.setdefault((_unescape(prev), _COND_NAMES[cond.lower()]), {})[_unescape(nxt)] = value
    return table


def load_toy_model(path) -> ToyModel:
    return make_toy_model(parse_toy_table(Path(path).read_text(encoding="utf-8")))


def demo_model_path() -> Path:
    return Path(__file__).with_name("data") / "demo_model.tsv"


def tokenize_prompt(prompt: str) -> list[str]:
    return prompt.split() or [START]
