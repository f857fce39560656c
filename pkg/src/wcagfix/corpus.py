"""Corpus manifests, asset verification and corpus-level evaluation."""
from __future__ import annotations

import json
import math
import re
import shlex
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import unquote, urlsplit

from .dom import DomTree, parse_html
from .errors import AlignmentMismatch, ManifestParseError, WcagFixError
from .metrics import (CommandEmbedder, caption_image_score, load_image, mean, ssim,
                      ssim_parameters, STRUCTURAL_THRESHOLD, tree_edit_distance,
                      violation_improvement)
from .rules import RuleConfig, check_document

METRICS_SCHEMA_VERSION = 1

_PATH_FIELDS = ("html_path", "screenshot_path", "ground_truth_html_path",
                "ground_truth_screenshot_path")


@dataclass(frozen=True)
class ManifestEntry:
    doc_id: str
    html_path: Path
    screenshot_path: Path | None = None
    ground_truth_html_path: Path | None = None
    ground_truth_screenshot_path: Path | None = None
    asset_paths: tuple[Path, ...] = ()


@dataclass
class CorpusManifest:
    """Entries of a line-oriented JSON manifest; paths are resolved against ``base_dir``."""

    base_dir: Path
    entries: list[ManifestEntry] = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def doc_ids(self):
        return [e.doc_id for e in self.entries]


def _relative(base, value, where):
    if not isinstance(value, str) or not value:
        raise ManifestParseError(f"{where}: path must be a non-empty string")
    if Path(value).is_absolute():
        raise ManifestParseError(f"{where}: path {value!r} must be relative to the manifest")
    return base / value


def parse_manifest(text: str, base_dir) -> CorpusManifest:
    base_dir = Path(base_dir)
    manifest = CorpusManifest(base_dir)
    seen = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        where = f"line {lineno}"
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestParseError(f"{where}: {exc.msg}") from None
        if not isinstance(row, dict):
            raise ManifestParseError(f"{where}: expected a JSON object")
        doc_id = row.get("doc_id")
        if not isinstance(doc_id, str) or not doc_id:
            raise ManifestParseError(f"{where}: missing doc_id")
        if doc_id in seen:
            raise ManifestParseError(f"{where}: duplicate doc_id {doc_id!r}")
        seen.add(doc_id)
        if "html_path" not in row:
            raise ManifestParseError(f"{where}: missing html_path")
        paths = {}
        for name in _PATH_FIELDS:
            value = row.get(name)
            paths[name] = None if value is None else _relative(base_dir, value, where)
        assets = row.get("asset_paths", [])
        if not isinstance(assets, list):
            raise ManifestParseError(f"{where}: asset_paths must be a list")
        manifest.entries.append(ManifestEntry(
            doc_id=doc_id,
            asset_paths=tuple(_relative(base_dir, a, where) for a in assets),
            **paths,
        ))
    return manifest


def load_manifest(path) -> CorpusManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestParseError(f"cannot read manifest {path}: {exc}") from exc
    return parse_manifest(text, path.parent)


def write_manifest(manifest: CorpusManifest, path):
    """Write ``manifest`` as JSON lines with paths relative to the file's directory."""
    path = Path(path)
    base = path.parent.resolve()

    def rel(p):
        return Path(p).resolve().relative_to(base).as_posix()

    lines = []
    for e in manifest.entries:
        row = {"doc_id": e.doc_id}
        for name in _PATH_FIELDS:
            value = getattr(e, name)
            if value is not None:
                row[name] = rel(value)
        row["asset_paths"] = [rel(a) for a in e.asset_paths]
        lines.append(json.dumps(row, sort_keys=False))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# asset verification

_REF_ATTRS = {
    "img": ("src",), "script": ("src",), "link": ("href",), "video": ("src", "poster"),
    "audio": ("src",), "source": ("src",), "track": ("src",), "embed": ("src",),
    "iframe": ("src",), "input": ("src",),
}


def local_references(tree: DomTree) -> list[str]:
    """Relative URLs of resources the page loads (images, scripts, styles, media)."""
    refs = []
    for node in tree.root.iter_elements():
        for attr in _REF_ATTRS.get(node.tag, ()):
            value = (node.get(attr) or "").strip()
            if node.tag == "link" and "stylesheet" not in (node.get("rel") or "").lower():
                continue
            if not value or value.startswith(("#", "//")):
                continue
            parts = urlsplit(value)
            if parts.scheme or parts.netloc:
                continue
            path = unquote(parts.path)
            if path and path not in refs:
                refs.append(path)
    return refs


@dataclass
class AssetReport:
    missing: dict[str, list[str]] = field(default_factory=dict)

    @property
    def excludable(self):
        return [doc_id for doc_id, paths in self.missing.items() if paths]

    @property
    def ok(self):
        return not self.excludable

    def to_dict(self):
        return {"schema_version": METRICS_SCHEMA_VERSION, "missing": self.missing,
                "excludable": self.excludable}


def verify_assets(manifest: CorpusManifest) -> AssetReport:
    """List referenced files that do not exist, per entry.

    Checks the manifest's own paths, the listed assets, and local resources
    referenced from each page's HTML. Entries with anything missing are
    flagged as excludable.
    """
    report = AssetReport()
    for entry in manifest:
        missing = []
        listed = [getattr(entry, name) for name in _PATH_FIELDS] + list(entry.asset_paths)
        for p in listed:
            if p is not None and not p.exists():
                missing.append(_display(p, manifest.base_dir))
        if entry.html_path.exists():
            try:
                tree = parse_html(entry.html_path.read_bytes())
            except WcagFixError:
                tree = None
            if tree is not None:
                for ref in local_references(tree):
                    target = (entry.html_path.parent / ref)
                    shown = _display(target, manifest.base_dir)
                    if not target.exists() and shown not in missing:
                        missing.append(shown)
        if missing:
            report.missing[entry.doc_id] = missing
    return report


def _display(path, base):
    try:
        return Path(path).resolve().relative_to(Path(base).resolve()).as_posix()
    except ValueError:
        return str(path)


# --------------------------------------------------------------------------
# corpus evaluation


@dataclass(frozen=True)
class OutputEntry:
    """A generated page aligned with a manifest entry."""

    doc_id: str
    html_path: Path
    screenshot_path: Path | None = None


@dataclass
class DocumentMetrics:
    doc_id: str
    raw_violations: int
    violations: int
    tree_edit_distance: int
    ssim: float | None = None
    caption_score: float | None = None

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class MetricsRecord:
    avg_violations: float
    raw_avg_violations: float
    tree_edit_distance: float
    structural_accuracy: float | None = None
    caption_img_score: float | None = None
    improvement_percent: float | None = None
    documents: list[DocumentMetrics] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.structural_accuracy is not None and not 0 <= self.structural_accuracy <= 1:
            raise ValueError("structural_accuracy must lie in [0, 1]")

    def to_dict(self):
        return {
            "schema_version": METRICS_SCHEMA_VERSION,
            "avg_violations": self.avg_violations,
            "raw_avg_violations": self.raw_avg_violations,
            "improvement_percent": self.improvement_percent,
            "caption_img_score": self.caption_img_score,
            "structural_accuracy": self.structural_accuracy,
            "tree_edit_distance": self.tree_edit_distance,
            "ssim_parameters": ssim_parameters(),
            "flags": list(self.flags),
            "documents": [d.to_dict() for d in self.documents],
        }


def render_screenshot(command, html_path, out_dir) -> Path | None:
    """Run ``<command> <html> <png>``; returns the PNG path or None on failure."""
    out = Path(out_dir) / (Path(html_path).stem + ".png")
    argv = shlex.split(command) if isinstance(command, str) else list(command)
    try:
        proc = subprocess.run(argv + [str(html_path), str(out)], capture_output=True,
                              timeout=300)
    except (OSError, subprocess.TimeoutExpired):
        return None
    return out if proc.returncode == 0 and out.exists() else None


def _image_pairs(tree, base_dir):
    pairs = []
    for img in tree.find_all("img"):
        src = (img.get("src") or "").strip()
        if not src or urlsplit(src).scheme:
            continue
        pairs.append((img.get("alt") or "", Path(base_dir) / unquote(urlsplit(src).path)))
    return pairs


def _evaluate_one(entry: ManifestEntry, output: OutputEntry, rules: RuleConfig,
                  provider, renderer, scratch):
    raw = parse_html(entry.html_path.read_bytes())
    fixed = parse_html(Path(output.html_path).read_bytes())
    reference_path = entry.ground_truth_html_path or entry.html_path
    reference = raw if reference_path == entry.html_path else parse_html(reference_path.read_bytes())

    doc = DocumentMetrics(
        doc_id=entry.doc_id,
        raw_violations=check_document(raw, rules, entry.doc_id).total,
        violations=check_document(fixed, rules, entry.doc_id).total,
        tree_edit_distance=tree_edit_distance(fixed, reference),
    )

    ref_shot = entry.ground_truth_screenshot_path or entry.screenshot_path
    out_shot = output.screenshot_path
    if out_shot is None and renderer:
        out_shot = render_screenshot(renderer, output.html_path, scratch)
    if ref_shot is not None and out_shot is not None and Path(ref_shot).exists() \
            and Path(out_shot).exists():
        doc.ssim = ssim(load_image(out_shot), load_image(ref_shot))

    if provider is not None:
        # assets live next to the source page; the output may sit elsewhere
        pairs = _image_pairs(fixed, entry.html_path.parent)
        if pairs:
            doc.caption_score = caption_image_score(pairs, provider)
    return doc


def align_outputs(manifest: CorpusManifest, outputs) -> list[OutputEntry]:
    outputs = [o if isinstance(o, OutputEntry) else OutputEntry(*o) for o in outputs]
    if len(outputs) != len(manifest.entries):
        raise AlignmentMismatch(
            f"{len(outputs)} outputs for {len(manifest.entries)} manifest entries")
    for entry, out in zip(manifest.entries, outputs):
        if entry.doc_id != out.doc_id:
            raise AlignmentMismatch(f"output {out.doc_id!r} is aligned with {entry.doc_id!r}")
    return outputs


def outputs_from_dir(manifest: CorpusManifest, directory) -> list[OutputEntry]:
    """Pair each manifest entry with ``<dir>/<doc_id>.html`` (and ``.png`` if present)."""
    directory = Path(directory)
    outputs = []
    for entry in manifest:
        html = directory / f"{entry.doc_id}.html"
        if not html.exists():
            raise AlignmentMismatch(f"no output for {entry.doc_id!r} in {directory}")
        png = directory / f"{entry.doc_id}.png"
        outputs.append(OutputEntry(entry.doc_id, html, png if png.exists() else None))
    return outputs


def evaluate_corpus(manifest: CorpusManifest, outputs, provider=None, rules=None,
                    renderer=None, workers=1) -> MetricsRecord:
    """Aggregate violation, tree, pixel and caption metrics over a corpus.

    Tree edit distance is compared against the ground-truth page when the
    manifest names one, otherwise against the input page. Pixel metrics need
    screenshots on both sides (or a renderer command); when any document
    lacks them structural accuracy is reported as absent. Means are taken in
    manifest order regardless of ``workers``.
    """
    outputs = align_outputs(manifest, outputs)
    rules = rules or RuleConfig()
    if isinstance(provider, str):
        provider = CommandEmbedder(provider)
    with tempfile.TemporaryDirectory() as scratch:
        jobs = list(zip(manifest.entries, outputs))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                docs = list(pool.map(
                    lambda job: _evaluate_one(*job, rules, provider, renderer, scratch), jobs))
        else:
            docs = [_evaluate_one(e, o, rules, provider, renderer, scratch) for e, o in jobs]

    if not docs:
        return MetricsRecord(0.0, 0.0, 0.0, flags=["empty corpus"])
    flags = []
    raw_avg = mean(d.raw_violations for d in docs)
    avg = mean(d.violations for d in docs)
    improvement = None
    if raw_avg > 0:
        improvement = violation_improvement(raw_avg, avg)
    else:
        flags.append("improvement absent: raw corpus has no violations")

    accuracy = None
    if all(d.ssim is not None for d in docs):
        accuracy = sum(1 for d in docs if d.ssim > STRUCTURAL_THRESHOLD) / len(docs)
    else:
        flags.append("structural_accuracy absent: screenshots missing")

    caption = None
    if provider is None:
        flags.append("caption_img_score absent: no embedding provider")
    else:
        scored = [d.caption_score for d in docs if d.caption_score is not None]
        caption = mean(scored) if scored else None
        if caption is None:
            flags.append("caption_img_score absent: no images")

    return MetricsRecord(
        avg_violations=avg,
        raw_avg_violations=raw_avg,
        tree_edit_distance=mean(d.tree_edit_distance for d in docs),
        structural_accuracy=accuracy,
        caption_img_score=caption,
        improvement_percent=improvement,
        documents=docs,
        flags=flags,
    )


_TABLE_COLUMNS = (
    ("Method", "{}", 24),
    ("# Violation", "{:.3f}", 12),
    ("Caption-Img", "{:.3f}", 12),
    ("Struct. Acc.", "{:.3f}", 13),
    ("Tree Edit Dist.", "{:.2f}", 16),
)


def format_metrics_table(records) -> str:
    """Fixed-width table, one row per ``(name, MetricsRecord)``; absent values print ``-``."""
    header = "".join(title.ljust(width) if i == 0 else title.rjust(width)
                     for i, (title, _, width) in enumerate(_TABLE_COLUMNS))
    lines = [header.rstrip(), "-" * len(header)]
    for name, rec in records:
        values = (name, rec.avg_violations, rec.caption_img_score, rec.structural_accuracy,
                  rec.tree_edit_distance)
        cells = []
        for i, ((_, fmt, width), value) in enumerate(zip(_TABLE_COLUMNS, values)):
            if value is None or (isinstance(value, float) and math.isnan(value)):
                text = "-"
            else:
                text = fmt.format(value)
            cells.append(text.ljust(width) if i == 0 else text.rjust(width))
        lines.append("".join(cells).rstrip())
    return "\n".join(lines) + "\n"


_SLUG_RE = re.compile(r"[^A-Za-z0-9_.-]+")


def safe_doc_id(doc_id: str) -> str:
    """File-name-safe form of a document id."""
    return _SLUG_RE.sub("_", doc_id).strip("._") or "doc"
