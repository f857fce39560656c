"""WCAG2 checking, deterministic repair, negative-guidance decoding and evaluation metrics."""
from .color import Rgb, contrast_ratio, parse_color, relative_luminance, repair_contrast
from .dom import DomNode, DomTree, XPath, parse_html, resolve_xpath, serialize, xpath_of
from .errors import WcagFixError
from .fix import FixAction, FixConfig, fix_to_fixed_point, fix_violation
from .guidance import (Condition, GuidanceConfig, assemble_prompt, decode, extract_html_segment,
                       guided_distribution, guided_logits, make_toy_model)
from .metrics import (RasterImage, caption_image_score, ssim, structural_accuracy,
                      tree_edit_distance, violation_improvement)
from .rules import RuleConfig, RuleId, Violation, ViolationReport, check_document, summarize
from .stats import VoteCounts, bonferroni, chi2_goodness, chi2_pairwise, cramers_v

__version__ = "0.1.0"
