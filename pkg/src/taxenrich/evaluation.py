"""Precision@k against graded relevance annotations."""

import logging
import statistics
from collections import defaultdict
from dataclasses import dataclass, field

from taxenrich.errors import DataError

log = logging.getLogger(__name__)

NOT, SOMEWHAT, RELEVANT = 0, 1, 2
GRADE_NAMES = {NOT: "not", SOMEWHAT: "somewhat", RELEVANT: "relevant"}


@dataclass
class AnnotationSet:
    judgments: dict[tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self):
        for key, grade in self.judgments.items():
            if grade not in GRADE_NAMES:
                raise DataError(f"grade {grade!r} for {key} is not one of 0, 1, 2")
        self._items = {item for item, _ in self.judgments}

    def grade(self, item, category):
        return self.judgments.get((item, category), NOT)

    def has_item(self, item):
        return item in self._items

    def is_hit(self, item, category, count_somewhat=False):
        g = self.grade(item, category)
        return g == RELEVANT or (count_somewhat and g == SOMEWHAT)


@dataclass
class EvalReport:
    precision_at: dict[int, float]
    per_item: dict[str, list[bool]]
    n_items: int
    unjudged: list[str] = field(default_factory=list)

    @property
    def unjudged_fraction(self):
        return len(self.unjudged) / self.n_items if self.n_items else 0.0


def load_annotations(path):
    judgments = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3 or parts[2] not in ("0", "1", "2"):
                raise DataError("expected item_id<TAB>category_path<TAB>grade(0|1|2)", path, lineno)
            judgments[(parts[0], parts[1])] = int(parts[2])
    return AnnotationSet(judgments)


def merge_annotations(sets):
    """Combine several annotators' judgments pair by pair.

    The merged grade is the median of the grades given (unjudged counts as
    ``not``), which equals the majority grade whenever one exists.
    """
    keys = sorted(set().union(*(s.judgments for s in sets)))
    return AnnotationSet({key: int(statistics.median_low([s.grade(*key) for s in sets])) for key in keys})


def precision_at_k(ranked, judg, item, k, count_somewhat=False):
    """Fraction of the first ``k`` ranked categories judged relevant; a short list counts as misses."""
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = sum(judg.is_hit(item, cat, count_somewhat) for cat in ranked[:k])
    return hits / k


def read_results(path, fmt="classification"):
    """Ranked category lists per item from a classification or attachment dump.

    ``classification`` rows are ``item<TAB>rank<TAB>path<TAB>score``;
    ``attachments`` rows are ``entity<TAB>path<TAB>probability<TAB>rank``.
    """
    if fmt not in ("classification", "attachments"):
        raise ValueError(f"unknown results format {fmt!r}")
    rows = defaultdict(list)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise DataError("expected four tab-separated columns", path, lineno)
            if fmt == "classification":
                item, rank, cat = parts[0], parts[1], parts[2]
            else:
                item, cat, rank = parts[0], parts[1], parts[3]
            try:
                rank = int(rank)
            except ValueError:
                raise DataError(f"rank {rank!r} is not an integer", path, lineno) from None
            if rank < 1:
                raise DataError(f"rank must be >= 1, got {rank}", path, lineno)
            rows[item].append((rank, cat))
    return {item: [cat for _, cat in sorted(r)] for item, r in rows.items()}


def evaluate_rankings(rankings, judg, ks, count_somewhat=False):
    ks = sorted(set(ks))
    if not ks or ks[0] < 1:
        raise ValueError("ks must be non-empty and every k >= 1")
    items = sorted(rankings)
    per_item = {}
    sums = dict.fromkeys(ks, 0.0)
    for item in items:
        ranked = rankings[item]
        per_item[item] = [judg.is_hit(item, c, count_somewhat) for c in ranked[: ks[-1]]]
        for k in ks:
            sums[k] += precision_at_k(ranked, judg, item, k, count_somewhat)
    unjudged = [item for item in items if not judg.has_item(item)]
    if not items:
        log.warning("no items to evaluate")
    if unjudged:
        log.warning("%d of %d items have no annotations", len(unjudged), len(items))
    precision = {k: (sums[k] / len(items) if items else 0.0) for k in ks}
    return EvalReport(precision, per_item, len(items), unjudged)


def evaluate_run(results_file, annotations_file, ks, count_somewhat=False, fmt="classification"):
    return evaluate_rankings(read_results(results_file, fmt), load_annotations(annotations_file), ks, count_somewhat)


def format_report(report):
    """One ``Precision@k`` row per k, then machine-readable ``key=value`` lines."""
    ks = sorted(report.precision_at)
    lines = [f"{'metric':<14}value"]
    lines += [f"{f'Precision@{k}':<14}{report.precision_at[k]:.3f}" for k in ks]
    lines.append("")
    lines += [f"precision@{k}={report.precision_at[k]!r}" for k in ks]
    lines.append(f"n_items={report.n_items}")
    lines.append(f"n_unjudged={len(report.unjudged)}")
    lines.append(f"unjudged_fraction={report.unjudged_fraction!r}")
    if report.n_items == 0:
        lines.append("warning=no items in results")
    return "\n".join(lines) + "\n"
