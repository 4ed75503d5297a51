"""Centroid classifier over taxonomy categories with entity evidence.

Each category gets a tf-idf centroid of its documents, merged with its
descendants the same way concept vectors are. At query time the cosine
against each centroid is blended with the attachment probabilities of the
KB entities found in the text:

    final(t) = (1 - tau) * term_score(t) + tau * entity_score(t)
"""

import hashlib
import json
import logging
import math
import os
from collections import Counter
from dataclasses import dataclass, field

from taxenrich.concept_vectors import make_vector, merge_down
from taxenrich.enrichment import format_probability, rank_categories, read_attachments
from taxenrich.errors import DataError
from taxenrich.taxonomy import build_taxonomy
from taxenrich.text import STOPWORDS_VERSION, Lexicon, content_terms, tokenize

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
DEFAULT_TAU = 0.8
DEFAULT_ALPHA_CENTROID = 0.7


class ModelError(DataError):
    """Model directory is missing, incomplete or fails its checksums."""


@dataclass
class Classification:
    ranked: list[tuple[int, float]]
    detected_entities: list[tuple[str, tuple[int, int]]] = field(default_factory=list)


@dataclass
class ClassifierModel:
    tax: object
    centroids: dict[int, dict[str, float]]
    idf: dict[str, float]
    entity_index: dict[str, list[tuple[int, float]]]
    lexicon: Lexicon
    alpha_centroid: float = DEFAULT_ALPHA_CENTROID
    tau: float = DEFAULT_TAU
    k: int = 5

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must lie in [0, 1]")
        if self.k < 1:
            raise ValueError("k must be >= 1")

    @property
    def empty_categories(self):
        return [cid for cid in range(len(self.tax)) if not self.centroids.get(cid)]


def l2_normalize(vec):
    norm = math.sqrt(math.fsum(w * w for w in vec.values()))
    if norm == 0.0:
        return {}
    return {t: w / norm for t, w in vec.items()}


def document_idf(tax):
    """``ln(N / df)`` per term over every document in ``tax``."""
    df = Counter()
    n = 0
    for doc in tax.documents():
        df.update(set(content_terms(doc.text)))
        n += 1
    return {t: math.log(n / d) for t, d in sorted(df.items())}


def tfidf_vector(text, idf):
    tf = Counter(t for t in content_terms(text) if t in idf)
    return l2_normalize(make_vector({t: n * idf[t] for t, n in tf.items()}))


def build_centroids(tax, alpha_centroid=DEFAULT_ALPHA_CENTROID, idf=None, ancestor_alpha=0.0):
    """Per-category centroid of unit tf-idf document vectors, merged bottom-up
    with descendants and L2-normalized.

    ``ancestor_alpha > 0`` adds a top-down pass ``child += ancestor_alpha * parent``
    before normalization.
    """
    if len(tax) == 0:
        raise ValueError("taxonomy is empty")
    if idf is None:
        idf = document_idf(tax)
    raw = {}
    for cat in tax.categories:
        docs = tax.docs_by_category[cat.id]
        acc = Counter()
        for doc in docs:
            for t, w in tfidf_vector(doc.text, idf).items():
                acc[t] += w
        raw[cat.id] = {t: w / len(docs) for t, w in acc.items()} if docs else {}
    merged = merge_down(raw, tax, alpha_centroid)
    if ancestor_alpha:
        for cat in tax.categories:
            if cat.parent is not None:
                acc = Counter(merged[cat.id])
                for t, w in merged[cat.parent].items():
                    acc[t] += ancestor_alpha * w
                merged[cat.id] = make_vector(acc)
    centroids = {cid: l2_normalize(v) for cid, v in merged.items()}
    empty = [tax.path_of(cid) for cid, v in centroids.items() if not v]
    if empty:
        log.warning("%d categories have an empty centroid: %s", len(empty), ", ".join(empty[:5]))
    return centroids


def entity_lexicon_for(entity_index, kb_lexicon=None):
    """Detectable entities: those that were attached, optionally restricted to a KB lexicon."""
    names = [e for e in sorted(entity_index) if kb_lexicon is None or e in kb_lexicon]
    return Lexicon(names)


def build_model(tax, enriched, kb_lexicon=None, alpha_centroid=DEFAULT_ALPHA_CENTROID, tau=DEFAULT_TAU, k=5,
                ancestor_alpha=0.0):
    idf = document_idf(tax)
    centroids = build_centroids(tax, alpha_centroid, idf, ancestor_alpha)
    entity_index = {e: list(a.ranked) for e, a in sorted(enriched.attachments_by_entity.items())}
    lexicon = entity_lexicon_for(entity_index, kb_lexicon)
    return ClassifierModel(tax, centroids, idf, entity_index, lexicon, alpha_centroid, tau, k)


def cosine_unit(q, centroid):
    if not q or not centroid:
        return 0.0
    if len(q) > len(centroid):
        q, centroid = centroid, q
    dot = sum(w * centroid[t] for t, w in q.items() if t in centroid)
    return min(1.0, max(0.0, dot))


def score_components(model, text):
    """Per-category term scores, entity scores and the detected entities of ``text``."""
    n = len(model.tax)
    q = tfidf_vector(text, model.idf)
    term = [cosine_unit(q, model.centroids.get(cid, {})) for cid in range(n)]
    detected = [(e, (s, t)) for e, s, t in model.lexicon.scan(tokenize(text))]
    entity = [0.0] * n
    if detected:
        for e, _ in detected:
            for cid, p in model.entity_index.get(e, ()):
                entity[cid] += p
        entity = [min(1.0, s / len(detected)) for s in entity]
    return term, entity, detected


def combine(term, entity, tau):
    return [(1.0 - tau) * a + tau * b for a, b in zip(term, entity)]


def score(model, text, tau=None, k=None):
    tau = model.tau if tau is None else tau
    k = model.k if k is None else k
    term, entity, detected = score_components(model, text)
    final = combine(term, entity, tau)
    return Classification([(cid, final[cid]) for cid in rank_categories(final, k)], detected)


def classify_file(model, input_file, k=None, tau=None):
    """Yield ``(line_number, Classification)`` for each line of ``input_file``."""
    with open(input_file, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            yield lineno, score(model, line.rstrip("\r\n"), tau, k)


def format_classification(lineno, result, tax):
    return "".join(
        f"{lineno}\t{rank}\t{tax.path_of(cid)}\t{s:.12g}\n" for rank, (cid, s) in enumerate(result.ranked, 1)
    )


# -- persistence --------------------------------------------------------------

MODEL_FILES = ("categories.txt", "centroids.tsv", "idf.tsv", "attachments.tsv", "lexicon.txt")


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_lines(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(lines)


def save_model(model, directory, params=None, extra_files=()):
    """Write the model files plus ``manifest.json`` with checksums of every file,
    including ``extra_files`` already present in ``directory``."""
    os.makedirs(directory, exist_ok=True)
    tax = model.tax
    _write_lines(os.path.join(directory, "categories.txt"), (c.path + "\n" for c in tax.categories))
    _write_lines(
        os.path.join(directory, "centroids.tsv"),
        (
            f"{tax.path_of(cid)}\t{t}\t{w!r}\n"
            for cid in range(len(tax))
            for t, w in sorted(model.centroids.get(cid, {}).items(), key=lambda kv: (-kv[1], kv[0]))
        ),
    )
    _write_lines(os.path.join(directory, "idf.tsv"), (f"{t}\t{w!r}\n" for t, w in sorted(model.idf.items())))
    _write_lines(
        os.path.join(directory, "attachments.tsv"),
        (
            f"{e}\t{tax.path_of(cid)}\t{format_probability(p)}\t{rank}\n"
            for e in sorted(model.entity_index)
            for rank, (cid, p) in enumerate(model.entity_index[e], 1)
        ),
    )
    _write_lines(os.path.join(directory, "lexicon.txt"), (e + "\n" for e in model.lexicon))
    manifest = {
        "format_version": FORMAT_VERSION,
        "stopwords": STOPWORDS_VERSION,
        "params": dict(params or {}, alpha_centroid=model.alpha_centroid, tau=model.tau, k=model.k),
        "files": {
            name: sha256_file(os.path.join(directory, name)) for name in sorted(set(MODEL_FILES) | set(extra_files))
        },
    }
    with open(os.path.join(directory, "manifest.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def read_manifest(directory):
    path = os.path.join(directory, "manifest.json")
    try:
        with open(path, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        raise ModelError("model manifest not found", path) from None
    except json.JSONDecodeError as exc:
        raise ModelError(f"corrupt manifest: {exc}", path) from None
    if not isinstance(manifest, dict) or manifest.get("format_version") != FORMAT_VERSION:
        raise ModelError("unsupported or missing format_version", path)
    files = manifest.get("files")
    if not isinstance(files, dict) or not set(MODEL_FILES) <= set(files):
        raise ModelError("manifest does not list the model files", path)
    return manifest


def verify_model(directory):
    manifest = read_manifest(directory)
    for name, digest in sorted(manifest["files"].items()):
        p = os.path.join(directory, name)
        if not os.path.exists(p):
            raise ModelError("file listed in manifest is missing", p)
        if sha256_file(p) != digest:
            raise ModelError("checksum mismatch", p)
    return manifest


def load_model(directory):
    manifest = verify_model(directory)
    params = manifest["params"]

    def rows(name):
        with open(os.path.join(directory, name), encoding="utf-8") as fh:
            return [line.rstrip("\n").split("\t") for line in fh if line.strip()]

    try:
        tax = build_taxonomy([r[0] for r in rows("categories.txt")])
        centroids = {cid: {} for cid in range(len(tax))}
        for path, t, w in rows("centroids.tsv"):
            centroids[tax.id_of(path)][t] = float(w)
        idf = {t: float(w) for t, w in rows("idf.tsv")}
        enriched = read_attachments(os.path.join(directory, "attachments.tsv"), tax)
        lexicon = Lexicon(r[0] for r in rows("lexicon.txt"))
        return ClassifierModel(
            tax, centroids, idf,
            {e: list(a.ranked) for e, a in enriched.attachments_by_entity.items()},
            lexicon, params["alpha_centroid"], params["tau"], params["k"],
        )
    except (KeyError, ValueError) as exc:
        raise ModelError(f"malformed model file: {exc}", directory) from None
