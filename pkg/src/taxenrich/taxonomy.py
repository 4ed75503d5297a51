"""Category tree with pre-classified documents.

Categories are identified by slash-delimited paths (``/Top/Shopping``) and by
dense integer ids assigned in file order, so a parent id is always smaller
than the ids of its children.
"""

import logging
from dataclasses import dataclass, field

from taxenrich.errors import DataError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Category:
    id: int
    path: str
    parent: int | None
    children: tuple[int, ...]
    depth: int

    @property
    def label(self):
        return self.path.rsplit("/", 1)[-1]


@dataclass(frozen=True)
class Document:
    id: str
    category: int
    text: str


@dataclass
class Taxonomy:
    categories: list[Category]
    docs_by_category: dict[int, list[Document]]
    by_path: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.by_path = {c.path: c.id for c in self.categories}
        validate(self)

    def __len__(self):
        return len(self.categories)

    def __getitem__(self, cid):
        return self.categories[cid]

    @property
    def root(self):
        return self.categories[0]

    def id_of(self, path):
        try:
            return self.by_path[path]
        except KeyError:
            raise KeyError(f"unknown category path {path!r}") from None

    def path_of(self, cid):
        return self.categories[cid].path

    def n_documents(self):
        return sum(len(docs) for docs in self.docs_by_category.values())

    def documents(self):
        for c in self.categories:
            yield from self.docs_by_category[c.id]

    def is_leaf(self, cid):
        return not self.categories[cid].children

    def bottom_up(self):
        """Ids ordered so that every child precedes its parent."""
        return [c.id for c in reversed(self.categories)]

    def descendants(self, cid):
        return descendants(self, cid)


def validate(tax):
    """Check the tree invariants of ``tax``; raise :class:`DataError` on the first violation."""
    cats = tax.categories
    if not cats:
        raise DataError("taxonomy has no categories")
    for i, c in enumerate(cats):
        if c.id != i:
            raise DataError(f"category ids must be dense and ordered, got {c.id} at {i}")
    roots = [c.id for c in cats if c.parent is None]
    if roots != [0]:
        raise DataError(f"taxonomy must have exactly one root at id 0, found {roots}")
    if cats[0].depth != 0:
        raise DataError("root depth must be 0")
    for c in cats[1:]:
        if not 0 <= c.parent < len(cats):
            raise DataError(f"category {c.path!r} has unknown parent {c.parent}")
        parent = cats[c.parent]
        if c.id not in parent.children:
            raise DataError(f"children of {parent.path!r} do not list {c.path!r}")
        if c.depth != parent.depth + 1:
            raise DataError(f"depth of {c.path!r} is inconsistent with its parent")
        if c.path.rsplit("/", 1)[0] != parent.path:
            raise DataError(f"path {c.path!r} does not extend {parent.path!r}")
    for c in cats:
        for ch in c.children:
            if cats[ch].parent != c.id:
                raise DataError(f"{cats[ch].path!r} is listed as a child of {c.path!r}")
    # every node must reach the root; a parent cycle never does
    for c in cats:
        seen = set()
        node = c
        while node.parent is not None:
            if node.id in seen:
                raise DataError(f"cycle detected through {c.path!r}")
            seen.add(node.id)
            node = cats[node.parent]
    if set(tax.docs_by_category) != {c.id for c in cats}:
        raise DataError("docs_by_category must have one entry per category")
    for cid, docs in tax.docs_by_category.items():
        ids = set()
        for d in docs:
            if d.category != cid:
                raise DataError(f"document {d.id!r} filed under the wrong category")
            if d.id in ids:
                raise DataError(f"duplicate document id {d.id!r} in {cats[cid].path!r}")
            ids.add(d.id)


def _check_path(path):
    if not path.startswith("/") or path.endswith("/") or "//" in path:
        return False
    return all(seg.strip() == seg and seg for seg in path[1:].split("/"))


def build_taxonomy(paths, documents=()):
    """Build a taxonomy from parent-first ``paths`` and ``(doc_id, path, text)`` rows."""
    cats = []
    by_path = {}
    children = []
    for path in paths:
        if path in by_path:
            raise DataError(f"duplicate category {path!r}")
        if not cats and path.count("/") == 1:
            parent, depth = None, 0
        else:
            parent_path = path.rsplit("/", 1)[0]
            if parent_path not in by_path:
                raise DataError(f"orphan category {path!r}: parent {parent_path or '/'!r} not defined")
            parent = by_path[parent_path]
            depth = cats[parent][3] + 1
            children[parent].append(len(cats))
        by_path[path] = len(cats)
        cats.append((len(cats), path, parent, depth))
        children.append([])
    categories = [Category(i, p, par, tuple(children[i]), d) for i, p, par, d in cats]
    docs = {c.id: [] for c in categories}
    for doc_id, path, text in documents:
        if path not in by_path:
            raise DataError(f"document {doc_id!r} references unknown category {path!r}")
        cid = by_path[path]
        docs[cid].append(Document(doc_id, cid, text))
    return Taxonomy(categories, docs)


def unescape_text(s):
    return s.replace("\\\\", "\0").replace("\\n", "\n").replace("\\t", "\t").replace("\0", "\\")


def escape_text(s):
    return s.replace("\\", "\\\\").replace("\n", "\\n").replace("\t", "\\t")


def read_category_file(path):
    paths = []
    known = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            if "\t" in line or not _check_path(line):
                raise DataError(f"malformed category path {line!r}", path, lineno)
            if paths and line.count("/") == 1:
                raise DataError(f"second root {line!r}; a taxonomy has one root", path, lineno)
            if line in known:
                raise DataError(f"duplicate category {line!r}", path, lineno)
            if line.count("/") > 1 and line.rsplit("/", 1)[0] not in known:
                raise DataError(f"orphan category {line!r}: parent must precede it", path, lineno)
            known.add(line)
            paths.append(line)
    return paths


def read_document_file(path):
    rows = []
    skipped = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3 or not parts[0] or not parts[1]:
                raise DataError("expected doc_id<TAB>category_path<TAB>text", path, lineno)
            text = unescape_text(parts[2])
            if not text.strip():
                skipped += 1
                continue
            rows.append((parts[0], parts[1], text, lineno))
    if skipped:
        log.warning("%s: skipped %d document(s) with blank text", path, skipped)
    return rows


def load_taxonomy(category_file, document_file):
    paths = read_category_file(category_file)
    if not paths:
        raise DataError("no categories", category_file)
    known = set(paths)
    rows = read_document_file(document_file)
    seen = set()
    for doc_id, cat, _text, lineno in rows:
        if cat not in known:
            raise DataError(f"document {doc_id!r} references unknown category {cat!r}", document_file, lineno)
        if (doc_id, cat) in seen:
            raise DataError(f"duplicate document id {doc_id!r} in {cat!r}", document_file, lineno)
        seen.add((doc_id, cat))
    return build_taxonomy(paths, [(d, c, t) for d, c, t, _ in rows])


def descendants(tax, cid):
    """Strict descendants of ``cid`` in pre-order."""
    if not 0 <= cid < len(tax.categories):
        raise KeyError(f"unknown category id {cid}")
    out = []
    stack = list(reversed(tax.categories[cid].children))
    while stack:
        node = stack.pop()
        out.append(node)
        stack.extend(reversed(tax.categories[node].children))
    return out


def subtree_doc_counts(tax):
    counts = [len(tax.docs_by_category[c.id]) for c in tax.categories]
    for cid in tax.bottom_up():
        parent = tax.categories[cid].parent
        if parent is not None:
            counts[parent] += counts[cid]
    return counts


def _restrict(tax, keep):
    paths = [c.path for c in tax.categories if c.id in keep]
    docs = [
        (d.id, tax.categories[d.category].path, d.text)
        for c in tax.categories if c.id in keep
        for d in tax.docs_by_category[c.id]
    ]
    return build_taxonomy(paths, docs)


def filter_taxonomy(tax, max_depth, min_docs_subtree):
    """Prune categories deeper than ``max_depth`` or whose subtree holds fewer
    than ``min_docs_subtree`` documents. Documents of pruned categories are
    dropped, and pruning repeats until nothing changes so that the result is
    a fixed point of this function.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    if min_docs_subtree < 0:
        raise ValueError("min_docs_subtree must be >= 0")
    keep = {c.id for c in tax.categories if c.depth <= max_depth}
    current = _restrict(tax, keep) if len(keep) < len(tax) else tax
    while True:
        counts = subtree_doc_counts(current)
        if counts[0] < min_docs_subtree:
            raise DataError(
                f"filter would prune the root: {counts[0]} document(s) < min_docs_subtree={min_docs_subtree}"
            )
        keep = {c.id for c in current.categories if counts[c.id] >= min_docs_subtree}
        if len(keep) == len(current):
            return current
        current = _restrict(current, keep)
