"""Pipeline configuration read from ``key = value`` files."""

import dataclasses
import os
from dataclasses import dataclass, fields

from taxenrich.concept_kb import SIMILARITY_MODES


class ConfigError(ValueError):
    pass


PATH_KEYS = ("taxonomy", "documents", "kb_pairs", "similarity", "annotations")


@dataclass
class PipelineConfig:
    taxonomy: str | None = None
    documents: str | None = None
    kb_pairs: str | None = None
    similarity: str | None = None
    annotations: str | None = None
    alpha: float = 0.7
    beta: float = 0.004
    tau: float = 0.8
    k: int = 5
    alpha_centroid: float = 0.7
    ancestor_alpha: float = 0.0
    max_len: int = 4
    min_docs_subtree: int = 0
    max_depth: int = 64
    similarity_mode: str = "exact-match"
    temperature: float = 1.0
    lexicon_min_total: int = 1
    count_somewhat: bool = False

    def validate(self, require_inputs=False):
        for name in ("alpha", "tau", "alpha_centroid"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {getattr(self, name)}")
        if self.beta < 0:
            raise ConfigError("beta must be >= 0")
        if self.ancestor_alpha < 0:
            raise ConfigError("ancestor_alpha must be >= 0")
        if self.temperature <= 0:
            raise ConfigError("temperature must be positive")
        for name in ("k", "max_len", "max_depth", "lexicon_min_total"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.min_docs_subtree < 0:
            raise ConfigError("min_docs_subtree must be >= 0")
        if self.similarity_mode not in SIMILARITY_MODES:
            raise ConfigError(f"similarity_mode must be one of {', '.join(SIMILARITY_MODES)}")
        if self.similarity_mode == "table" and not self.similarity:
            raise ConfigError("similarity_mode=table needs a similarity file")
        if require_inputs:
            for name in ("taxonomy", "documents", "kb_pairs"):
                if not getattr(self, name):
                    raise ConfigError(f"missing required setting {name!r}")
        return self

    def parameters(self):
        """Non-path settings, as recorded in a model manifest."""
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name not in PATH_KEYS}


_FIELDS = {f.name: f for f in fields(PipelineConfig)}


def _convert(key, raw):
    if key not in _FIELDS:
        raise ConfigError(f"unknown setting {key!r}")
    kind = _FIELDS[key].type
    try:
        if kind == "bool" or kind is bool:
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if kind == "int" or kind is int:
            return int(raw)
        if kind == "float" or kind is float:
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return raw.strip() or None


def parse_config(text, base_dir="."):
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        values[key] = _convert(key, raw)
    for key in PATH_KEYS:
        if values.get(key) and not os.path.isabs(values[key]):
            values[key] = os.path.normpath(os.path.join(base_dir, values[key]))
    return PipelineConfig(**values)


def load_config(path=None, overrides=None):
    """Read ``path`` (optional) and apply ``overrides``, a mapping of raw string values."""
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            cfg = parse_config(fh.read(), os.path.dirname(os.path.abspath(path)))
    else:
        cfg = PipelineConfig()
    changes = {k: _convert(k, v) if isinstance(v, str) else v for k, v in (overrides or {}).items()}
    return dataclasses.replace(cfg, **changes)
