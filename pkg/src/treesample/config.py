"""JSON tree-configuration documents.

A document is a mapping with a ``type`` of ``innovations``, ``covariance``
or ``wig``; the remaining fields are validated strictly (unknown fields are
rejected) by the corresponding builder.  Parsed models keep a normalized
copy of their configuration, so parse -> serialize -> parse reproduces an
identical model.
"""

from __future__ import annotations

import copy
import json

from .errors import ConfigError
from .trees import (build_covariance_tree, build_innovations_tree,
                    build_wig_covariance_tree)

_WIG_KEYS = {"type", "depth", "H", "amplitude"}


def parse_tree_config(doc: dict):
    """Build a tree model from a configuration mapping."""
    if not isinstance(doc, dict):
        raise ConfigError(f"tree configuration must be a mapping, got {doc!r}")
    kind = doc.get("type")
    if kind == "innovations":
        return build_innovations_tree(doc)
    if kind == "covariance":
        return build_covariance_tree(doc)
    if kind == "wig":
        unknown = set(doc) - _WIG_KEYS
        if unknown:
            raise ConfigError(f"unknown field(s) {sorted(unknown)} in wig config")
        missing = _WIG_KEYS - set(doc)
        if missing:
            raise ConfigError(f"missing field(s) {sorted(missing)} in wig config")
        return build_wig_covariance_tree(doc["depth"], 2, doc["H"], doc["amplitude"])
    raise ConfigError(
        f"type must be one of 'innovations', 'covariance', 'wig', got {kind!r}")


def serialize_tree_config(model) -> dict:
    """Normalized configuration document reproducing the model when parsed."""
    if getattr(model, "config", None) is None:
        raise ConfigError("this model does not carry a configuration document")
    return copy.deepcopy(model.config)


def load_tree_config(path):
    """Read and parse a JSON tree configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read tree configuration {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return parse_tree_config(doc)
