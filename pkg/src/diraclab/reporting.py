"""Deterministic result persistence: CSV, JSON, digest-keyed cache.

Floats are serialized with repr (shortest round-trip form) and dict keys are
sorted, so identical inputs produce byte-identical files; reruns and cache
hits are comparable with cmp/diff.
"""
from __future__ import annotations

import json
import os


def _scrub(obj):
    """Make an object JSON-clean: numpy scalars to Python, complex to [re, im]."""
    if isinstance(obj, dict):
        return {str(k): _scrub(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_scrub(v) for v in obj]
    if isinstance(obj, complex):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, bool):
        return obj
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _scrub(obj.item())
    if isinstance(obj, float):
        return float(obj)
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_scrub(obj), sort_keys=True, indent=1)


def write_json(path: str, obj) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(canonical_json(obj))
        fh.write("\n")
    os.replace(tmp, path)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, complex):
        sign = "+" if v.imag >= 0 else "-"
        return f"{v.real!r}{sign}{abs(v.imag)!r}j"
    if isinstance(v, float):
        return repr(v)
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        return _cell(v.item())
    s = str(v)
    if any(ch in s for ch in ",\"\n"):
        s = '"' + s.replace('"', '""') + '"'
    return s


def write_csv(path: str, header, rows) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")
    os.replace(tmp, path)


class ResultCache:
    """Digest-keyed JSON payload store under <root>/.cache."""

    def __init__(self, root: str, enabled: bool = True):
        self.dir = os.path.join(root, ".cache")
        self.enabled = enabled

    def _path(self, key: str) -> str:
        return os.path.join(self.dir, key + ".json")

    def get(self, key: str):
        if not self.enabled:
            return None
        try:
            with open(self._path(key)) as fh:
                return json.load(fh)
        except (FileNotFoundError, json.JSONDecodeError):
            return None

    def put(self, key: str, payload) -> None:
        if not self.enabled:
            return
        os.makedirs(self.dir, exist_ok=True)
        write_json(self._path(key), payload)
