"""Flat ``key = value`` config files and the shipped presets."""

from __future__ import annotations

import os
from dataclasses import fields
from importlib import resources
from pathlib import Path

from .model import ModelVariant
from .train import TrainConfig

DATA_ENV = "HYPERKGE_DATA"

#: Public benchmark sizes (entities, relations, train, valid, test).
BENCHMARKS = {
    "wn18": (40943, 18, 141442, 5000, 5000),
    "wn18rr": (40943, 11, 86835, 3034, 3134),
    "fb15k": (14951, 1345, 483142, 50000, 59071),
    "fb15k237": (14541, 237, 272115, 17535, 20466),
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(name, typ, raw: str):
    if typ in (bool, "bool"):
        low = raw.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    if typ in (int, "int"):
        return int(raw)
    if typ in (float, "float"):
        return float(raw)
    if typ in (ModelVariant, "ModelVariant"):
        return ModelVariant(raw)
    return raw


_TYPES = {f.name: f.type for f in fields(TrainConfig)}


def parse_config(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines (``#`` starts a comment) into typed values."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ValueError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _coerce(key, _TYPES[key], value)
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: {exc}") from None
    return out


def read_config(path) -> dict:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), str(path))


def format_config(config: TrainConfig) -> str:
    return "\n".join(f"{key} = {value}" for key, value in config.to_dict().items())


def list_presets() -> list[str]:
    root = resources.files("hyperkge") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".conf"))


def load_preset(name: str) -> dict:
    path = resources.files("hyperkge") / "presets" / f"{name}.conf"
    if not path.is_file():
        raise ValueError(f"unknown preset {name!r}; available: {', '.join(list_presets())}")
    return parse_config(path.read_text(encoding="utf-8"), f"preset {name}")


def resolve_data_dir(name) -> Path:
    """An existing directory as given, else ``$HYPERKGE_DATA/<name>``."""
    path = Path(name)
    if path.is_dir():
        return path
    root = os.environ.get(DATA_ENV)
    if root and (Path(root) / name).is_dir():
        return Path(root) / name
    return path
