"""Flat ``key = value`` run configuration files.

Blank lines and ``#`` comments are ignored.  Recognised keys::

    d_in dim k blocks lambda encoder classes residual   (model)
    lr epochs seed                                      (training)
    manifest out                                        (paths)
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .model import ModelConfig, TrainHyper

_MODEL_KEYS = {
    "d_in": ("d_in", int),
    "dim": ("dim", int),
    "k": ("k", int),
    "blocks": ("blocks", int),
    "lambda": ("lam", float),
    "encoder": ("encoder", str),
    "classes": ("classes", int),
    "residual": ("residual", None),
}
_TRAIN_KEYS = {"lr": float, "epochs": int, "seed": int}
_PATH_KEYS = ("manifest", "out")


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


@dataclass
class RunConfig:
    model: ModelConfig
    hyper: TrainHyper
    manifest: str | None = None
    out: str | None = None

    def to_text(self) -> str:
        m = self.model
        lines = [
            f"d_in = {m.d_in}",
            f"dim = {m.dim}",
            f"k = {m.k}",
            f"blocks = {m.blocks}",
            f"lambda = {m.lam!r}",
            f"encoder = {m.encoder}",
            f"classes = {m.classes}",
            f"residual = {str(m.residual).lower()}",
            f"lr = {self.hyper.lr!r}",
            f"epochs = {self.hyper.epochs}",
            f"seed = {self.hyper.seed}",
        ]
        for key in _PATH_KEYS:
            if getattr(self, key) is not None:
                lines.append(f"{key} = {getattr(self, key)}")
        return "\n".join(lines) + "\n"


def parse_config(text: str) -> RunConfig:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _MODEL_KEYS and key not in _TRAIN_KEYS and key not in _PATH_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value

    if "d_in" not in values:
        raise ConfigError("config must set d_in")
    model_kw = {}
    for key, (attr, conv) in _MODEL_KEYS.items():
        if key in values:
            try:
                model_kw[attr] = _parse_bool(values[key]) if conv is None else conv(values[key])
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {values[key]!r}") from exc
    train_kw = {}
    for key, conv in _TRAIN_KEYS.items():
        if key in values:
            try:
                train_kw[key] = conv(values[key])
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {values[key]!r}") from exc
    model = ModelConfig(**model_kw).validate()
    return RunConfig(model, TrainHyper(**train_kw), values.get("manifest"), values.get("out"))


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())

