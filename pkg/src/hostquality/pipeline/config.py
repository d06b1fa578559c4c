"""Run configuration: a flat ``key = value`` file whose keys mirror CLI flags."""

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from ..errors import ConfigError
from .fusion import FusionSpec

PATH_KEYS = (
    "labels", "edges", "termfreq", "docfreq", "domainpr",
    "link_features", "content_features", "train", "test", "qrels",
)


@dataclass(frozen=True)
class RunConfig:
    labels: str = ""
    train: str = ""
    test: str = ""
    edges: str = ""
    domainpr: str = ""
    termfreq: str = ""
    docfreq: str = ""
    link_features: str = ""
    content_features: str = ""
    qrels: str = ""
    out_dir: str = "out"
    fusion: str = "LHCT"
    task: str = "quality"
    seed: int = None
    n_trees: int = 90
    min_leaf: int = 2
    k: int = 500
    W: int = 1
    alpha: float = 0.85
    tol: float = 1e-9
    max_iters: int = 200
    supporters: str = "estimate"
    sketch_bits: int = 32
    sketch_reps: int = 64
    gain: str = "exp"
    cutoff: int = 0

    @property
    def fusion_spec(self):
        return FusionSpec.parse(self.fusion)

    @property
    def facet(self):
        """Facet name for ``facet:<name>`` tasks, else None."""
        return self.task.split(":", 1)[1] if self.task.startswith("facet:") else None

    def validate(self):
        if self.seed is None:
            raise ConfigError("seed is required")
        if self.task != "quality" and not self.facet:
            raise ConfigError(f"task must be 'quality' or 'facet:<name>', got {self.task!r}")
        spec = self.fusion_spec
        required = ["labels", "train", "test"]
        if "H" in spec:
            required.append("edges")
        if "T" in spec:
            required.append("termfreq")
        if "L" in spec:
            required.append("link_features")
        if "C" in spec:
            required.append("content_features")
        for key in required:
            if not getattr(self, key):
                raise ConfigError(f"missing required setting {key!r} for fusion {spec.name}")
        for key in PATH_KEYS:
            path = getattr(self, key)
            if path and not Path(path).is_file():
                raise ConfigError(f"{key}: file not found: {path}")
        if self.supporters not in ("exact", "estimate"):
            raise ConfigError("supporters must be 'exact' or 'estimate'")
        if self.gain not in ("exp", "linear"):
            raise ConfigError("gain must be 'exp' or 'linear'")
        if self.cutoff < 0:
            raise ConfigError("cutoff must be >= 0 (0 = no cutoff)")
        return self

    def echo(self):
        """``key=value`` lines for the run report (``out_dir`` omitted so reports are relocatable)."""
        return [f"{f.name}={getattr(self, f.name)}" for f in dataclasses.fields(self) if f.name != "out_dir"]


_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def coerce(key, value):
    kind = _TYPES.get(key)
    if kind is None:
        raise ConfigError(f"unknown config key {key!r}")
    if value is None:
        return None
    if kind in ("int", int):
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {value!r}") from None
    if kind in ("float", float):
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {value!r}") from None
    return str(value)


def read_key_values(path, path_keys=PATH_KEYS + ("out_dir",)):
    """Raw ``key = value`` pairs; values of ``path_keys`` resolve against the file's directory."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in path_keys and value and not Path(value).is_absolute():
            value = str(path.parent / value)
        out[key] = value
    return out


def read_config_file(path):
    return {key: coerce(key, value) for key, value in read_key_values(path).items()}


def make_config(file_values=None, overrides=None):
    """Defaults, then config-file values, then non-None overrides."""
    values = {key: coerce(key, value) for key, value in (file_values or {}).items()}
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = coerce(key, value)
    return RunConfig(**values)


def write_config(fh, values):
    for key, value in values.items():
        fh.write(f"{key} = {value}\n")
