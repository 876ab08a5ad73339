"""Run configuration and deterministic seed fan-out."""

import hashlib
from dataclasses import asdict, dataclass, field, fields, is_dataclass

from gwbowv.embeddings import SgnsConfig
from gwbowv.errors import ToolkitError
from gwbowv.syngen import SynthConfig

FORMAT_VERSION = 1


def derive_seed(master_seed, *names):
    """A 32-bit seed that depends only on the master seed and the component name."""
    key = ":".join([str(int(master_seed)), *map(str, names)]).encode("utf-8")
    return int.from_bytes(hashlib.sha256(key).digest()[:4], "little")


@dataclass
class EnsembleConfig:
    level_one_trees: int = 20
    final_trees: int = 20
    m_out: int = 8000
    none_fraction: float = 0.10
    n_folds: int = 3
    oof: bool = True
    min_samples_leaf: int = 1
    max_depth: int | None = None


@dataclass
class RunConfig:
    seed: int = 0
    workers: int = 1
    title_weight: int = 3
    reject_labels: list[str] = field(default_factory=lambda: ["others", "general", "wrong procurement"])
    stop_words: list[str] = field(default_factory=list)
    min_token_length: int = 1
    sgns: SgnsConfig = field(default_factory=lambda: SgnsConfig(dim=50, min_count=2, batch_size=1024))
    n_clusters: int = 20
    kmeans_max_iters: int = 100
    tfidf_dim: int = 2000
    normalize: bool = False
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    top_k: list[int] = field(default_factory=lambda: [1, 3, 6])
    alpha: float = 0.1
    synth: SynthConfig = field(default_factory=SynthConfig)
    test_fraction: float = 0.25
    format_version: int = FORMAT_VERSION

    def seed_for(self, *names):
        return derive_seed(self.seed, *names)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return _from_dict(cls, data, "config")


def _from_dict(cls, data, where):
    if not isinstance(data, dict):
        raise ToolkitError("bad_config", f"{where} must be an object")
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ToolkitError("bad_config", f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    defaults = cls()
    kwargs = {}
    for name, value in data.items():
        current = getattr(defaults, name)
        if is_dataclass(current):
            kwargs[name] = _from_dict(type(current), value, f"{where}.{name}")
        elif isinstance(current, tuple):
            kwargs[name] = tuple(value)
        else:
            kwargs[name] = value
    return cls(**kwargs)
