"""Simulation configuration and its JSON file form."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field, fields, replace
from fractions import Fraction
from pathlib import Path

from edgeagg.dpcore import PrivacyParams
from edgeagg.secsum.config import PRESET_DEGREES, PRESET_NAMES, RoundConfig, round_id_from

DEFAULT_VALUE_BOUND = 1 << 40
DEFAULT_LABELS = (
    "home", "office", "street", "public_transport", "shop",
    "restaurant", "park", "gym", "school", "hospital",
)


@dataclass(frozen=True)
class DropoutConfig:
    theta_sim: float = 0.0

    def __post_init__(self):
        if not 0 <= self.theta_sim < 1:
            raise ValueError("theta_sim must lie in [0, 1)")


@dataclass(frozen=True)
class SimConfig:
    n: int = 100
    k: int | None = None
    privacy: PrivacyParams = field(default_factory=lambda: PrivacyParams(epsilon=1.0, theta=0.0, cap_c=5, cap_b=20))
    num_labels: int = 10
    dropout: DropoutConfig = field(default_factory=DropoutConfig)
    transport: str = "in_process"
    seed: int = 0
    output_dir: str | None = None
    t: int | None = None
    value_bound: int = DEFAULT_VALUE_BOUND
    recordings_per_client: int = 12
    bt_mean: float = 8.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one client")
        if self.num_labels < 1:
            raise ValueError("need at least one label")
        if self.transport not in ("in_process", "loopback_tcp"):
            raise ValueError(f"unknown transport {self.transport!r}")

    @property
    def degree(self) -> int:
        if self.k is not None:
            return self.k
        if self.n == 1:
            return 0
        if self.n in PRESET_DEGREES:
            return PRESET_DEGREES[self.n]
        # below the presets every client can afford a dense neighbourhood
        return min(self.n - 1, 20)

    def round_config(self, vec_len: int | None = None, label: str = "simulate") -> RoundConfig:
        rc = RoundConfig(
            n=self.n,
            k=self.degree,
            vec_len=vec_len or self.num_labels + 1,
            round_id=round_id_from(f"{label}/{self.seed}"),
            t=self.t,
            theta=self.privacy.theta,
        )
        if self.dropout.theta_sim > float(rc.delta):
            warnings.warn(
                f"theta_sim={self.dropout.theta_sim} exceeds the tolerated dropout fraction {float(rc.delta):.3f}",
                stacklevel=2,
            )
        return rc

    def label_names(self) -> list[str]:
        if self.num_labels <= len(DEFAULT_LABELS):
            return list(DEFAULT_LABELS[: self.num_labels])
        return [f"label_{i}" for i in range(self.num_labels)]


def preset_n(name: str) -> int:
    try:
        return PRESET_NAMES[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESET_NAMES)}") from None


def _privacy_to_dict(p: PrivacyParams) -> dict:
    d = asdict(p)
    d["epsilon"] = None if math.isinf(p.epsilon) else p.epsilon
    d["theta"] = float(p.theta)
    return d


def sim_config_to_dict(cfg: SimConfig) -> dict:
    d = asdict(cfg)
    d["privacy"] = _privacy_to_dict(cfg.privacy)
    return d


def sim_config_from_dict(raw: dict) -> SimConfig:
    raw = dict(raw)
    if "preset" in raw:
        raw["n"] = preset_n(raw.pop("preset"))
    privacy = dict(raw.pop("privacy", {}))
    if "epsilon" in privacy and privacy["epsilon"] is None:
        privacy["epsilon"] = math.inf
    dropout = raw.pop("dropout", {})
    known = {f.name for f in fields(SimConfig)}
    extra = set(raw) - known
    if extra:
        raise ValueError(f"unknown config keys: {sorted(extra)}")
    base = SimConfig()
    return replace(
        base,
        **raw,
        privacy=replace(base.privacy, **privacy),
        dropout=DropoutConfig(**dropout) if isinstance(dropout, dict) else dropout,
    )


def load_sim_config(path: str | Path) -> SimConfig:
    with open(path) as fh:
        return sim_config_from_dict(json.load(fh))


def fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"
