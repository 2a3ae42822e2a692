"""Analysis configuration: every tunable knob in one serializable snapshot.

A config plus a trace fully determines every artifact the pipeline emits,
so the config participates in artifact cache keys and session identity.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass


@dataclass(frozen=True)
class AnalysisConfig:
    # latency criteria
    bucket_width: int = 50                  # bytes per message-size bucket
    max_samples_per_bucket: int = 10_000
    sampling_seed: int = 9                  # reservoir-sampling RNG seed

    # correlation clustering
    beta: float = 1.0                       # killed-walk tempering exponent
    max_depth: int = 4                      # correlation-tree expansion cap
    cluster_threshold: float = 2.0          # stop linkage for agglomeration

    # temporal abstraction
    series_bucket_us: int | None = None     # None: span/200, floored at 1 ms
    window: int = 5                         # sliding window, in buckets
    slope_min: float | None = None          # None: 0.05 * Ave_region per bucket
    cv_max: float = 0.15
    steady_margin: float = 0.05             # steady needs mean >= (1+margin)*Ave

    # attribution
    inter_ratio_flag: float = 0.5           # inter-node share considered poor
    pattern_peak_threshold: float = 0.5     # relative-imbalance peak level
    pattern_ceiling: float = 1.0            # imbalance value mapped to score 1.0
    traffic_cv_ceiling: float = 1.0         # traffic CV value mapped to score 1.0
    attribution_durations: int = 6          # fallback equal split of a window
    remap_restarts: int = 6
    remap_seed: int = 17

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]
