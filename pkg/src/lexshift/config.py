"""Flat key=value configuration files and the run configuration."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from pathlib import Path


def parse_flat_config(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment, blanks ignored."""
    out: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ValueError(f"{path}:{line_no}: empty key")
        if key in out:
            raise ValueError(f"{path}:{line_no}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def _parse_bool(value: str) -> bool:
    v = value.lower()
    if v in ("true", "yes", "1"):
        return True
    if v in ("false", "no", "0"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


@dataclass
class RunConfig:
    """Toolkit-wide settings shared by the CLI commands.

    Window defaults mirror a four-year pre period and an eighteen-month
    post period around the default event date of 2022-11-30.
    """

    corpus: Path | None = None
    contrastive_dir: Path | None = None
    embeddings: Path | None = None
    out_dir: Path = Path("out")
    window_start: date = date(2018, 12, 1)
    window_end: date = date(2024, 5, 31)
    event_date: date = date(2022, 11, 30)
    strategy: str = "untreated"
    pool_size: int = 100
    coef_prior_scale: float = 10.0
    sigma_prior_scale: float = 1.0
    chains: int = 4
    draws_per_chain: int = 1000
    did_mode: str = "hinge"
    seed: int = 20221130
    min_token_length: int = 3
    alphabetic_only: bool = True
    stemming: bool = True
    stopword_file: Path | None = None
    score_threshold: float = 0.001
    score_samples: int = 1000
    top_k: int = 20

    def __post_init__(self) -> None:
        if not (self.window_start < self.event_date < self.window_end):
            raise ValueError("need window_start < event_date < window_end")
        if self.strategy not in ("untreated", "synonym", "random"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.did_mode not in ("hinge", "as_printed"):
            raise ValueError(f"unknown did mode {self.did_mode!r}")

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "RunConfig":
        raw = parse_flat_config(path)
        base = Path(path).resolve().parent
        kwargs: dict = {}

        def path_of(v: str) -> Path:
            p = Path(v)
            return p if p.is_absolute() else base / p

        converters = {
            "corpus": path_of,
            "contrastive_dir": path_of,
            "embeddings": path_of,
            "out_dir": path_of,
            "stopword_file": path_of,
            "window_start": date.fromisoformat,
            "window_end": date.fromisoformat,
            "event_date": date.fromisoformat,
            "strategy": str,
            "did_mode": str,
            "pool_size": int,
            "chains": int,
            "draws_per_chain": int,
            "seed": int,
            "min_token_length": int,
            "score_samples": int,
            "top_k": int,
            "coef_prior_scale": float,
            "sigma_prior_scale": float,
            "score_threshold": float,
            "alphabetic_only": _parse_bool,
            "stemming": _parse_bool,
        }
        for key, value in raw.items():
            if key not in converters:
                raise ValueError(f"unknown config key {key!r}")
            kwargs[key] = converters[key](value)
        for key, value in overrides.items():
            if value is not None:
                kwargs[key] = value
        return cls(**kwargs)

    def require(self, *names: str) -> None:
        """Check required input paths exist before any computation starts."""
        for name in names:
            value = getattr(self, name)
            if value is None:
                raise FileNotFoundError(f"config key {name!r} is required for this command")
            if not Path(value).exists():
                raise FileNotFoundError(f"{name} path does not exist: {value}")
