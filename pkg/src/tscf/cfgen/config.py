"""Run configuration: loss weights, margin policy, variant switches.

The JSON config schema (all fields optional, defaults below):

    {seed, epochs, batch_size, lr, hidden_size, lambdas: [l1..l5],
     margin: {mode, gamma | candidates}, triplet_n, use_shapelet,
     use_triplet, use_classifier_loss, mask_residuals, variant,
     eps_l0, sparsity_tau, lof: {k, theta}}

``lambdas`` weight, in order: triplet, adversarial, classifier, L0, L1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

__all__ = [
    "ConfigError",
    "MarginConfig",
    "LofConfig",
    "LossWeights",
    "RunConfig",
    "VariantSwitches",
    "resolve_variant",
    "VARIANTS",
]

# The class whose instances get explained; counterfactuals target 1 - this.
QUERIED_LABEL = 1

VARIANTS = ("gan", "countergan", "sparse", "full")


class ConfigError(ValueError):
    """Invalid or unknown configuration content."""


@dataclass(frozen=True)
class LossWeights:
    triplet: float = 1.0
    adversarial: float = 1.0
    classifier: float = 1.0
    l0: float = 1.0
    l1: float = 1.0

    def __post_init__(self) -> None:
        for name in ("triplet", "adversarial", "classifier", "l0", "l1"):
            if getattr(self, name) < 0:
                raise ConfigError(f"lambda for {name} must be >= 0")

    def as_list(self) -> list[float]:
        return [self.triplet, self.adversarial, self.classifier, self.l0, self.l1]

    @classmethod
    def from_list(cls, xs) -> "LossWeights":
        if len(xs) != 5:
            raise ConfigError(f"lambdas must have 5 entries, got {len(xs)}")
        return cls(*[float(x) for x in xs])


@dataclass(frozen=True)
class MarginConfig:
    mode: str = "auto"  # "fixed" uses gamma; "auto" derives the central margin
    gamma: float = 1.0
    candidates: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("fixed", "auto"):
            raise ConfigError(f"margin mode must be 'fixed' or 'auto', got {self.mode!r}")
        if self.gamma < 0:
            raise ConfigError("margin gamma must be >= 0")


@dataclass(frozen=True)
class LofConfig:
    k: int = 5
    theta: float = 1.0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ConfigError("lof.k must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    epochs: int = 100
    batch_size: int = 64
    lr: float = 1e-5
    hidden_size: int = 32
    lambdas: LossWeights = field(default_factory=LossWeights)
    margin: MarginConfig = field(default_factory=MarginConfig)
    triplet_n: int = 4
    use_shapelet: bool = True
    use_triplet: bool = True
    use_classifier_loss: bool = True
    mask_residuals: bool = True
    variant: str = "full"
    eps_l0: float = 0.01
    sparsity_tau: float = 1e-6
    lof: LofConfig = field(default_factory=LofConfig)

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError("epochs must be >= 0 and batch_size >= 1")
        if self.lr <= 0 or self.hidden_size < 1:
            raise ConfigError("lr must be > 0 and hidden_size >= 1")
        if self.triplet_n < 1:
            raise ConfigError("triplet_n must be >= 1")
        if self.eps_l0 <= 0:
            raise ConfigError("eps_l0 must be > 0")
        if self.sparsity_tau < 0:
            raise ConfigError("sparsity_tau must be >= 0")

    _FIELDS = {
        "seed",
        "epochs",
        "batch_size",
        "lr",
        "hidden_size",
        "lambdas",
        "margin",
        "triplet_n",
        "use_shapelet",
        "use_triplet",
        "use_classifier_loss",
        "mask_residuals",
        "variant",
        "eps_l0",
        "sparsity_tau",
        "lof",
    }

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        unknown = set(raw) - cls._FIELDS
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        kwargs: dict = dict(raw)
        if "lambdas" in kwargs:
            kwargs["lambdas"] = LossWeights.from_list(kwargs["lambdas"])
        if "margin" in kwargs:
            m = dict(kwargs["margin"])
            if set(m) - {"mode", "gamma", "candidates"}:
                raise ConfigError(f"unknown margin fields: {sorted(set(m) - {'mode', 'gamma', 'candidates'})}")
            if "candidates" in m and m["candidates"] is not None:
                m["candidates"] = tuple(float(x) for x in m["candidates"])
            kwargs["margin"] = MarginConfig(**m)
        if "lof" in kwargs:
            l = dict(kwargs["lof"])
            if set(l) - {"k", "theta"}:
                raise ConfigError(f"unknown lof fields: {sorted(set(l) - {'k', 'theta'})}")
            kwargs["lof"] = LofConfig(**l)
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "lr": self.lr,
            "hidden_size": self.hidden_size,
            "lambdas": self.lambdas.as_list(),
            "margin": {
                "mode": self.margin.mode,
                "gamma": self.margin.gamma,
                "candidates": list(self.margin.candidates) if self.margin.candidates else None,
            },
            "triplet_n": self.triplet_n,
            "use_shapelet": self.use_shapelet,
            "use_triplet": self.use_triplet,
            "use_classifier_loss": self.use_classifier_loss,
            "mask_residuals": self.mask_residuals,
            "variant": self.variant,
            "eps_l0": self.eps_l0,
            "sparsity_tau": self.sparsity_tau,
            "lof": {"k": self.lof.k, "theta": self.lof.theta},
        }

    def with_overrides(self, **kwargs) -> "RunConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class VariantSwitches:
    """Switches a variant implies: output head and which extras are active."""

    head: str  # dual_relu | diff | tanh
    full_output: bool
    use_shapelet: bool
    use_triplet: bool


def resolve_variant(cfg: RunConfig) -> VariantSwitches:
    """Derive generator head and feature toggles from the config variant.

    The baseline variants pin their own switches; ``full`` honors the
    config's ``use_shapelet`` / ``use_triplet`` flags (that is what the
    ablation toggles flip).
    """
    if cfg.variant == "gan":
        return VariantSwitches("tanh", True, False, False)
    if cfg.variant == "countergan":
        return VariantSwitches("diff", False, False, False)
    if cfg.variant == "sparse":
        return VariantSwitches("dual_relu", False, False, False)
    return VariantSwitches("dual_relu", False, cfg.use_shapelet, cfg.use_triplet)
