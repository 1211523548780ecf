"""The three networks: residual generator, discriminator, classifier.

All consume a (B, V, T) batch. The generator emits a (B, V, T) output
through a configurable head; discriminator and classifier emit one
sigmoid probability per instance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import Tensor, no_grad, tensor
from .layers import BiRnnEncoder, Dense, DiffHead, DualReluHead, TanhHead

__all__ = [
    "NetworkSpec",
    "Generator",
    "Discriminator",
    "Classifier",
    "build_network",
    "bce",
    "PROB_EPS",
]

PROB_EPS = 1e-7

GENERATOR_HEADS = ("dual_relu", "diff", "tanh")


@dataclass(frozen=True)
class NetworkSpec:
    kind: str  # generator | discriminator | classifier
    v: int
    t: int
    hidden_size: int
    head: str = "sigmoid"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind == "generator":
            if self.head not in GENERATOR_HEADS:
                raise ValueError(f"generator head must be one of {GENERATOR_HEADS}")
        elif self.kind in ("discriminator", "classifier"):
            if self.head != "sigmoid":
                raise ValueError(f"{self.kind} must end in a sigmoid head")
        else:
            raise ValueError(f"unknown network kind {self.kind!r}")


def _steps_from_batch(x: Tensor) -> list[Tensor]:
    """Split a (B, V, T) tensor into T step tensors of shape (B, V)."""
    t_len = x.shape[2]
    return [x[:, :, t] for t in range(t_len)]


class _Net:
    def __init__(self, spec: NetworkSpec, rng: np.random.Generator):
        self.spec = spec
        self.encoder = BiRnnEncoder(spec.v, spec.hidden_size, rng, "enc")

    def params(self) -> list[tuple[str, Tensor]]:
        raise NotImplementedError

    def zero_grad(self) -> None:
        for _, p in self.params():
            p.zero_grad()

    def encode(self, x) -> Tensor:
        x = tensor(x)
        if x.shape[1:] != (self.spec.v, self.spec.t):
            raise ValueError(
                f"{self.spec.kind}: expected (B, {self.spec.v}, {self.spec.t}), got {x.shape}"
            )
        _, final = self.encoder.run(_steps_from_batch(x))
        return final


class Generator(_Net):
    """Maps a (masked) series batch to residuals, or to full instances for
    the tanh head."""

    def __init__(self, spec: NetworkSpec, rng: np.random.Generator):
        super().__init__(spec, rng)
        head_cls = {"dual_relu": DualReluHead, "diff": DiffHead, "tanh": TanhHead}[spec.head]
        self.head = head_cls(2 * spec.hidden_size, spec.v, spec.t, rng, "head")

    @property
    def full_output(self) -> bool:
        return self.spec.head == "tanh"

    def forward(self, x) -> Tensor:
        return self.head.forward(self.encode(x))

    def params(self) -> list[tuple[str, Tensor]]:
        return self.encoder.params() + self.head.params()


class _ProbNet(_Net):
    def __init__(self, spec: NetworkSpec, rng: np.random.Generator):
        super().__init__(spec, rng)
        self.out = Dense(2 * spec.hidden_size, 1, rng, "out")

    def forward(self, x) -> Tensor:
        """Sigmoid probability per instance, shape (B, 1)."""
        return self.out.forward(self.encode(x)).sigmoid()

    def predict_proba(self, batch: np.ndarray) -> np.ndarray:
        """Probabilities as a flat (B,) array, no graph recorded."""
        with no_grad():
            return self.forward(np.asarray(batch, dtype=np.float64)).data[:, 0]

    def params(self) -> list[tuple[str, Tensor]]:
        return self.encoder.params() + self.out.params()


class Discriminator(_ProbNet):
    pass


class Classifier(_ProbNet):
    pass


def build_network(spec: NetworkSpec):
    rng = np.random.default_rng([spec.seed, _KIND_SALT[spec.kind]])
    cls = {"generator": Generator, "discriminator": Discriminator, "classifier": Classifier}
    return cls[spec.kind](spec, rng)


_KIND_SALT = {"generator": 101, "discriminator": 102, "classifier": 103}


def bce(prob, target) -> Tensor:
    """Binary cross-entropy with probabilities clamped away from {0, 1}.

    ``prob`` may be a Tensor of probabilities of any shape; ``target`` is a
    same-shape array (or scalar) of 0/1 targets. Returns the mean.
    """
    prob = tensor(prob)
    target = np.asarray(target, dtype=np.float64)
    p = prob.clip(PROB_EPS, 1.0 - PROB_EPS)
    losses = -(p.log() * target + (1.0 - p).log() * (1.0 - target))
    return losses.mean()
