"""Adam optimizer with bias-corrected moment estimates."""

from __future__ import annotations

import logging

import numpy as np

from .autodiff import Tensor

__all__ = ["Adam"]

logger = logging.getLogger(__name__)


class Adam:
    def __init__(
        self,
        params: list[tuple[str, Tensor]],
        lr: float = 1e-5,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(p.data) for name, p in self.params}
        self.v = {name: np.zeros_like(p.data) for name, p in self.params}

    def step(self) -> bool:
        """Apply one update. Skips (returning False) on non-finite gradients."""
        grads = {}
        for name, p in self.params:
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            if not np.all(np.isfinite(g)):
                logger.warning("non-finite gradient in %s; step %d skipped", name, self.t + 1)
                return False
            grads[name] = g
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for name, p in self.params:
            g = grads[name]
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * g * g
            m_hat = self.m[name] / bc1
            v_hat = self.v[name] / bc2
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
        return True

    def zero_grad(self) -> None:
        for _, p in self.params:
            p.zero_grad()

    def state_dict(self) -> dict:
        return {
            "step": self.t,
            "lr": self.lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "m": {name: m.tolist() for name, m in self.m.items()},
            "v": {name: v.tolist() for name, v in self.v.items()},
        }

    def load_state_dict(self, state: dict) -> None:
        self.t = int(state["step"])
        self.lr = float(state["lr"])
        self.beta1 = float(state["beta1"])
        self.beta2 = float(state["beta2"])
        self.eps = float(state["eps"])
        for name, p in self.params:
            self.m[name] = np.array(state["m"][name], dtype=np.float64).reshape(p.data.shape)
            self.v[name] = np.array(state["v"][name], dtype=np.float64).reshape(p.data.shape)
