"""Finite-difference verification of analytic gradients."""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor, no_grad

__all__ = ["grad_check", "max_param_count"]

max_param_count = 5000


def _loss_value(network, x: np.ndarray, loss_fn) -> float:
    with no_grad():
        out = network.forward(Tensor(x))
        return float(loss_fn(out).data)


def grad_check(network, x: np.ndarray, loss_fn, h: float = 1e-4) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``loss_fn`` maps the network output Tensor to a scalar Tensor. Intended
    for small networks only (<= ``max_param_count`` parameters).
    """
    params = network.params()
    n_params = sum(p.data.size for _, p in params)
    if n_params > max_param_count:
        raise ValueError(f"network too large for grad_check ({n_params} params)")

    network.zero_grad()
    out = network.forward(Tensor(np.asarray(x, dtype=np.float64)))
    loss = loss_fn(out)
    loss.backward()

    worst = 0.0
    for _, p in params:
        analytic = p.grad if p.grad is not None else np.zeros_like(p.data)
        flat = p.data.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = _loss_value(network, x, loss_fn)
            flat[i] = orig - h
            down = _loss_value(network, x, loss_fn)
            flat[i] = orig
            numeric = (up - down) / (2.0 * h)
            a = analytic.ravel()[i]
            err = abs(a - numeric) / max(abs(a) + abs(numeric), 1e-6)
            worst = max(worst, err)
    return worst
