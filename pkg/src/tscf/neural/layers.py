"""Parameterized layers: dense, gated recurrent cells, output heads.

Weights initialize uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)] from a
seeded generator; biases start at zero.
"""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor, concat, tensor

__all__ = [
    "Dense",
    "LstmCell",
    "BiRnnEncoder",
    "DualReluHead",
    "DiffHead",
    "TanhHead",
    "birnn_apply",
]


def _weight(rng: np.random.Generator, rows: int, cols: int) -> Tensor:
    bound = 1.0 / np.sqrt(rows)
    return Tensor(rng.uniform(-bound, bound, size=(rows, cols)))


class Dense:
    """Affine map x @ W + b."""

    def __init__(self, in_size: int, out_size: int, rng: np.random.Generator, name: str):
        self.W = _weight(rng, in_size, out_size)
        self.b = Tensor(np.zeros(out_size))
        self.name = name

    def forward(self, x: Tensor) -> Tensor:
        x = tensor(x)
        if x.shape[-1] != self.W.shape[0]:
            raise ValueError(
                f"{self.name}: input dim {x.shape[-1]} != weight rows {self.W.shape[0]}"
            )
        return x @ self.W + self.b

    def params(self) -> list[tuple[str, Tensor]]:
        return [(f"{self.name}.W", self.W), (f"{self.name}.b", self.b)]


class LstmCell:
    """Single-direction gated recurrent cell (input/forget/cell/output gates)."""

    GATES = ("i", "f", "g", "o")

    def __init__(self, input_size: int, hidden_size: int, rng: np.random.Generator, name: str):
        self.hidden_size = hidden_size
        self.name = name
        self.W = {k: _weight(rng, input_size, hidden_size) for k in self.GATES}
        self.U = {k: _weight(rng, hidden_size, hidden_size) for k in self.GATES}
        self.b = {k: Tensor(np.zeros(hidden_size)) for k in self.GATES}

    def step(self, x: Tensor, h: Tensor, c: Tensor) -> tuple[Tensor, Tensor]:
        pre = {k: x @ self.W[k] + h @ self.U[k] + self.b[k] for k in self.GATES}
        i = pre["i"].sigmoid()
        f = pre["f"].sigmoid()
        g = pre["g"].tanh()
        o = pre["o"].sigmoid()
        c_new = f * c + i * g
        h_new = o * c_new.tanh()
        return h_new, c_new

    def run(self, steps: list[Tensor]) -> list[Tensor]:
        """Hidden state after each step; state starts at zero."""
        batch = steps[0].shape[0]
        h = Tensor(np.zeros((batch, self.hidden_size)))
        c = Tensor(np.zeros((batch, self.hidden_size)))
        out = []
        for x in steps:
            h, c = self.step(x, h, c)
            out.append(h)
        return out

    def params(self) -> list[tuple[str, Tensor]]:
        out = []
        for k in self.GATES:
            out.append((f"{self.name}.W{k}", self.W[k]))
            out.append((f"{self.name}.U{k}", self.U[k]))
            out.append((f"{self.name}.b{k}", self.b[k]))
        return out


class BiRnnEncoder:
    """Forward and backward recurrent passes with per-step concatenation."""

    def __init__(self, input_size: int, hidden_size: int, rng: np.random.Generator, name: str):
        self.fwd = LstmCell(input_size, hidden_size, rng, f"{name}.fwd")
        self.bwd = LstmCell(input_size, hidden_size, rng, f"{name}.bwd")
        self.hidden_size = hidden_size

    def run(self, steps: list[Tensor]) -> tuple[list[Tensor], Tensor]:
        """Returns (per-step hidden states (B, 2H), pooled encoding (B, 2H)).

        The encoding mean-pools each direction over time: every input step
        then has a short gradient path into the encoding, which keeps
        input sensitivity from vanishing on long series.
        """
        hs_f = self.fwd.run(steps)
        hs_b_rev = self.bwd.run(steps[::-1])
        hs_b = hs_b_rev[::-1]
        hidden = [concat([f, b], axis=1) for f, b in zip(hs_f, hs_b)]
        t_len = float(len(steps))
        pool_f = hs_f[0]
        for h in hs_f[1:]:
            pool_f = pool_f + h
        pool_b = hs_b[0]
        for h in hs_b[1:]:
            pool_b = pool_b + h
        final = concat([pool_f / t_len, pool_b / t_len], axis=1)
        return hidden, final

    def params(self) -> list[tuple[str, Tensor]]:
        return self.fwd.params() + self.bwd.params()


def birnn_apply(encoder: BiRnnEncoder, sequence) -> Tensor:
    """Run a single (T, V) sequence; returns the (T, 2H) hidden-state stack."""
    seq = tensor(sequence)
    t_len = seq.shape[0]
    steps = [seq[t : t + 1] for t in range(t_len)]
    hidden, _ = encoder.run(steps)
    return concat(hidden, axis=0)


class DualReluHead:
    """Signed sparse output: relu(fc1(h)) - relu(fc2(h)), reshaped to (V, T)."""

    def __init__(self, in_size: int, v: int, t: int, rng: np.random.Generator, name: str):
        self.fc1 = Dense(in_size, v * t, rng, f"{name}.fc1")
        self.fc2 = Dense(in_size, v * t, rng, f"{name}.fc2")
        self.v, self.t = v, t

    def forward(self, hidden: Tensor) -> Tensor:
        pos = self.fc1.forward(hidden).relu()
        neg = self.fc2.forward(hidden).relu()
        out = pos - neg
        return out.reshape(hidden.shape[0], self.v, self.t)

    def branches(self, hidden: Tensor) -> tuple[Tensor, Tensor]:
        """The two nonnegative branches before subtraction."""
        return self.fc1.forward(hidden).relu(), self.fc2.forward(hidden).relu()

    def params(self) -> list[tuple[str, Tensor]]:
        return self.fc1.params() + self.fc2.params()


class DiffHead:
    """Plain difference of two dense layers (no rectification)."""

    def __init__(self, in_size: int, v: int, t: int, rng: np.random.Generator, name: str):
        self.fc1 = Dense(in_size, v * t, rng, f"{name}.fc1")
        self.fc2 = Dense(in_size, v * t, rng, f"{name}.fc2")
        self.v, self.t = v, t

    def forward(self, hidden: Tensor) -> Tensor:
        out = self.fc1.forward(hidden) - self.fc2.forward(hidden)
        return out.reshape(hidden.shape[0], self.v, self.t)

    def params(self) -> list[tuple[str, Tensor]]:
        return self.fc1.params() + self.fc2.params()


class TanhHead:
    """Bounded full-instance output through tanh."""

    def __init__(self, in_size: int, v: int, t: int, rng: np.random.Generator, name: str):
        self.fc = Dense(in_size, v * t, rng, f"{name}.fc")
        self.v, self.t = v, t

    def forward(self, hidden: Tensor) -> Tensor:
        out = self.fc.forward(hidden).tanh()
        return out.reshape(hidden.shape[0], self.v, self.t)

    def params(self) -> list[tuple[str, Tensor]]:
        return self.fc.params()
