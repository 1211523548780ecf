"""Serialization of networks and optimizer state.

One JSON file per network: the spec, a flat list of named parameter
arrays with shapes, the optimizer state (if any), and the seed. Floats
are written as shortest round-trippable decimal text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .networks import Classifier, Discriminator, Generator, NetworkSpec, build_network
from .optim import Adam

__all__ = ["save_network", "load_network", "ModelBundle"]


def save_network(net, path: str | Path, optimizer: Adam | None = None) -> None:
    spec = net.spec
    obj = {
        "kind": spec.kind,
        "v": spec.v,
        "t": spec.t,
        "hidden_size": spec.hidden_size,
        "head": spec.head,
        "seed": spec.seed,
        "params": [
            {"name": name, "shape": list(p.data.shape), "values": p.data.ravel().tolist()}
            for name, p in net.params()
        ],
        "optimizer": optimizer.state_dict() if optimizer is not None else None,
    }
    Path(path).write_text(json.dumps(obj) + "\n")


def load_network(path: str | Path) -> tuple[object, Adam | None]:
    obj = json.loads(Path(path).read_text())
    spec = NetworkSpec(
        kind=obj["kind"],
        v=int(obj["v"]),
        t=int(obj["t"]),
        hidden_size=int(obj["hidden_size"]),
        head=obj["head"],
        seed=int(obj["seed"]),
    )
    net = build_network(spec)
    stored = {p["name"]: p for p in obj["params"]}
    for name, tensor_p in net.params():
        if name not in stored:
            raise ValueError(f"{path}: missing parameter {name}")
        entry = stored[name]
        arr = np.array(entry["values"], dtype=np.float64).reshape(entry["shape"])
        if arr.shape != tensor_p.data.shape:
            raise ValueError(f"{path}: shape mismatch for {name}")
        tensor_p.data = arr
    optimizer = None
    if obj.get("optimizer") is not None:
        optimizer = Adam(net.params())
        optimizer.load_state_dict(obj["optimizer"])
    return net, optimizer


@dataclass
class ModelBundle:
    """Trained generator/discriminator plus the frozen classifier."""

    generator: Generator
    discriminator: Discriminator
    classifier: Classifier
    seed: int
    gen_optimizer: Adam | None = None
    disc_optimizer: Adam | None = None

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        save_network(self.generator, directory / "generator.json", self.gen_optimizer)
        save_network(self.discriminator, directory / "discriminator.json", self.disc_optimizer)
        save_network(self.classifier, directory / "classifier.json")
        (directory / "bundle.json").write_text(json.dumps({"seed": self.seed}) + "\n")

    @classmethod
    def load(cls, directory: str | Path) -> "ModelBundle":
        directory = Path(directory)
        gen, gen_opt = load_network(directory / "generator.json")
        disc, disc_opt = load_network(directory / "discriminator.json")
        clf, _ = load_network(directory / "classifier.json")
        meta = json.loads((directory / "bundle.json").read_text())
        return cls(
            generator=gen,
            discriminator=disc,
            classifier=clf,
            seed=int(meta["seed"]),
            gen_optimizer=gen_opt,
            disc_optimizer=disc_opt,
        )
