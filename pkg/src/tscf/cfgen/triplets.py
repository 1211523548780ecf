"""Triplet sampling for the metric-learning regularizer.

For each query: factuals are its n nearest training instances that the
classifier assigns the query's own predicted class (L2 on flattened
series); counterfactuals are n uniform draws from the other predicted
class. Membership uses classifier predictions, never ground-truth labels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import MtsDataset

__all__ = ["TripletBatch", "TripletSampler", "sample_triplets"]


@dataclass
class TripletBatch:
    """Per-anchor factual and counterfactual example stacks.

    query_ids: (B,) ids; factuals / counterfactuals: (B, n, V, T).
    The anchor (the evolving counterfactual of each query) is supplied by
    the trainer when the loss is evaluated.
    """

    query_ids: list[str]
    factuals: np.ndarray
    counterfactuals: np.ndarray
    n: int


class TripletSampler:
    """Precomputes nearest-factual tables for a fixed train set and classifier."""

    def __init__(self, train: MtsDataset, classifier, n: int):
        if n < 1:
            raise ValueError("triplet size n must be >= 1")
        self.train = train
        self.n = n
        self.values = train.values_array()
        flat = self.values.reshape(len(train), -1)
        self._flat = flat
        probs = classifier.predict_proba(self.values)
        self.pred = (probs > 0.5).astype(np.int64)
        self._by_class = {c: np.nonzero(self.pred == c)[0] for c in (0, 1)}

    def eligible_counts(self, query_pred: int) -> tuple[int, int]:
        same = len(self._by_class.get(query_pred, ()))
        other = len(self._by_class.get(1 - query_pred, ()))
        return same, other

    def nearest_factuals(self, query_values: np.ndarray, query_pred: int) -> np.ndarray:
        """Indices of the n closest same-predicted-class training instances."""
        same = self._by_class.get(query_pred, np.array([], dtype=np.int64))
        if len(same) < self.n:
            raise ValueError(
                f"need {self.n} factual candidates of predicted class {query_pred}, "
                f"have {len(same)}"
            )
        d = np.linalg.norm(self._flat[same] - query_values.ravel(), axis=1)
        order = np.argsort(d, kind="stable")[: self.n]  # stable: index order on ties
        return same[order]

    def draw_counterfactuals(
        self, query_preds: np.ndarray, rng: np.random.Generator
    ) -> np.ndarray:
        """Uniformly drawn opposite-predicted-class sets, shape (B, n, V, T)."""
        sets = []
        for pred in query_preds:
            other = self._by_class.get(1 - int(pred), np.array([], dtype=np.int64))
            if len(other) < self.n:
                raise ValueError(
                    f"need {self.n} counterfactual candidates of predicted class "
                    f"{1 - int(pred)}, have {len(other)}"
                )
            cf_idx = other[rng.choice(len(other), size=self.n, replace=False)]
            sets.append(self.values[cf_idx])
        return np.stack(sets)

    def sample(
        self, queries: np.ndarray, query_preds: np.ndarray, query_ids: list[str],
        rng: np.random.Generator,
    ) -> TripletBatch:
        """Build a batch: nearest factuals, uniformly drawn counterfactuals."""
        factuals = np.stack(
            [self.values[self.nearest_factuals(values, int(pred))]
             for values, pred in zip(queries, query_preds)]
        )
        counterfactuals = self.draw_counterfactuals(query_preds, rng)
        return TripletBatch(
            query_ids=list(query_ids),
            factuals=factuals,
            counterfactuals=counterfactuals,
            n=self.n,
        )


def sample_triplets(
    queries: MtsDataset | np.ndarray,
    train: MtsDataset,
    classifier,
    n: int,
    seed: int,
) -> TripletBatch:
    """One-shot sampling entry point (seeded, deterministic)."""
    sampler = TripletSampler(train, classifier, n)
    if isinstance(queries, MtsDataset):
        q_values = queries.values_array()
        q_ids = [inst.id for inst in queries]
    else:
        q_values = np.asarray(queries, dtype=np.float64)
        q_ids = [f"query-{i}" for i in range(len(q_values))]
    q_preds = (classifier.predict_proba(q_values) > 0.5).astype(np.int64)
    rng = np.random.default_rng(seed)
    return sampler.sample(q_values, q_preds, q_ids, rng)
