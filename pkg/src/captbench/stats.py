"""Pearson correlation with significance, and the accuracy/PER study.

r uses the two-pass product-moment form with compensated summation;
p-values come from the exact Student-t tail evaluated through the
regularized incomplete beta function, which stays meaningful both at
corpus scale (thousands of samples) and on small fixtures.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from scipy.special import betainc

from .errors import LengthMismatch, TooFewSamples

APA_DIMENSIONS = ("accuracy", "fluency", "prosodic", "total")


@dataclass(frozen=True)
class CorrelationResult:
    r: Optional[float]
    p_value: Optional[float]
    n: int
    degenerate: bool = False

    def as_dict(self) -> dict:
        return {"r": self.r, "p_value": self.p_value, "n": self.n, "degenerate": self.degenerate}


def t_sf(t: float, df: int) -> float:
    """P(T > t) for Student's t with df degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    x = df / (df + t * t)
    half_two_sided = 0.5 * float(betainc(df / 2.0, 0.5, x))
    return half_two_sided if t >= 0 else 1.0 - half_two_sided


def pcc(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    """Product-moment correlation with a two-sided t-test p-value.

    A constant series makes r undefined; the result is returned with the
    degenerate flag set instead of raising, so aggregation over many
    dimensions can carry on.
    """
    if len(x) != len(y):
        raise LengthMismatch(len(x), len(y))
    n = len(x)
    if n < 2:
        raise TooFewSamples(2, n)
    mean_x = math.fsum(x) / n
    mean_y = math.fsum(y) / n
    dx = [value - mean_x for value in x]
    dy = [value - mean_y for value in y]
    var_x = math.fsum(d * d for d in dx)
    var_y = math.fsum(d * d for d in dy)
    if var_x == 0.0 or var_y == 0.0:
        return CorrelationResult(r=None, p_value=None, n=n, degenerate=True)
    cov = math.fsum(a * b for a, b in zip(dx, dy))
    # single sqrt of the product: keeps r exactly +/-1.0 for affine pairs
    r = cov / math.sqrt(var_x * var_y)
    r = max(-1.0, min(1.0, r))

    df = n - 2
    if df < 1:
        p_value = 1.0
    elif 1.0 - r * r <= 0.0:
        p_value = 0.0
    else:
        t = r * math.sqrt(df / (1.0 - r * r))
        p_value = 2.0 * t_sf(abs(t), df)
    return CorrelationResult(r=r, p_value=p_value, n=n)


def apa_pcc_table(
    pairs_by_dim: dict[str, list[tuple[float, float]]],
) -> dict[str, CorrelationResult]:
    """Per-dimension correlation between human and predicted scores.

    Expects (human, predicted) pairs per dimension, already reduced to the
    utterances whose predictions parsed (pairwise deletion).
    """
    results = {}
    for dim in APA_DIMENSIONS:
        pairs = pairs_by_dim.get(dim, [])
        if len(pairs) < 3:
            raise TooFewSamples(3, len(pairs))
        human = [h for h, _ in pairs]
        predicted = [p for _, p in pairs]
        results[dim] = pcc(human, predicted)
    return results


@dataclass(frozen=True)
class ScatterPoint:
    utt_id: str
    per: float
    human_accuracy: int
    predicted_accuracy: Optional[int]


@dataclass(frozen=True)
class CorrelationStudy:
    human: CorrelationResult
    predicted: CorrelationResult
    points: tuple[ScatterPoint, ...]


def accuracy_per_correlation(points: Sequence[ScatterPoint]) -> CorrelationStudy:
    """r(PER, human accuracy) and r(PER, predicted accuracy).

    Points missing a predicted score only drop out of the predicted-side
    series.
    """
    if len(points) < 3:
        raise TooFewSamples(3, len(points))
    human = pcc([p.per for p in points], [p.human_accuracy for p in points])
    with_pred = [p for p in points if p.predicted_accuracy is not None]
    if len(with_pred) < 3:
        raise TooFewSamples(3, len(with_pred))
    predicted = pcc([p.per for p in with_pred], [p.predicted_accuracy for p in with_pred])
    return CorrelationStudy(human=human, predicted=predicted, points=tuple(points))


def write_scatter(points: Sequence[ScatterPoint], path: str | Path) -> None:
    """Combined scatter rows: the interchange format the report plotter reads."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["utt_id", "per", "human_accuracy", "predicted_accuracy"])
        for point in points:
            writer.writerow(
                [
                    point.utt_id,
                    float(point.per),
                    point.human_accuracy,
                    "" if point.predicted_accuracy is None else point.predicted_accuracy,
                ]
            )
