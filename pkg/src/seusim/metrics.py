"""Error possibilities, total error metrics, vulnerability scores and histograms.

Everything is exact: per-cell fractions share one integer denominator and
are held as :class:`Ratios`; scores are :class:`fractions.Fraction`. Floats
only appear when formatting reports.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .campaign import ErrorMatrix, check_weights
from .errors import ZeroRuns, ZeroWeightSum


class TotalMode(str, Enum):
    AT_LEAST_ONCE = "at-least-once"
    MAX_CYCLE = "max"
    MEAN_CYCLE = "mean"


@dataclass(frozen=True, eq=False)
class Ratios:
    """Array of fractions ``num / den`` with a common positive denominator."""

    num: np.ndarray
    den: int

    def __post_init__(self):
        if self.den <= 0:
            raise ValueError("denominator must be positive")

    @property
    def shape(self):
        return self.num.shape

    def __getitem__(self, idx):
        sub = self.num[idx]
        if np.ndim(sub) == 0:
            return Fraction(int(sub), self.den)
        return Ratios(sub, self.den)

    def to_float(self) -> np.ndarray:
        return self.num / self.den

    def _cross(self, other):
        if isinstance(other, Ratios):
            return self.num.astype(object) * other.den, other.num.astype(object) * self.den
        other = Fraction(other)
        return self.num.astype(object) * other.denominator, np.full(self.shape, other.numerator * self.den,
                                                                       dtype=object)

    def __eq__(self, other):
        a, b = self._cross(other)
        return a == b

    def __ge__(self, other):
        a, b = self._cross(other)
        return a >= b

    def __le__(self, other):
        a, b = self._cross(other)
        return a <= b

    def max(self, axis) -> Ratios:
        return Ratios(self.num.max(axis=axis), self.den)


def error_possibility(m: ErrorMatrix) -> Ratios:
    """Fraction of runs mismatching golden, per ``[fault, output bit, cycle]``."""
    if m.runs < 1:
        raise ZeroRuns()
    return Ratios(m.counts.copy(), m.runs)


def total_metric(m: ErrorMatrix, mode=TotalMode.AT_LEAST_ONCE) -> Ratios:
    """Aggregate the per-cycle possibilities over cycles, per ``[fault, output bit]``.

    ``at-least-once`` is the fraction of runs with a mismatch in any cycle,
    ``max`` the worst single cycle and ``mean`` the average over cycles.
    """
    mode = TotalMode(mode)
    if m.runs < 1:
        raise ZeroRuns()
    if mode is TotalMode.AT_LEAST_ONCE:
        return Ratios(m.any_error.copy(), m.runs)
    if mode is TotalMode.MAX_CYCLE:
        if m.cycles == 0:
            return Ratios(np.zeros(m.any_error.shape, dtype=np.int64), m.runs)
        return Ratios(m.counts.max(axis=2), m.runs)
    return Ratios(m.counts.sum(axis=2), m.runs * max(m.cycles, 1))


def vulnerability_scores(total: Ratios, weights) -> list[Fraction]:
    """Weighted mean of each fault's totals over the output bits.

    :param weights: sequence of per-output-bit weights, aligned with the second
        axis of ``total``.
    """
    w = [Fraction(str(x)) if isinstance(x, float) else Fraction(x) for x in weights]
    if len(w) != total.shape[1]:
        raise ValueError(f"{len(w)} weights for {total.shape[1]} output bits")
    wsum = sum(w)
    if wsum <= 0:
        raise ZeroWeightSum()
    scores = []
    for row in total.num:
        acc = sum((wi * int(n) for wi, n in zip(w, row) if wi), Fraction(0))
        scores.append(acc / (wsum * total.den))
    return scores


def histogram(scores, bin_width=Fraction(1, 10)) -> list[tuple[Fraction, int]]:
    """Count scores per bin ``[lo, lo + bin_width)``; the last bin also takes 1.0."""
    bw = Fraction(str(bin_width)) if isinstance(bin_width, float) else Fraction(bin_width)
    if not 0 < bw <= 1:
        raise ValueError("bin width must be in (0, 1]")
    nbins = math.ceil(1 / bw)
    counts = [0] * nbins
    for s in scores:
        s = Fraction(s)
        if not 0 <= s <= 1:
            raise ValueError(f"score {s} outside [0, 1]")
        counts[min(math.floor(s / bw), nbins - 1)] += 1
    return [(i * bw, c) for i, c in enumerate(counts)]


@dataclass
class VulnReport:
    matrix: ErrorMatrix
    mode: TotalMode
    weights: dict
    bin_width: Fraction
    possibility: Ratios
    total: Ratios
    score: list
    histogram: list


def build_report(m: ErrorMatrix, mode=TotalMode.AT_LEAST_ONCE, weights=None,
                 bin_width=Fraction(1, 10)) -> VulnReport:
    w = check_weights(weights, list(m.outputs))
    total = total_metric(m, mode)
    score = vulnerability_scores(total, [w[b] for b in m.outputs]) if m.outputs else \
        [Fraction(0)] * len(m.faults)
    bw = Fraction(str(bin_width)) if isinstance(bin_width, float) else Fraction(bin_width)
    return VulnReport(m, TotalMode(mode), w, bw, error_possibility(m), total, score,
                      histogram(score, bw))


def _fmt(x) -> str:
    return format(float(x), ".6g")


def table_csv(r: VulnReport) -> str:
    """Per-cycle possibilities: ``lut,output_bit,cycle_1..cycle_N,total``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    m = r.matrix
    w.writerow(["lut", "output_bit", *(f"cycle_{c + 1}" for c in range(m.cycles)), "total"])
    poss, tot = r.possibility.to_float(), r.total.to_float()
    for f, lut in enumerate(m.faults):
        for b, out in enumerate(m.outputs):
            w.writerow([lut, out, *(_fmt(x) for x in poss[f, b]), _fmt(tot[f, b])])
    return buf.getvalue()


def histogram_csv(r: VulnReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_low", "bin_high", "count"])
    for lo, count in r.histogram:
        w.writerow([_fmt(lo), _fmt(min(lo + r.bin_width, 1)), count])
    return buf.getvalue()


def report_json(r: VulnReport) -> str:
    m = r.matrix
    doc = {
        "config": {
            "mode": r.mode.value,
            "weights": {b: str(w) for b, w in r.weights.items()},
            "bin_width": str(r.bin_width),
            **{k: v for k, v in m.extra.items()},
        },
        "runs": m.runs,
        "cycles": m.cycles,
        "faults": list(m.faults),
        "outputs": list(m.outputs),
        "counts": m.counts.tolist(),
        "any_error": m.any_error.tolist(),
        "possibility": r.possibility.to_float().tolist(),
        "total": r.total.to_float().tolist(),
        "score": [float(s) for s in r.score],
        "score_exact": [str(s) for s in r.score],
        "histogram": [{"bin_low": float(lo), "count": c} for lo, c in r.histogram],
    }
    return json.dumps(doc, indent=1) + "\n"
