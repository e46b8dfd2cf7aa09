"""Agreement statistics over metric-induced method rankings.

Each mosaic acts as a rater that ranks the competing attribution
methods by a chosen metric. Krippendorff's alpha (ordinal difference
function, coincidence-matrix form) measures how consistently the
mosaics rank the methods; Spearman's rho measures how similarly two
methods score across mosaics. Scores may be missing; a missing score is
explicit (None), never zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, TooFewValuesError

ALPHA_LEVELS = ("ordinal", "interval")


@dataclass(frozen=True)
class RatingMatrix:
    """Raters (mosaics) in rows, units (methods) in columns."""

    raters: tuple[str, ...]
    units: tuple[str, ...]
    scores: tuple[tuple[float | None, ...], ...]
    metric_name: str = ""

    def __post_init__(self):
        if len(self.raters) < 2 or len(self.units) < 2:
            raise TooFewValuesError(
                f"need >=2 raters and >=2 units, got {len(self.raters)}x{len(self.units)}"
            )
        if len(self.scores) != len(self.raters):
            raise DimensionMismatchError("one score row per rater required")
        if any(len(row) != len(self.units) for row in self.scores):
            raise DimensionMismatchError("every score row must cover all units")

    def column(self, j: int) -> list[float | None]:
        return [row[j] for row in self.scores]


@dataclass(frozen=True)
class AlphaResult:
    """alpha == 1 - D_o/D_e; alpha is None when D_e == 0 (degenerate)."""

    alpha: float | None
    observed_disagreement: float
    expected_disagreement: float

    @property
    def defined(self) -> bool:
        return self.alpha is not None


@dataclass(frozen=True)
class RhoMatrix:
    """Symmetric pairwise rank-correlation grid with unit diagonal."""

    method_ids: tuple[str, ...]
    rho: tuple[tuple[float | None, ...], ...]

    def __post_init__(self):
        n = len(self.method_ids)
        if len(self.rho) != n or any(len(row) != n for row in self.rho):
            raise DimensionMismatchError("rho grid must be square over method_ids")
        for i in range(n):
            if self.rho[i][i] != 1.0:
                raise ValueError("diagonal entries must be exactly 1.0")
            for j in range(i):
                if self.rho[i][j] != self.rho[j][i]:
                    raise ValueError("rho grid must be symmetric")

    def pair(self, a: str, b: str) -> float | None:
        return self.rho[self.method_ids.index(a)][self.method_ids.index(b)]


def rank_row(scores: Sequence[float | None]) -> list[float | None]:
    """Fractional ranks, best (highest) score first; missing stays None.

    Ties get the mean of the positions they span, so [0.5, 0.5] ranks as
    [1.5, 1.5]. Needs at least two non-missing scores.
    """
    present = [i for i, s in enumerate(scores) if s is not None]
    if len(present) < 2:
        raise TooFewValuesError(f"need >=2 scores to rank, got {len(present)}")
    order = sorted(present, key=lambda i: -float(scores[i]))
    ranks: list[float | None] = [None] * len(scores)
    pos = 0
    while pos < len(order):
        tail = pos
        while tail + 1 < len(order) and scores[order[tail + 1]] == scores[order[pos]]:
            tail += 1
        mean_rank = (pos + tail) / 2 + 1
        for k in range(pos, tail + 1):
            ranks[order[k]] = mean_rank
        pos = tail + 1
    return ranks


def _coincidence(
    rows: list[list[float | None]], n_units: int
) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    """Coincidence matrix over the distinct observed values.

    Returns (o, marginals, n_total, category values). Units carrying
    fewer than two values are unpairable and contribute nothing.
    """
    cats = sorted({v for row in rows for v in row if v is not None})
    idx = {v: i for i, v in enumerate(cats)}
    k = len(cats)
    o = np.zeros((k, k))
    n_total = 0.0
    for j in range(n_units):
        cnt = np.zeros(k)
        for row in rows:
            if row[j] is not None:
                cnt[idx[row[j]]] += 1
        m_u = cnt.sum()
        if m_u < 2:
            continue
        pair = np.outer(cnt, cnt)
        np.fill_diagonal(pair, cnt * (cnt - 1))
        o += pair / (m_u - 1)
        n_total += m_u
    return o, o.sum(axis=1), n_total, cats


def _delta_sq(level: str, marginals: np.ndarray, cats: list[float]) -> np.ndarray:
    if level == "interval":
        v = np.asarray(cats)
        return (v[:, None] - v[None, :]) ** 2
    # ordinal: squared gap between cumulative positions of the two
    # categories, measured through the coincidence marginals
    k = len(cats)
    csum = np.cumsum(marginals)
    delta = np.zeros((k, k))
    for c in range(k):
        for d in range(c + 1, k):
            span = csum[d] - (csum[c - 1] if c else 0.0)
            delta[c, d] = delta[d, c] = (span - (marginals[c] + marginals[d]) / 2.0) ** 2
    return delta


def krippendorff_alpha(m: RatingMatrix, level: str = "ordinal") -> AlphaResult:
    """Agreement across raters, computed on the coincidence matrix.

    At the ordinal level each rater's scores are first converted to
    fractional ranks (raters with fewer than two scores cannot rank and
    are dropped); the interval level uses raw scores and keeps all
    raters. Perfect agreement gives alpha == 1.0 exactly; if expected
    disagreement is zero the outcome is degenerate and alpha is None.
    """
    if level not in ALPHA_LEVELS:
        raise ValueError(f"level must be one of {ALPHA_LEVELS}, got {level!r}")
    if level == "ordinal":
        rows = [
            rank_row(row)
            for row in m.scores
            if sum(1 for s in row if s is not None) >= 2
        ]
    else:
        rows = [list(row) for row in m.scores]
    if not rows:
        raise TooFewValuesError("no rater has two scores to compare")

    o, marginals, n_total, cats = _coincidence(rows, len(m.units))
    if n_total < 2:
        raise TooFewValuesError("no unit was scored by two raters")
    delta = _delta_sq(level, marginals, cats)
    d_obs = float((o * delta).sum() / n_total)
    d_exp = float(
        (np.outer(marginals, marginals) * delta).sum() / (n_total * (n_total - 1.0))
    )
    if d_exp == 0.0:
        return AlphaResult(alpha=None, observed_disagreement=d_obs, expected_disagreement=0.0)
    return AlphaResult(
        alpha=1.0 - d_obs / d_exp,
        observed_disagreement=d_obs,
        expected_disagreement=d_exp,
    )


def spearman_rho(
    x: Sequence[float | None], y: Sequence[float | None]
) -> float | None:
    """Pearson correlation of the fractional ranks of x and y.

    Pairs with a missing side are dropped first; fewer than three
    complete pairs is an error, zero rank variance on either side makes
    the correlation undefined (None).
    """
    if len(x) != len(y):
        raise DimensionMismatchError(f"length mismatch: {len(x)} vs {len(y)}")
    keep = [i for i in range(len(x)) if x[i] is not None and y[i] is not None]
    if len(keep) < 3:
        raise TooFewValuesError(f"need >=3 complete pairs, got {len(keep)}")
    rx = np.asarray(rank_row([x[i] for i in keep]), dtype=float)
    ry = np.asarray(rank_row([y[i] for i in keep]), dtype=float)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt((rx * rx).sum() * (ry * ry).sum())
    if denom == 0.0:
        return None
    return float((rx * ry).sum() / denom)


def inter_method_matrix(m: RatingMatrix) -> RhoMatrix:
    """Pairwise rank correlation between method score columns.

    The diagonal is 1.0 by definition. A pair is reported undefined
    (None) when it has fewer than three complete cases or a
    zero-variance side.
    """
    n = len(m.units)
    grid: list[list[float | None]] = [[None] * n for _ in range(n)]
    for i in range(n):
        grid[i][i] = 1.0
        col_i = m.column(i)
        for j in range(i + 1, n):
            try:
                r = spearman_rho(col_i, m.column(j))
            except TooFewValuesError:
                r = None
            grid[i][j] = grid[j][i] = r
    return RhoMatrix(method_ids=m.units, rho=tuple(tuple(row) for row in grid))
