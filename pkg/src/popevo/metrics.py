"""Per-generation metrics and the statistics used to judge trends.

Everything here is a pure function of its arguments; the trend statistics
(`spearman`, `polyfit_gain`) are recomputable bit-for-bit from an emitted
CSV alone.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

CORE_COLUMNS = [
    "generation",
    "strategy",
    "seed",
    "num_genomes",
    "weighted_mean_fitness",
    "max_fitness",
    "lineage_entropy",
]


@dataclass
class MetricsRow:
    """One generation's record, as evaluated at the start of the step."""

    generation: int
    strategy: str
    seed: int
    num_genomes: int
    weighted_mean_fitness: float
    max_fitness: float
    lineage_entropy: float
    extras: dict = field(default_factory=dict)

    def as_values(self, extra_columns) -> list:
        vals = [
            self.generation,
            self.strategy,
            self.seed,
            self.num_genomes,
            self.weighted_mean_fitness,
            self.max_fitness,
            self.lineage_entropy,
        ]
        vals.extend(self.extras[c] for c in extra_columns)
        return vals


def weighted_mean(values, weights) -> float:
    """Sum of values[i] * weights[i]; lengths must match."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.shape != weights.shape:
        raise ValueError(
            f"length mismatch: {values.shape[0]} values vs {weights.shape[0]} weights"
        )
    return float(np.dot(values, weights))


def spearman(x, y) -> float:
    """Rank correlation with tie-averaged ranks; 0.0 for a constant series."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise ValueError("length mismatch")
    if len(x) < 3:
        raise ValueError("need at least 3 points")
    rx = rankdata(x, method="average")
    ry = rankdata(y, method="average")
    if np.ptp(rx) == 0 or np.ptp(ry) == 0:
        return 0.0
    return float(np.corrcoef(rx, ry)[0, 1])


def _r_squared(x, y, deg) -> float:
    coeffs = np.polyfit(x, y, deg)
    resid = y - np.polyval(coeffs, x)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0
    return 1.0 - ss_res / ss_tot


def polyfit_gain(x, y) -> float:
    """R^2 improvement of a quadratic fit over a linear fit (>= 0)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise ValueError("length mismatch")
    if len(x) < 5:
        raise ValueError("need at least 5 points")
    if np.ptp(x) == 0:
        raise ValueError("degenerate x: all values equal")
    if np.ptp(y) == 0:
        return 0.0
    return max(0.0, _r_squared(x, y, 2) - _r_squared(x, y, 1))


def lineage_entropy(ratios) -> float:
    """Shannon entropy -sum(p ln p) of a ratio vector."""
    p = np.asarray(ratios, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def format_value(v) -> str:
    """Shortest round-trip decimal for floats; plain text otherwise."""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv_lines(rows, extra_columns) -> list[str]:
    """Render metric rows with a fixed column order."""
    header = CORE_COLUMNS + list(extra_columns)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row.as_values(extra_columns)))
    return lines
