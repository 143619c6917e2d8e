"""Statistics: certified infidelity, fidelity estimation, scaling fits, CHSH.

The hypothesis test treats a run of N two-outcome tests with pass
frequency f.  The null ("average fidelity at most 1-eps") is rejected
when f exceeds the worst-case pass rate 1 - eps*gap, at a significance
bounded by the Chernoff-Hoeffding tail exp(-D(f || 1-eps*gap) * N) with
D the Kullback-Leibler divergence in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .states import DensityMatrix

BISECTION_TOL = 1e-9
_BISECTION_STEPS = 200


def kl_divergence(x: float, y: float) -> float:
    """D(x || y) for Bernoulli distributions, natural log, 0*ln(0) = 0."""
    if not 0.0 <= x <= 1.0 or not 0.0 < y < 1.0:
        raise ValueError(f"need x in [0,1] and y in (0,1), got x={x}, y={y}")
    d = 0.0
    if x > 0.0:
        d += x * math.log(x / y)
    if x < 1.0:
        d += (1.0 - x) * math.log((1.0 - x) / (1.0 - y))
    return d


def significance(f: float, n_tests: int, epsilon: float, gap: float) -> float:
    """Significance level achieved by frequency f over n_tests tests.

    Returns ``exp(-D(f || 1 - eps*gap) * N)`` when the rejection rule
    ``f > 1 - eps*gap`` holds.  When it does not, no rejection is possible
    and the defined outcome is 1.0 (the claim carries no significance).
    At f = 1 the value reduces to ``(1 - eps*gap)^N``.
    """
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"frequency must be in [0, 1], got {f}")
    if n_tests < 1:
        raise ValueError("n_tests must be at least 1")
    boundary = 1.0 - epsilon * gap
    if not 0.0 < boundary < 1.0:
        raise ValueError(f"epsilon*gap = {epsilon * gap} must lie in (0, 1)")
    if f <= boundary:
        return 1.0
    return math.exp(-kl_divergence(f, boundary) * n_tests)


def certified_epsilon(
    f: float,
    n_tests: int,
    gap: float,
    delta: float,
) -> float | None:
    """Minimal infidelity certified at significance delta, or None.

    Bisects the monotone map eps -> significance(f, N, eps, gap) over
    (1e-12, min(1/gap, 1) - 1e-12) to absolute tolerance 1e-9.  Returns
    None when no epsilon in range reaches the requested significance
    ("cannot certify").
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    lo = 1e-12
    hi = min(1.0 / gap, 1.0) - 1e-12
    if significance(f, n_tests, hi, gap) > delta:
        return None
    for _ in range(_BISECTION_STEPS):
        if hi - lo <= BISECTION_TOL:
            break
        mid = 0.5 * (lo + hi)
        if significance(f, n_tests, mid, gap) <= delta:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class HypothesisResult:
    epsilon_certified: float
    delta_achieved: float
    frequency: float
    n_tests: int
    spectral_gap: float


def certify(f: float, n_tests: int, gap: float, delta: float) -> HypothesisResult | None:
    """Certified-infidelity result at target significance, or None."""
    eps = certified_epsilon(f, n_tests, gap, delta)
    if eps is None:
        return None
    return HypothesisResult(
        epsilon_certified=eps,
        delta_achieved=significance(f, n_tests, eps, gap),
        frequency=f,
        n_tests=n_tests,
        spectral_gap=gap,
    )


@dataclass(frozen=True)
class FidelityEstimate:
    """Point estimate (homogeneous strategies) or two-sided bounds.

    For a homogeneous strategy the pass frequency inverts linearly,
    F = (f - (1-gap))/gap, with standard deviation
    sqrt(f(1-f)/N)/gap <= 1/(2*gap*sqrt(N)); the point estimate coincides
    with the upper bound.  Non-homogeneous strategies only support
    bounds: 1 - 2(1-f)/(1-gap) <= F <= (f-(1-gap))/gap.
    """

    point: float | None
    std: float | None
    lower: float
    upper: float
    homogeneous: bool
    in_physical_range: bool


def estimate_fidelity(f: float, n_tests: int, gap: float, homogeneous: bool = True) -> FidelityEstimate:
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"frequency must be in [0, 1], got {f}")
    if n_tests < 1:
        raise ValueError("n_tests must be at least 1")
    if not 0.0 < gap < 1.0:
        raise ValueError(f"spectral gap must be in (0, 1), got {gap}")
    upper = (f - (1.0 - gap)) / gap
    lower = 1.0 - 2.0 * (1.0 - f) / (1.0 - gap)
    if homogeneous:
        std = math.sqrt(f * (1.0 - f) / n_tests) / gap
        return FidelityEstimate(
            point=upper,
            std=std,
            lower=lower,
            upper=upper,
            homogeneous=True,
            in_physical_range=0.0 <= upper <= 1.0,
        )
    return FidelityEstimate(
        point=None,
        std=None,
        lower=lower,
        upper=upper,
        homogeneous=False,
        in_physical_range=lower <= 1.0 and upper >= 0.0,
    )


def fit_scaling_exponent(points: list[tuple[float, float]]) -> tuple[float, float, float]:
    """Least-squares fit of ln N against ln eps.

    ``points`` holds (N, epsilon) pairs; returns (slope, intercept,
    sum of squared residuals) of ln N = slope * ln eps + intercept.
    A 1/N law gives slope -1.
    """
    if len(points) < 3:
        raise ValueError(f"need at least 3 points to fit, got {len(points)}")
    if any(n <= 0 or e <= 0 for n, e in points):
        raise ValueError("all points must be positive")
    x = np.log([e for _, e in points])
    y = np.log([n for n, _ in points])
    a = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), residual, *_ = np.linalg.lstsq(a, y, rcond=None)
    fitted = a @ np.array([slope, intercept])
    ssr = float(np.sum((y - fitted) ** 2)) if residual.size == 0 else float(residual[0])
    return float(slope), float(intercept), ssr


# ---------------------------------------------------------------------------
# CHSH

CHSH_ROW_ANGLES = (0.0, 45.0, 90.0, 135.0)
CHSH_COL_ANGLES = (22.5, 67.5, 112.5, 157.5)


@dataclass(frozen=True)
class CountTable:
    """4x4 coincidence counts keyed by analyzer angles in degrees."""

    row_angles: tuple[float, float, float, float]
    col_angles: tuple[float, float, float, float]
    counts: np.ndarray

    def __post_init__(self):
        c = np.array(self.counts)
        if c.shape != (4, 4):
            raise ValueError(f"counts must be 4x4, got shape {c.shape}")
        if np.any(c < 0):
            raise ValueError("counts must be nonnegative")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    def cell(self, a: float, b: float) -> float:
        i = self.row_angles.index(a)
        j = self.col_angles.index(b)
        return float(self.counts[i, j])


def _correlator(table: CountTable, a: float, b: float) -> tuple[float, float]:
    """E(a, b) and its Poisson variance from the four coincidence cells."""
    ap = (a + 90.0) % 180.0
    bp = (b + 90.0) % 180.0
    same = table.cell(a, b) + table.cell(ap, bp)
    diff = table.cell(a, bp) + table.cell(ap, b)
    total = same + diff
    if total <= 0:
        raise ValueError(f"no counts for correlator at ({a}, {b})")
    e = (same - diff) / total
    var = ((1.0 - e) ** 2 * same + (1.0 + e) ** 2 * diff) / total**2
    return e, var


def chsh_s(table: CountTable) -> tuple[float, float]:
    """CHSH S-value and its standard error via Poisson propagation.

    Correlators use a_perp = a+90 deg, b_perp = b+90 deg; the combination
    is -E(0,22.5) + E(0,67.5) + E(45,22.5) + E(45,67.5).  Each of the 16
    cells is treated as an independent Poisson count and the variance is
    propagated per cell (delta method).
    """
    rows = tuple(sorted(a % 180.0 for a in table.row_angles))
    cols = tuple(sorted(b % 180.0 for b in table.col_angles))
    if rows != CHSH_ROW_ANGLES or cols != CHSH_COL_ANGLES:
        raise ValueError(
            "analyzer angles do not match the CHSH convention "
            f"{CHSH_ROW_ANGLES} x {CHSH_COL_ANGLES}: got {rows} x {cols}"
        )
    terms = [
        (-1.0, 0.0, 22.5),
        (+1.0, 0.0, 67.5),
        (+1.0, 45.0, 22.5),
        (+1.0, 45.0, 67.5),
    ]
    s = 0.0
    var = 0.0
    for sign, a, b in terms:
        e, v = _correlator(table, a, b)
        s += sign * e
        var += v
    return s, math.sqrt(var)


def simulate_polarization_counts(
    state: DensityMatrix,
    row_angles: tuple[float, ...],
    col_angles: tuple[float, ...],
    counts_per_setting: int,
    rng: np.random.Generator,
) -> CountTable:
    """Binomially sampled coincidence counts for joint linear analyzers.

    The analyzer at angle t (degrees) projects onto
    cos(t)|0> + sin(t)|1>; each table cell draws
    Binomial(counts_per_setting, Tr[rho P_a x P_b]).
    """
    if state.n_qubits != 2:
        raise ValueError("polarization counts need a two-qubit state")
    counts = np.zeros((4, 4), dtype=np.int64)
    for i, a in enumerate(row_angles):
        for j, b in enumerate(col_angles):
            va = _analyzer_ket(a)
            vb = _analyzer_ket(b)
            v = np.kron(va, vb)
            p = float(np.real(v.conj() @ state.matrix @ v))
            p = min(max(p, 0.0), 1.0)
            counts[i, j] = rng.binomial(counts_per_setting, p)
    return CountTable(tuple(row_angles), tuple(col_angles), counts)


def _analyzer_ket(angle_deg: float) -> np.ndarray:
    t = math.radians(angle_deg)
    return np.array([math.cos(t), math.sin(t)], dtype=complex)
