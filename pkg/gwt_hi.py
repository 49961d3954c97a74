"""
Symmetric Gaussian WT-HI v1.0 — closed-form secrecy rates.

Channel:
  Y1 = X1 + √a·X2 + N1      (intended receiver)
  Y2 = √a·X1 + X2 + N2      (eavesdropper)
with unit-variance noise and average power budgets P̄1 (transmitter),
P̄2 (helping interferer).

Pipeline:
  regime → piecewise rate → power control → sweeps (CSV / JSON)

Key insight: a helper that the intended receiver can decode and cancel,
but the eavesdropper cannot, buys a positive secrecy rate even when the
eavesdropper's direct link is better (a ≥ 1), as long as a < 1 + P2.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar

import settings as cfg
from info_measures import MiProfile, ProfilePair, g

logger = logging.getLogger(__name__)


# ============================================================
# ENUMS
# ============================================================

class Regime(Enum):
    """Interference regime of the symmetric Gaussian channel."""
    VERY_STRONG = "VeryStrong"   # a ≥ 1 + P2: eavesdropper decodes through the noise
    STRONG = "Strong"            # 1 ≤ a < 1 + P2: receiver decodes and cancels the helper
    WEAK = "Weak"                # a < 1: helper treated as noise


# ============================================================
# DATA CLASSES
# ============================================================

def _check_nonnegative(name: str, value: float):
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class GaussianWthi:
    """Channel gain and power budgets."""
    a: float
    p1_max: float
    p2_max: float

    def __post_init__(self):
        self.validate()

    def validate(self):
        _check_nonnegative("a", self.a)
        _check_nonnegative("p1_max", self.p1_max)
        _check_nonnegative("p2_max", self.p2_max)


@dataclass(frozen=True)
class PowerAllocation:
    """Transmit power P1 and interferer power P2 actually used."""
    p1: float
    p2: float

    def __post_init__(self):
        _check_nonnegative("p1", self.p1)
        _check_nonnegative("p2", self.p2)

    def fits(self, ch: GaussianWthi) -> bool:
        return self.p1 <= ch.p1_max and self.p2 <= ch.p2_max


@dataclass(frozen=True)
class SweepRow:
    """One row of a sweep table; field order is the CSV column order."""
    value: float
    rate_bits: float
    baseline_bits: float
    regime: str
    p1: float
    p2: float


# ============================================================
# REGIME + MUTUAL INFORMATION PROFILE
# ============================================================

def classify_regime(a: float, p2: float) -> Regime:
    """VeryStrong iff a ≥ 1+P2; Strong iff 1 ≤ a < 1+P2; Weak iff a < 1."""
    _check_nonnegative("a", a)
    _check_nonnegative("p2", p2)

    if a >= 1 + p2:
        return Regime.VERY_STRONG
    if a >= 1:
        return Regime.STRONG
    return Regime.WEAK


def gaussian_mi_profile(a: float, alloc: PowerAllocation) -> ProfilePair:
    """
    Mutual-information profile of Gaussian codebooks at powers (P1, P2).
    The eavesdropper mirrors the receiver with the gain moved to X1.
    """
    _check_nonnegative("a", a)
    p1, p2 = alloc.p1, alloc.p2

    receiver = MiProfile(
        i1_given_2=g(p1),
        i2_given_1=g(a * p2),
        i_sum=g(p1 + a * p2),
        i1_alone=g(p1 / (1 + a * p2)),
        i2_alone=g(a * p2 / (1 + p1)),
    )
    eavesdropper = MiProfile(
        i1_given_2=g(a * p1),
        i2_given_1=g(p2),
        i_sum=g(a * p1 + p2),
        i1_alone=g(a * p1 / (1 + p2)),
        i2_alone=g(p2 / (1 + a * p1)),
    )
    return ProfilePair(receiver=receiver, eavesdropper=eavesdropper)


# ============================================================
# RATES
# ============================================================

def wiretap_baseline(a: float, p1: float) -> float:
    """Gaussian wiretap secrecy capacity without a helper."""
    _check_nonnegative("a", a)
    _check_nonnegative("p1", p1)
    if a < 1:
        return max(g(p1) - g(a * p1), 0.0)
    return 0.0


def secrecy_rate(a: float, alloc: PowerAllocation) -> float:
    """Piecewise achievable secrecy rate at powers (P1, P2), clamped at 0."""
    p1, p2 = alloc.p1, alloc.p2
    regime = classify_regime(a, p2)

    if regime is Regime.VERY_STRONG:
        rate = 0.0
    elif regime is Regime.STRONG:
        if p1 < p2 and a > 1 + p1:
            rate = g(p1) - g(a * p1 / (1 + p2))
        elif p1 < p2:
            # a ≤ 1 + P1 (boundary included): receiver decodes the helper first
            rate = g(p1 + a * p2) - g(a * p1 + p2)
        else:
            rate = 0.0
    else:
        if p1 > p2:
            rate = g(p1 / (1 + a * p2)) - g(a * p1 / (1 + p2))
        else:
            rate = g(p1) - g(a * p1)

    return max(rate, 0.0)


# ============================================================
# POWER CONTROL
# ============================================================

def optimal_interferer_power(a: float, p1_max: float) -> float:
    """P2* = (√(1+(1+a)P̄1) − 1)/(1+a), the weak-regime helper power."""
    _check_nonnegative("a", a)
    _check_nonnegative("p1_max", p1_max)
    return (math.sqrt(1 + (1 + a) * p1_max) - 1) / (1 + a)


def power_control(ch: GaussianWthi) -> Tuple[PowerAllocation, float]:
    """
    Rate-maximizing powers within the budgets, and the rate they achieve.

    a ≥ 1: hold P1 at a−1 so the receiver can decode the helper first,
           helper at full power; switch both off when P̄2 ≤ a−1.
    a < 1: full transmit power, helper capped at P2*.
    """
    a = ch.a
    if a >= 1:
        if ch.p2_max > a - 1:
            alloc = PowerAllocation(p1=min(ch.p1_max, a - 1), p2=ch.p2_max)
        else:
            alloc = PowerAllocation(p1=0.0, p2=0.0)
    else:
        p2_star = optimal_interferer_power(a, ch.p1_max)
        alloc = PowerAllocation(p1=ch.p1_max, p2=min(ch.p2_max, p2_star))

    rate = secrecy_rate(a, alloc)
    logger.debug(f"Power control a={a:g}: P1={alloc.p1:.4f}, P2={alloc.p2:.4f}, Rs={rate:.6f}")
    return alloc, rate


# ============================================================
# POWER-UNCONSTRAINED LIMITS
# ============================================================

def asymptotic_rate(a: float) -> float:
    """Secrecy rate as P̄1, P̄2 → ∞ with power control."""
    if not math.isfinite(a) or a <= 0:
        raise ValueError(f"asymptotic_rate requires a > 0, got {a}")
    if a >= 1:
        return 0.5 * math.log2(a)
    return math.log2(1 / a)


def wiretap_asymptotic_rate(a: float) -> float:
    """Helper-free wiretap rate as P̄1 → ∞: (1/2)[log2(1/a)]⁺."""
    if not math.isfinite(a) or a <= 0:
        raise ValueError(f"wiretap_asymptotic_rate requires a > 0, got {a}")
    return max(0.5 * math.log2(1 / a), 0.0)


# ============================================================
# SWEEPS
# ============================================================

def _channel_field(variable: str) -> str:
    try:
        return cfg.SWEEP_VARIABLES[variable]
    except KeyError:
        raise ValueError(
            f"Unknown sweep variable {variable!r}, expected one of {sorted(cfg.SWEEP_VARIABLES)}"
        ) from None


def _evaluate(ch: GaussianWthi, value: float, with_power_control: bool) -> SweepRow:
    if with_power_control:
        alloc, rate = power_control(ch)
    else:
        alloc = PowerAllocation(p1=ch.p1_max, p2=ch.p2_max)
        rate = secrecy_rate(ch.a, alloc)

    return SweepRow(
        value=float(value),
        rate_bits=rate,
        baseline_bits=wiretap_baseline(ch.a, ch.p1_max),
        regime=classify_regime(ch.a, alloc.p2).value,
        p1=alloc.p1,
        p2=alloc.p2,
    )


def sweep(
    ch: GaussianWthi,
    variable: str,
    grid: Sequence[float],
    with_power_control: bool = True,
    threads: int = 1,
) -> List[SweepRow]:
    """
    Rate table over one channel parameter, other parameters fixed by ch.
    Rows come back in grid order whatever the thread count.
    """
    field = _channel_field(variable)
    values = [float(v) for v in grid]
    if not values:
        raise ValueError("Sweep grid is empty")
    for v in values:
        _check_nonnegative(f"grid value for {variable}", v)

    channels = [replace(ch, **{field: v}) for v in values]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(
                lambda pair: _evaluate(pair[0], pair[1], with_power_control),
                zip(channels, values),
            ))
    else:
        rows = [_evaluate(c, v, with_power_control) for c, v in zip(channels, values)]

    best = max(rows, key=lambda r: r.rate_bits)
    logger.info(f"Sweep over {variable}: {len(rows)} points, "
                f"max Rs={best.rate_bits:.6f} at {variable}={best.value:g}")
    return rows


def sweep_frame(rows: Sequence[SweepRow]) -> pd.DataFrame:
    """Sweep rows as a DataFrame with the fixed CSV column order."""
    return pd.DataFrame([asdict(r) for r in rows], columns=cfg.SWEEP_COLUMNS)


def refine_peak(
    ch: GaussianWthi,
    variable: str,
    rows: Sequence[SweepRow],
    with_power_control: bool = True,
) -> Tuple[float, float]:
    """
    Golden-section refinement of the sweep maximizer.
    The bracket is the grid argmax and its two neighbours; an argmax on
    the grid boundary is returned as is.
    """
    field = _channel_field(variable)
    if not rows:
        raise ValueError("Cannot refine an empty sweep")

    rates = np.array([r.rate_bits for r in rows])
    i = int(np.argmax(rates))
    if i == 0 or i == len(rows) - 1:
        return rows[i].value, rows[i].rate_bits

    def neg_rate(v: float) -> float:
        return -_evaluate(replace(ch, **{field: max(v, 0.0)}), v, with_power_control).rate_bits

    lo, mid, hi = rows[i - 1].value, rows[i].value, rows[i + 1].value
    try:
        res = minimize_scalar(neg_rate, bracket=(lo, mid, hi), method="golden",
                              tol=cfg.PEAK_REFINE_TOL)
    except ValueError:
        # Flat top: neighbours tie with the argmax
        res = minimize_scalar(neg_rate, bounds=(lo, hi), method="bounded",
                              options={"xatol": cfg.PEAK_REFINE_TOL})

    value, rate = float(res.x), float(-res.fun)
    if rate < rows[i].rate_bits:
        value, rate = rows[i].value, rows[i].rate_bits

    logger.info(f"Refined peak: {variable}={value:.9f}, Rs={rate:.9f}")
    return value, rate
