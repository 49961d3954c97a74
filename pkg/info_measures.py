"""
Information Measures — scalar kernels shared by every rate module.

All quantities in bits (log base 2). 0·log 0 := 0.

  g(x)                 Gaussian rate function (1/2)·log2(1+x)
  entropy(p)           Shannon entropy of a probability vector
  mutual_information   I = H(rows) + H(cols) − H(joint) of a joint matrix
"""

import logging
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import entropy as _scipy_entropy

import settings as cfg

logger = logging.getLogger(__name__)


# ============================================================
# SHARED TYPES
# ============================================================

@dataclass(frozen=True)
class MiProfile:
    """The five mutual informations one receiver sees, in bits."""
    i1_given_2: float   # I(X1;Y|X2)
    i2_given_1: float   # I(X2;Y|X1)
    i_sum: float        # I(X1,X2;Y)
    i1_alone: float     # I(X1;Y)
    i2_alone: float     # I(X2;Y)

    def as_dict(self) -> dict:
        return asdict(self)

    def scaled(self, **changes) -> "MiProfile":
        """Copy with some constants replaced."""
        values = self.as_dict()
        values.update(changes)
        return MiProfile(**values)


@dataclass(frozen=True)
class ProfilePair:
    """Receiver (Y1) and eavesdropper (Y2) profiles for one input distribution."""
    receiver: MiProfile
    eavesdropper: MiProfile

    def as_dict(self) -> dict:
        return {
            "receiver": self.receiver.as_dict(),
            "eavesdropper": self.eavesdropper.as_dict(),
        }


# ============================================================
# GAUSSIAN RATE FUNCTION
# ============================================================

def g(x):
    """
    (1/2)·log2(1+x) for x ≥ 0.
    Accepts a scalar or an array; scalars come back as float.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError(f"g() is defined for finite x >= 0, got {x}")
    out = 0.5 * np.log2(1.0 + arr)
    if out.ndim == 0:
        return float(out)
    return out


# ============================================================
# DISTRIBUTIONS
# ============================================================

def validate_distribution(p, tol: float = None, name: str = "distribution") -> np.ndarray:
    """Return p as a float array, or raise ValueError if it is not a pmf."""
    if tol is None:
        tol = cfg.PROB_TOL

    arr = np.asarray(p, dtype=float)
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    if np.any(arr < 0):
        raise ValueError(f"{name} has negative entries (min {arr.min():.3g})")

    total = float(arr.sum())
    if abs(total - 1.0) > tol:
        raise ValueError(f"{name} sums to {total!r}, expected 1 within {tol:g}")
    return arr


def entropy(p) -> float:
    """Shannon entropy in bits."""
    arr = validate_distribution(p, name="probability vector").ravel()
    return float(_scipy_entropy(arr, base=2))


def mutual_information(joint) -> float:
    """
    I(A;B) from a joint matrix p(a,b).
    Rows index A, columns index B.
    """
    arr = validate_distribution(joint, name="joint distribution")
    if arr.ndim != 2:
        raise ValueError(f"joint distribution must be a matrix, got shape {arr.shape}")

    h_rows = float(_scipy_entropy(arr.sum(axis=1), base=2))
    h_cols = float(_scipy_entropy(arr.sum(axis=0), base=2))
    h_joint = float(_scipy_entropy(arr.ravel(), base=2))

    mi = h_rows + h_cols - h_joint
    if mi < 0:
        if mi < -cfg.MI_CLAMP_TOL:
            logger.warning(f"Mutual information {mi:.3e} below clamp tolerance")
        mi = 0.0
    return mi


def conditional_mutual_information(cond_joints, weights) -> float:
    """
    Σ_k w_k · I(joint_k).

    cond_joints: sequence of joint matrices p(a,b | c=k)
    weights:     p(c=k); zero-weight slices are skipped
    """
    total = 0.0
    for joint, w in zip(cond_joints, weights):
        if w <= 0:
            continue
        total += float(w) * mutual_information(joint)
    return total
