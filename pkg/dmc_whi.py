"""
Discrete Memoryless WT-HI v1.0 — rate-region geometry and optimizer.

Pipeline:
  channel + product input → MI profiles → four regions → eavesdropper
  complement pieces × receiver pieces → vertex enumeration → max R1,s

Regions live in the (R1, R2) plane in H-representation (A·x ≤ b), the
way polyhedra are usually stored. The optimizer lifts them to the
variables (R1s, R1d, R2) with R1 = R1s + R1d and maximizes R1s on every
piece. All pieces are bounded (R2 is capped above every MI constant), so
the best feasible vertex is the maximum.
"""

import itertools
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

import settings as cfg
from info_measures import (
    MiProfile, ProfilePair, conditional_mutual_information,
    mutual_information, validate_distribution,
)

logger = logging.getLogger(__name__)


# ============================================================
# ENUMS
# ============================================================

class InterferenceClass(Enum):
    VERY_STRONG = "VeryStrong"   # I(X1;Y2) ≥ I(X1;Y1|X2): no secrecy possible
    STRONG = "Strong"
    WEAK = "Weak"
    MIXED = "Mixed"


# ============================================================
# CHANNEL + INPUTS
# ============================================================

@dataclass
class Dmc:
    """Joint transition tensor p(y1,y2|x1,x2), indexed [x1][x2][y1][y2]."""
    kernel: np.ndarray

    def __post_init__(self):
        self.kernel = np.asarray(self.kernel, dtype=float)
        if self.kernel.ndim != 4:
            raise ValueError(f"kernel must be 4-dimensional [x1][x2][y1][y2], got shape {self.kernel.shape}")
        if min(self.kernel.shape) < 1:
            raise ValueError(f"every alphabet needs at least one letter, got shape {self.kernel.shape}")
        if not np.all(np.isfinite(self.kernel)):
            raise ValueError("kernel has non-finite entries")

        negative = np.argwhere(self.kernel < 0)
        if len(negative):
            x1, x2, y1, y2 = negative[0]
            raise ValueError(f"kernel entry [x1={x1}][x2={x2}][y1={y1}][y2={y2}] is negative")

        sums = self.kernel.sum(axis=(2, 3))
        bad = np.argwhere(np.abs(sums - 1.0) > cfg.PROB_TOL)
        if len(bad):
            x1, x2 = bad[0]
            raise ValueError(f"kernel slice [x1={x1}][x2={x2}] sums to {sums[x1, x2]!r}, expected 1")

    @property
    def n_x1(self) -> int:
        return self.kernel.shape[0]

    @property
    def n_x2(self) -> int:
        return self.kernel.shape[1]

    @property
    def n_y1(self) -> int:
        return self.kernel.shape[2]

    @property
    def n_y2(self) -> int:
        return self.kernel.shape[3]

    @property
    def receiver_kernel(self) -> np.ndarray:
        """p(y1|x1,x2), shape (n_x1, n_x2, n_y1)."""
        return self.kernel.sum(axis=3)

    @property
    def eavesdropper_kernel(self) -> np.ndarray:
        """p(y2|x1,x2), shape (n_x1, n_x2, n_y2)."""
        return self.kernel.sum(axis=2)

    @classmethod
    def from_marginals(cls, receiver: np.ndarray, eavesdropper: np.ndarray) -> "Dmc":
        """Channel whose two outputs are conditionally independent given (x1, x2)."""
        receiver = np.asarray(receiver, dtype=float)
        eavesdropper = np.asarray(eavesdropper, dtype=float)
        return cls(receiver[:, :, :, None] * eavesdropper[:, :, None, :])


@dataclass(frozen=True)
class ProductInput:
    """p(x1)·p(x2)."""
    px1: Tuple[float, ...]
    px2: Tuple[float, ...]

    def __post_init__(self):
        validate_distribution(self.px1, name="px1")
        validate_distribution(self.px2, name="px2")

    @classmethod
    def uniform(cls, ch: Dmc) -> "ProductInput":
        return cls(tuple([1.0 / ch.n_x1] * ch.n_x1), tuple([1.0 / ch.n_x2] * ch.n_x2))

    def check_dimensions(self, ch: Dmc):
        if len(self.px1) != ch.n_x1 or len(self.px2) != ch.n_x2:
            raise ValueError(
                f"input sizes ({len(self.px1)}, {len(self.px2)}) do not match "
                f"channel alphabets ({ch.n_x1}, {ch.n_x2})"
            )


@dataclass(frozen=True)
class RateTriple:
    r1s: float   # secret rate
    r1d: float   # dummy (bin) rate
    r2: float    # helper rate

    @property
    def r1(self) -> float:
        return self.r1s + self.r1d


# ============================================================
# MI PROFILES
# ============================================================

def _profile(W: np.ndarray, px1: np.ndarray, px2: np.ndarray) -> MiProfile:
    """Five MI values for one output with kernel W[x1, x2, y]."""
    n_x1, n_x2, n_y = W.shape
    joint = px1[:, None, None] * px2[None, :, None] * W

    return MiProfile(
        i1_given_2=conditional_mutual_information(
            [px1[:, None] * W[:, k, :] for k in range(n_x2)], px2),
        i2_given_1=conditional_mutual_information(
            [px2[:, None] * W[j, :, :] for j in range(n_x1)], px1),
        i_sum=mutual_information(joint.reshape(n_x1 * n_x2, n_y)),
        i1_alone=mutual_information(joint.sum(axis=1)),
        i2_alone=mutual_information(joint.sum(axis=0)),
    )


def mi_profile_dmc(ch: Dmc, inputs: ProductInput) -> ProfilePair:
    inputs.check_dimensions(ch)
    px1 = np.asarray(inputs.px1, dtype=float)
    px2 = np.asarray(inputs.px2, dtype=float)
    return ProfilePair(
        receiver=_profile(ch.receiver_kernel, px1, px2),
        eavesdropper=_profile(ch.eavesdropper_kernel, px1, px2),
    )


# ============================================================
# REGIONS (H-representation in the rate plane)
# ============================================================

@dataclass(frozen=True)
class HalfSpace:
    """normal · x ≤ bound, or < bound when strict."""
    normal: Tuple[float, float]
    bound: float
    strict: bool = False

    def flipped(self) -> "HalfSpace":
        """Closure of the complement: normal · x ≥ bound."""
        return HalfSpace(normal=(-self.normal[0], -self.normal[1]), bound=-self.bound)

    def pinches(self, other: "HalfSpace") -> bool:
        """True when self and other only meet on a line."""
        return (self.normal[0] == -other.normal[0] and self.normal[1] == -other.normal[1]
                and self.bound == -other.bound)


_QUADRANT = (
    HalfSpace(normal=(-1.0, 0.0), bound=0.0),
    HalfSpace(normal=(0.0, -1.0), bound=0.0),
)


@dataclass(frozen=True)
class Region:
    """A rate region inside the nonnegative quadrant."""
    name: str
    halfspaces: Tuple[HalfSpace, ...]   # defining constraints, quadrant implied

    @property
    def A(self) -> np.ndarray:
        return np.array([h.normal for h in _QUADRANT + self.halfspaces], dtype=float)

    @property
    def b(self) -> np.ndarray:
        return np.array([h.bound for h in _QUADRANT + self.halfspaces], dtype=float)

    def contains(self, point, abs_tol: float = None) -> bool:
        """Membership honouring the strict inequalities."""
        if abs_tol is None:
            abs_tol = cfg.VERTEX_TOL
        x = np.asarray(point, dtype=float)
        for h in _QUADRANT + self.halfspaces:
            lhs = float(np.dot(h.normal, x))
            if h.strict:
                if not lhs < h.bound:
                    return False
            elif lhs > h.bound + abs_tol:
                return False
        return True

    def vertices(self) -> np.ndarray:
        """Extreme points of the closure, sorted lexicographically."""
        verts = enumerate_vertices(self.A, self.b)
        if len(verts) == 0:
            return verts
        verts = np.unique(np.round(verts, 12), axis=0)
        return verts

    def has_interior(self, cap: float = None) -> bool:
        """Positive area once clipped to a box around all bounds."""
        if any(h.strict for h in self.halfspaces) and not self._strict_feasible():
            return False
        if cap is None:
            cap = max([abs(h.bound) for h in self.halfspaces] + [0.0]) + cfg.R2_CAP_MARGIN
        box = (HalfSpace((1.0, 0.0), cap), HalfSpace((0.0, 1.0), cap))
        clipped = Region(self.name, self.halfspaces + box)
        verts = clipped.vertices()
        if len(verts) < 3:
            return False
        centre = verts.mean(axis=0)
        order = np.argsort(np.arctan2(verts[:, 1] - centre[1], verts[:, 0] - centre[0]))
        x, y = verts[order, 0], verts[order, 1]
        area = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
        return area > cfg.VERTEX_TOL

    def _strict_feasible(self) -> bool:
        # A strict upper bound at or below zero on a quadrant axis leaves nothing
        for h in self.halfspaces:
            if h.strict and h.bound <= 0 and min(h.normal) >= 0 and max(h.normal) > 0:
                return False
        return True


@dataclass(frozen=True)
class RegionSet:
    r1_mac: Region   # receiver decodes both codewords
    r1_s: Region     # receiver treats the helper as noise
    r2_mac: Region   # eavesdropper decodes both codewords
    r2_s: Region     # eavesdropper treats the helper as noise

    @property
    def receiver(self) -> Tuple[Region, Region]:
        return self.r1_mac, self.r1_s

    @property
    def eavesdropper(self) -> Tuple[Region, Region]:
        return self.r2_mac, self.r2_s


def build_regions(pair: ProfilePair) -> RegionSet:
    """
    Receiver regions are closed; eavesdropper regions keep their strict
    inequalities as flags. The optimizer works on closures of both.
    """
    r, e = pair.receiver, pair.eavesdropper

    r1_mac = Region("r1_mac", (
        HalfSpace((1.0, 0.0), r.i1_given_2),
        HalfSpace((0.0, 1.0), r.i2_given_1),
        HalfSpace((1.0, 1.0), r.i_sum),
    ))
    r1_s = Region("r1_s", (
        HalfSpace((1.0, 0.0), r.i1_alone),
        HalfSpace((0.0, -1.0), -r.i2_given_1),
    ))
    r2_mac = Region("r2_mac", (
        HalfSpace((1.0, 0.0), e.i1_given_2, strict=True),
        HalfSpace((0.0, 1.0), e.i2_given_1, strict=True),
        HalfSpace((1.0, 1.0), e.i_sum, strict=True),
    ))
    r2_s = Region("r2_s", (
        HalfSpace((1.0, 0.0), e.i1_alone, strict=True),
        HalfSpace((0.0, -1.0), -e.i2_given_1, strict=True),
    ))
    return RegionSet(r1_mac=r1_mac, r1_s=r1_s, r2_mac=r2_mac, r2_s=r2_s)


def eavesdropper_complement(regions: RegionSet) -> List[Tuple[HalfSpace, ...]]:
    """
    Closed pieces covering the rate pairs outside R2^MAC ∪ R2^S:
    (C1 ∪ C2 ∪ C3) ∩ (D1 ∪ D2), one flipped constraint from each region.

    C2 ∩ D2 squeezes R2 onto I(X2;Y2|X1) exactly; that line is outside
    both eavesdropper regions only through their strict inequalities and
    has no interior, so it is left out.
    """
    mac, single = regions.eavesdropper
    pieces = []
    for h_mac, h_s in itertools.product(mac.halfspaces, single.halfspaces):
        c, d = h_mac.flipped(), h_s.flipped()
        if c.pinches(d):
            continue
        pieces.append((c, d))
    return pieces


# ============================================================
# VERTEX ENUMERATION
# ============================================================

def enumerate_vertices(A: np.ndarray, b: np.ndarray, tol: float = None) -> np.ndarray:
    """
    Vertices of {x : A x ≤ b} by intersecting every d-subset of
    constraint planes and keeping the feasible intersection points.
    Returns an array of shape (k, d); k = 0 when the set is empty or has
    no vertex.
    """
    if tol is None:
        tol = cfg.VERTEX_TOL
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, d = A.shape
    if m < d:
        return np.empty((0, d))

    combos = np.array(list(itertools.combinations(range(m), d)))
    M = A[combos]
    rhs = b[combos]

    nonsingular = np.abs(np.linalg.det(M)) > cfg.DET_TOL
    if not np.any(nonsingular):
        return np.empty((0, d))

    X = np.linalg.solve(M[nonsingular], rhs[nonsingular][..., None])[..., 0]
    feasible = np.all(A @ X.T <= b[:, None] + tol, axis=0)
    return X[feasible]


def _lift_receiver(h: HalfSpace) -> Tuple[float, float, float]:
    # (R1, R2) → (R1s, R1d, R2) with R1 = R1s + R1d
    return (h.normal[0], h.normal[0], h.normal[1])


def _lift_eavesdropper(h: HalfSpace) -> Tuple[float, float, float]:
    # (R1d, R2) → (R1s, R1d, R2)
    return (0.0, h.normal[0], h.normal[1])


def _piece_system(receiver: Region, eve_piece: Sequence[HalfSpace], cap: float):
    rows = [
        ((-1.0, 0.0, 0.0), 0.0),   # R1s ≥ 0
        ((0.0, -1.0, 0.0), 0.0),   # R1d ≥ 0
        ((0.0, 0.0, -1.0), 0.0),   # R2 ≥ 0
        ((0.0, 0.0, 1.0), cap),    # R2 cap
    ]
    rows += [(_lift_receiver(h), h.bound) for h in receiver.halfspaces]
    rows += [(_lift_eavesdropper(h), h.bound) for h in eve_piece]
    A = np.array([r[0] for r in rows], dtype=float)
    b = np.array([r[1] for r in rows], dtype=float)
    return A, b


def _r2_cap(pair: ProfilePair) -> float:
    constants = list(pair.receiver.as_dict().values()) + list(pair.eavesdropper.as_dict().values())
    return max(constants) + cfg.R2_CAP_MARGIN


def _snap(x: float) -> float:
    return 0.0 if abs(x) < cfg.MI_CLAMP_TOL else float(x)


# ============================================================
# REGION-OPTIMIZED SECRECY RATE
# ============================================================

def theorem1_rate_fixed_input(pair: ProfilePair) -> Tuple[float, RateTriple]:
    """
    Supremum of R1s = R1 − R1d over
      (R1, R2)  in  closure(R1^MAC ∪ R1^S)
      (R1d, R2) outside R2^MAC ∪ R2^S
    and one triple attaining it.
    """
    regions = build_regions(pair)
    cap = _r2_cap(pair)

    best_value = -np.inf
    best_vertex = None

    for receiver in regions.receiver:
        for piece in eavesdropper_complement(regions):
            A, b = _piece_system(receiver, piece, cap)
            verts = enumerate_vertices(A, b)
            if len(verts) == 0:
                continue
            j = int(np.argmax(verts[:, 0]))
            if verts[j, 0] > best_value:
                best_value = float(verts[j, 0])
                best_vertex = verts[j]

    if best_vertex is None or best_value <= cfg.MI_CLAMP_TOL:
        if best_vertex is None:
            return 0.0, RateTriple(0.0, 0.0, 0.0)
        return 0.0, RateTriple(0.0, _snap(best_vertex[1]), _snap(best_vertex[2]))

    triple = RateTriple(_snap(best_vertex[0]), _snap(best_vertex[1]), _snap(best_vertex[2]))
    return triple.r1s, triple


def strong_formula(pair: ProfilePair) -> float:
    """min[I(X1,X2;Y1) − I(X1,X2;Y2), I(X1;Y1|X2) − I(X1;Y2)]⁺"""
    r, e = pair.receiver, pair.eavesdropper
    return max(min(r.i_sum - e.i_sum, r.i1_given_2 - e.i1_alone), 0.0)


def weak_formula(pair: ProfilePair) -> float:
    """max(Δ1, Δ2)⁺ with Δ1 = I(X1;Y1|X2) − I(X1;Y2|X2), Δ2 = I(X1;Y1) − I(X1;Y2)"""
    r, e = pair.receiver, pair.eavesdropper
    delta1 = r.i1_given_2 - e.i1_given_2
    delta2 = r.i1_alone - e.i1_alone
    return max(delta1, delta2, 0.0)


# ============================================================
# SEARCH OVER PRODUCT INPUTS
# ============================================================

def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Nonnegative integer vectors summing to total, lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def simplex_lattice(size: int, resolution: int) -> List[Tuple[float, ...]]:
    """Distributions over `size` letters with step 1/resolution."""
    if resolution < 1:
        raise ValueError(f"grid resolution must be >= 1, got {resolution}")
    return [tuple(k / resolution for k in comp) for comp in _compositions(resolution, size)]


@dataclass
class DmcRateResult:
    rate_bits: float
    inputs: ProductInput
    triple: RateTriple
    profiles: ProfilePair
    evaluated: List[ProfilePair] = field(default_factory=list, repr=False)

    def as_record(self, interference_class: Optional[InterferenceClass] = None) -> dict:
        return {
            "rate_bits": self.rate_bits,
            "px1": list(self.inputs.px1),
            "px2": list(self.inputs.px2),
            "r1s": self.triple.r1s,
            "r1d": self.triple.r1d,
            "r2": self.triple.r2,
            "class": interference_class.value if interference_class else None,
        }


def theorem1_rate(ch: Dmc, grid_resolution: int = None, threads: int = 1) -> DmcRateResult:
    """
    Best region-optimized secrecy rate over a product-input lattice.
    Ties go to the first input in lexicographic (px1, px2) order.
    """
    if grid_resolution is None:
        grid_resolution = cfg.DEFAULT_GRID_RESOLUTION

    grid = [
        ProductInput(px1, px2)
        for px1 in simplex_lattice(ch.n_x1, grid_resolution)
        for px2 in simplex_lattice(ch.n_x2, grid_resolution)
    ]
    logger.info(f"Rate search: {len(grid)} product inputs at resolution {grid_resolution}")

    def evaluate(inp: ProductInput):
        pair = mi_profile_dmc(ch, inp)
        rate, triple = theorem1_rate_fixed_input(pair)
        return pair, rate, triple

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(evaluate, grid))
    else:
        results = [evaluate(inp) for inp in grid]

    best_idx = 0
    for i, (_, rate, _) in enumerate(results):
        if rate > results[best_idx][1]:
            best_idx = i

    pair, rate, triple = results[best_idx]
    best = DmcRateResult(
        rate_bits=rate,
        inputs=grid[best_idx],
        triple=triple,
        profiles=pair,
        evaluated=[r[0] for r in results],
    )
    logger.info(f"Best rate {rate:.6f} bits at px1={best.inputs.px1}, px2={best.inputs.px2}")
    return best


# ============================================================
# INTERFERENCE CLASSIFICATION
# ============================================================

@dataclass(frozen=True)
class InterferenceReport:
    interference_class: InterferenceClass
    samples: int
    certified_over_samples: bool = True   # never a proof for all product inputs

    def as_record(self) -> dict:
        return {
            "class": self.interference_class.value,
            "samples": self.samples,
            "certified_over_samples": self.certified_over_samples,
        }


def classify_profiles(pairs: Sequence[ProfilePair]) -> InterferenceReport:
    """Class that holds at every tested profile pair; VeryStrong > Strong > Weak > Mixed."""
    if not pairs:
        raise ValueError("classification needs at least one input distribution")
    tol = cfg.CLASSIFY_TOL

    very_strong = all(p.eavesdropper.i1_alone >= p.receiver.i1_given_2 - tol for p in pairs)
    strong = all(
        p.receiver.i1_given_2 <= p.eavesdropper.i1_given_2 + tol
        and p.eavesdropper.i2_given_1 <= p.receiver.i2_given_1 + tol
        for p in pairs
    )
    weak = all(
        p.receiver.i1_given_2 >= p.eavesdropper.i1_given_2 - tol
        and p.eavesdropper.i2_given_1 >= p.receiver.i2_given_1 - tol
        for p in pairs
    )

    if very_strong:
        cls = InterferenceClass.VERY_STRONG
    elif strong:
        cls = InterferenceClass.STRONG
    elif weak:
        cls = InterferenceClass.WEAK
    else:
        cls = InterferenceClass.MIXED

    logger.debug(f"Interference class {cls.value} over {len(pairs)} inputs")
    return InterferenceReport(interference_class=cls, samples=len(pairs))


def classify_interference(ch: Dmc, inputs: Sequence[ProductInput]) -> InterferenceReport:
    if not inputs:
        raise ValueError("classification needs at least one input distribution")
    return classify_profiles([mi_profile_dmc(ch, inp) for inp in inputs])


def sample_inputs(ch: Dmc, count: int, seed: int = None) -> List[ProductInput]:
    """Uniform input followed by count−1 Dirichlet(1) draws."""
    if count < 1:
        raise ValueError(f"sample count must be >= 1, got {count}")
    if seed is None:
        seed = cfg.DEFAULT_CLASSIFY_SEED
    rng = np.random.default_rng(seed)

    inputs = [ProductInput.uniform(ch)]
    for _ in range(count - 1):
        px1 = rng.dirichlet(np.ones(ch.n_x1))
        px2 = rng.dirichlet(np.ones(ch.n_x2))
        inputs.append(ProductInput(tuple(px1 / px1.sum()), tuple(px2 / px2.sum())))
    return inputs


# ============================================================
# CHANNEL FILES
# ============================================================

def channel_from_dict(data: dict) -> Dmc:
    if not isinstance(data, dict):
        raise ValueError(f"channel file must hold a JSON object, got {type(data).__name__}")
    for key in ("nx1", "nx2", "ny1", "ny2", "kernel"):
        if key not in data:
            raise ValueError(f"channel file is missing {key!r}")

    sizes = []
    for key in ("nx1", "nx2", "ny1", "ny2"):
        try:
            sizes.append(int(data[key]))
        except (TypeError, ValueError):
            raise ValueError(f"channel size {key!r} must be an integer, got {data[key]!r}") from None
    declared = tuple(sizes)
    try:
        kernel = np.array(data["kernel"], dtype=float)
    except (TypeError, ValueError) as e:
        raise ValueError(f"kernel is not a rectangular numeric array: {e}") from None

    if kernel.shape != declared:
        raise ValueError(f"kernel shape {kernel.shape} does not match declared sizes {declared}")
    return Dmc(kernel)


def load_channel(path) -> Dmc:
    """Read and validate a channel JSON file."""
    path = Path(path)
    with open(path) as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"{path}: not valid JSON ({e})") from None
    ch = channel_from_dict(data)
    logger.info(f"Loaded channel {path.name}: X1={ch.n_x1}, X2={ch.n_x2}, Y1={ch.n_y1}, Y2={ch.n_y2}")
    return ch


def channel_to_dict(ch: Dmc) -> dict:
    return {
        "nx1": ch.n_x1,
        "nx2": ch.n_x2,
        "ny1": ch.n_y1,
        "ny2": ch.n_y2,
        "kernel": ch.kernel.tolist(),
    }


def channel_to_json(ch: Dmc) -> str:
    """Inverse of load_channel."""
    return json.dumps(channel_to_dict(ch), indent=2)
