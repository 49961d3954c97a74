"""
Binning Simulator v1.0 — finite-n ground truth for the WT-HI coding scheme.

Transmitter: 2^{nR1s} bins of 2^{nR1d} codewords each; the message picks
a bin, a codeword is drawn uniformly inside it. Helper: 2^{nR2}
codewords, one drawn uniformly per block. Both codebooks i.i.d. from the
product input.

Metrics:
- Exact equivocation (1/n)H(W|Y2^n) by summing over every y2^n
- Receiver error probability: Monte Carlo estimate with a binomial
  confidence halfwidth, or exhaustive enumeration on tiny instances

Everything is seeded. Monte Carlo trials run in fixed-size blocks, each
block on its own spawned RNG stream, so the worker count never changes
the numbers.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import norm

import settings as cfg
from dmc_whi import Dmc, ProductInput, RateTriple
from info_measures import mutual_information, validate_distribution

logger = logging.getLogger(__name__)


class BudgetExceededError(RuntimeError):
    """An enumeration would exceed settings.SIM_ENUM_BUDGET elementary products."""


# ══════════════════════════════════════════════════════════════════
# DATA STRUCTURES
# ══════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class CodebookSizes:
    num_messages: int   # 2^{nR1s}
    bin_size: int       # 2^{nR1d}, codewords per bin
    helper_size: int    # 2^{nR2}

    def realized_rates(self, n: int) -> RateTriple:
        return RateTriple(
            r1s=math.log2(self.num_messages) / n,
            r1d=math.log2(self.bin_size) / n,
            r2=math.log2(self.helper_size) / n,
        )


@dataclass
class BinnedCodebook:
    """
    codewords:        int array (num_messages, bin_size, n) of X1 letters
    helper_codebook:  int array (helper_size, n) of X2 letters
    helper_input:     p(x2) the codebook was drawn from; the treat-as-noise
                      decoder averages the channel over it (uniform if None)
    target_rates:     requested rates before size rounding; secrecy_gap is
                      measured against target_rates.r1s (realized if None)
    """
    n: int
    codewords: np.ndarray
    helper_codebook: np.ndarray
    helper_input: Optional[Tuple[float, ...]] = None
    seed: Optional[int] = None
    target_rates: Optional[RateTriple] = None

    def __post_init__(self):
        self.codewords = np.asarray(self.codewords, dtype=int)
        self.helper_codebook = np.asarray(self.helper_codebook, dtype=int)

        if self.n < 1:
            raise ValueError(f"block length must be >= 1, got {self.n}")
        if self.codewords.ndim != 3 or self.codewords.shape[2] != self.n:
            raise ValueError(
                f"codewords must have shape (num_messages, bin_size, {self.n}), got {self.codewords.shape}"
            )
        if self.helper_codebook.ndim != 2 or self.helper_codebook.shape[1] != self.n:
            raise ValueError(
                f"helper codebook must have shape (helper_size, {self.n}), got {self.helper_codebook.shape}"
            )
        if min(self.codewords.shape[:2]) < 1 or self.helper_codebook.shape[0] < 1:
            raise ValueError("every codebook needs at least one codeword")
        if self.codewords.min() < 0 or self.helper_codebook.min() < 0:
            raise ValueError("codeword letters must be >= 0")
        if self.helper_input is not None:
            validate_distribution(self.helper_input, name="helper_input")

    @property
    def num_messages(self) -> int:
        return self.codewords.shape[0]

    @property
    def bin_size(self) -> int:
        return self.codewords.shape[1]

    @property
    def helper_size(self) -> int:
        return self.helper_codebook.shape[0]

    @property
    def sizes(self) -> CodebookSizes:
        return CodebookSizes(self.num_messages, self.bin_size, self.helper_size)

    @property
    def realized_rates(self) -> RateTriple:
        return self.sizes.realized_rates(self.n)

    def check_alphabet(self, ch: Dmc):
        if self.codewords.max() >= ch.n_x1:
            raise ValueError(f"codeword letter {self.codewords.max()} outside X1 alphabet of size {ch.n_x1}")
        if self.helper_codebook.max() >= ch.n_x2:
            raise ValueError(f"helper letter {self.helper_codebook.max()} outside X2 alphabet of size {ch.n_x2}")
        if self.helper_input is not None and len(self.helper_input) != ch.n_x2:
            raise ValueError(f"helper_input has {len(self.helper_input)} letters, X2 alphabet has {ch.n_x2}")

    def averaging_input(self, ch: Dmc) -> np.ndarray:
        if self.helper_input is None:
            return np.full(ch.n_x2, 1.0 / ch.n_x2)
        return np.asarray(self.helper_input, dtype=float)


@dataclass(frozen=True)
class PeEstimate:
    pe: float
    halfwidth: float
    trials: int


@dataclass
class SimReport:
    n: int
    realized_r1s: float
    realized_r1d: float
    realized_r2: float
    pe: Optional[float]
    pe_halfwidth: Optional[float]
    equivocation_rate: float
    leakage: float
    secrecy_gap: float
    seed: Optional[int]

    def as_record(self) -> dict:
        record = asdict(self)
        return {k: record[k] for k in cfg.SIM_REPORT_FIELDS}


@dataclass
class ExperimentReport:
    reports: List[SimReport]
    aggregate: Dict[str, Dict[str, float]] = field(default_factory=dict)

    def as_record(self) -> dict:
        return {
            "reports": [r.as_record() for r in self.reports],
            "aggregate": self.aggregate,
        }


# ══════════════════════════════════════════════════════════════════
# SIZES + BUDGET
# ══════════════════════════════════════════════════════════════════

def _rounded_size(n: int, rate: float, name: str) -> int:
    if not math.isfinite(rate) or rate < 0:
        raise ValueError(f"{name} must be finite and >= 0, got {rate}")
    return max(1, int(math.floor(2.0 ** (n * rate) + 0.5)))


def codebook_sizes(n: int, rates: RateTriple) -> CodebookSizes:
    """2^{nR} rounded to the nearest integer, at least 1."""
    if n < 1:
        raise ValueError(f"block length must be >= 1, got {n}")
    return CodebookSizes(
        num_messages=_rounded_size(n, rates.r1s, "r1s"),
        bin_size=_rounded_size(n, rates.r1d, "r1d"),
        helper_size=_rounded_size(n, rates.r2, "r2"),
    )


def check_budget(n_outputs: int, n: int, sizes: CodebookSizes, what: str, budget: int = None) -> int:
    """|Y|^n × messages × bin size × helper words, checked against the budget."""
    if budget is None:
        budget = cfg.SIM_ENUM_BUDGET

    sequences = n_outputs ** n
    words = sizes.num_messages * sizes.bin_size * sizes.helper_size
    cost = sequences * words
    if cost > budget:
        raise BudgetExceededError(
            f"{what}: |Y|^n × codeword combinations = {n_outputs}^{n} × "
            f"({sizes.num_messages} × {sizes.bin_size} × {sizes.helper_size}) = {cost} "
            f"exceeds budget {budget}"
        )
    if cost > budget * cfg.SIM_BUDGET_WARN_FRACTION:
        logger.warning(f"{what}: enumeration cost {cost} uses over half of budget {budget}")
    return cost


# ══════════════════════════════════════════════════════════════════
# CODEBOOK SAMPLING
# ══════════════════════════════════════════════════════════════════

def sample_codebooks(
    ch: Dmc,
    inputs: ProductInput,
    n: int,
    rates: RateTriple,
    seed: int,
    budget: int = None,
) -> BinnedCodebook:
    """Draw both codebooks i.i.d. from px1 and px2; same seed, same codebooks."""
    inputs.check_dimensions(ch)
    sizes = codebook_sizes(n, rates)
    check_budget(ch.n_y2, n, sizes, "sample_codebooks", budget)

    px1 = validate_distribution(inputs.px1, name="px1")
    px2 = validate_distribution(inputs.px2, name="px2")

    rng = np.random.default_rng(seed)
    codewords = rng.choice(ch.n_x1, size=(sizes.num_messages, sizes.bin_size, n), p=px1)
    helper = rng.choice(ch.n_x2, size=(sizes.helper_size, n), p=px2)

    logger.debug(f"Sampled codebooks seed={seed}: {sizes.num_messages} bins × "
                 f"{sizes.bin_size} codewords, {sizes.helper_size} helper words, n={n}")
    return BinnedCodebook(n=n, codewords=codewords, helper_codebook=helper,
                          helper_input=tuple(px2), seed=seed, target_rates=rates)


# ══════════════════════════════════════════════════════════════════
# LIKELIHOODS
# ══════════════════════════════════════════════════════════════════

def _sequence_likelihoods(W: np.ndarray, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """
    p(y^n | x1^n, x2^n) for every output sequence.

    W: kernel [x1, x2, y]; x1, x2: (K, n) letter arrays
    Returns (K, |Y|^n), y^n indexed in C order (first symbol most significant).
    """
    K, n = x1.shape
    out = np.ones((K, 1))
    for t in range(n):
        out = (out[:, :, None] * W[x1[:, t], x2[:, t], :][:, None, :]).reshape(K, -1)
    return out


def _message_output_distribution(W: np.ndarray, cb: BinnedCodebook, message: int) -> np.ndarray:
    """p(y^n | w): average over bin members and helper words."""
    n_y = W.shape[2]
    pairs = cb.bin_size * cb.helper_size
    chunk = max(1, cfg.SIM_CHUNK_ELEMENTS // (n_y ** cb.n))

    x1 = np.repeat(cb.codewords[message], cb.helper_size, axis=0)
    x2 = np.tile(cb.helper_codebook, (cb.bin_size, 1))

    total = np.zeros(n_y ** cb.n)
    for start in range(0, pairs, chunk):
        total += _sequence_likelihoods(W, x1[start:start + chunk], x2[start:start + chunk]).sum(axis=0)
    return total / pairs


# ══════════════════════════════════════════════════════════════════
# EXACT EQUIVOCATION
# ══════════════════════════════════════════════════════════════════

def _empty_report(cb: BinnedCodebook) -> dict:
    realized = cb.realized_rates
    return dict(
        n=cb.n,
        realized_r1s=realized.r1s,
        realized_r1d=realized.r1d,
        realized_r2=realized.r2,
        seed=cb.seed,
    )


def exact_equivocation(ch: Dmc, cb: BinnedCodebook, threads: int = 1, budget: int = None) -> SimReport:
    """
    (1/n)H(W|Y2^n) and (1/n)I(W;Y2^n) for this fixed code, W uniform.
    Rows p(y2^n|w) are built per message and summed exactly over y2^n.
    """
    cb.check_alphabet(ch)
    check_budget(ch.n_y2, cb.n, cb.sizes, "exact_equivocation", budget)
    W2 = ch.eavesdropper_kernel

    messages = range(cb.num_messages)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda w: _message_output_distribution(W2, cb, w), messages))
    else:
        rows = [_message_output_distribution(W2, cb, w) for w in messages]

    joint = np.vstack(rows) / cb.num_messages
    joint /= joint.sum()

    h_w = math.log2(cb.num_messages) / cb.n
    leakage = min(mutual_information(joint) / cb.n, h_w)
    equivocation = h_w - leakage
    requested_r1s = cb.target_rates.r1s if cb.target_rates is not None else h_w

    report = SimReport(
        pe=None,
        pe_halfwidth=None,
        equivocation_rate=equivocation,
        leakage=leakage,
        secrecy_gap=requested_r1s - equivocation,
        **_empty_report(cb),
    )
    logger.debug(f"Exact equivocation seed={cb.seed}: {equivocation:.6f} bits, leakage {leakage:.6f}")
    return report


# ══════════════════════════════════════════════════════════════════
# DECODING + ERROR PROBABILITY
# ══════════════════════════════════════════════════════════════════

def _check_mode(mode: str):
    if mode not in cfg.DECODE_MODES:
        raise ValueError(f"Unknown decode mode {mode!r}, expected one of {cfg.DECODE_MODES}")


def _decode(W1: np.ndarray, cb: BinnedCodebook, mode: str, y: np.ndarray, helper_p: np.ndarray) -> np.ndarray:
    """
    ML message estimates for received sequences y (T, n).
    Ties go to the lowest (message, bin member, helper word) index.
    """
    rows = max(1, cfg.SIM_CHUNK_ELEMENTS // (cb.num_messages * cb.bin_size * cb.helper_size))
    if len(y) > rows:
        return np.concatenate([
            _decode(W1, cb, mode, y[start:start + rows], helper_p)
            for start in range(0, len(y), rows)
        ])

    T, n = y.shape
    x1 = cb.codewords.reshape(-1, n)          # row k = w·bin_size + b
    x2 = cb.helper_codebook

    if mode == "joint_ml":
        like = np.ones((T, x1.shape[0], x2.shape[0]))
        for t in range(n):
            like *= W1[x1[:, t][None, :, None], x2[:, t][None, None, :], y[:, t][:, None, None]]
        best = np.argmax(like.reshape(T, -1), axis=1)
        return best // (cb.bin_size * cb.helper_size)

    # Helper unknown: decode against the channel averaged over p(x2)
    W_avg = np.einsum("j,ijy->iy", helper_p, W1)
    like = np.ones((T, x1.shape[0]))
    for t in range(n):
        like *= W_avg[x1[:, t][None, :], y[:, t][:, None]]
    return np.argmax(like, axis=1) // cb.bin_size


def _simulate_block(W1: np.ndarray, cb: BinnedCodebook, mode: str, count: int,
                    seed_seq: np.random.SeedSequence, helper_p: np.ndarray) -> int:
    rng = np.random.default_rng(seed_seq)
    w = rng.integers(cb.num_messages, size=count)
    b = rng.integers(cb.bin_size, size=count)
    h = rng.integers(cb.helper_size, size=count)

    x1 = cb.codewords[w, b]                   # (count, n)
    x2 = cb.helper_codebook[h]
    cdf = np.cumsum(W1[x1, x2], axis=2)       # (count, n, |Y1|)
    u = rng.random((count, cb.n, 1))
    y = np.minimum((u >= cdf).sum(axis=2), W1.shape[2] - 1)

    return int(np.sum(_decode(W1, cb, mode, y, helper_p) != w))


def _halfwidth(pe: float, trials: int) -> float:
    z = norm.ppf(0.5 + cfg.SIM_CONFIDENCE / 2)
    return float(z * math.sqrt(pe * (1 - pe) / trials))


def error_probability(
    ch: Dmc,
    cb: BinnedCodebook,
    mode: str = None,
    trials: int = None,
    seed: int = 0,
    threads: int = 1,
) -> PeEstimate:
    """Monte Carlo estimate of the receiver's average error probability."""
    mode = mode or cfg.DEFAULT_DECODE_MODE
    trials = cfg.SIM_DEFAULT_TRIALS if trials is None else trials
    _check_mode(mode)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    cb.check_alphabet(ch)

    W1 = ch.receiver_kernel
    helper_p = cb.averaging_input(ch)

    block = cfg.SIM_TRIAL_BLOCK
    counts = [min(block, trials - start) for start in range(0, trials, block)]
    streams = np.random.SeedSequence(seed).spawn(len(counts))

    def run(job):
        count, stream = job
        return _simulate_block(W1, cb, mode, count, stream, helper_p)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            errors = sum(pool.map(run, zip(counts, streams)))
    else:
        errors = sum(run(job) for job in zip(counts, streams))

    pe = errors / trials
    return PeEstimate(pe=pe, halfwidth=_halfwidth(pe, trials), trials=trials)


def exact_error_probability(ch: Dmc, cb: BinnedCodebook, mode: str = None, budget: int = None) -> float:
    """Pe summed over every message, bin member, helper word and y1^n."""
    mode = mode or cfg.DEFAULT_DECODE_MODE
    _check_mode(mode)
    cb.check_alphabet(ch)
    check_budget(ch.n_y1, cb.n, cb.sizes, "exact_error_probability", budget)

    W1 = ch.receiver_kernel
    n_y, n = W1.shape[2], cb.n
    helper_p = cb.averaging_input(ch)

    # All y1^n in the same C order as _sequence_likelihoods
    y_all = np.indices((n_y,) * n).reshape(n, -1).T
    decided = _decode(W1, cb, mode, y_all, helper_p)

    pe = 0.0
    for w in range(cb.num_messages):
        p_y = _message_output_distribution(W1, cb, w)
        pe += float(p_y[decided != w].sum())
    return pe / cb.num_messages


# ══════════════════════════════════════════════════════════════════
# EXPERIMENTS
# ══════════════════════════════════════════════════════════════════

def simulate(
    ch: Dmc,
    cb: BinnedCodebook,
    mode: str = None,
    trials: int = None,
    seed: int = 0,
    threads: int = 1,
    budget: int = None,
) -> SimReport:
    """Exact equivocation plus Monte Carlo Pe for one codebook pair."""
    report = exact_equivocation(ch, cb, threads=threads, budget=budget)
    estimate = error_probability(ch, cb, mode=mode, trials=trials, seed=seed, threads=threads)
    report.pe = estimate.pe
    report.pe_halfwidth = estimate.halfwidth
    return report


def run_experiment(
    ch: Dmc,
    inputs: ProductInput,
    n: int,
    rates: RateTriple,
    seeds: Sequence[int],
    mode: str = None,
    trials: int = None,
    threads: int = 1,
    budget: int = None,
) -> ExperimentReport:
    """One report per seed plus mean/min/max of every metric."""
    if not seeds:
        raise ValueError("run_experiment needs at least one seed")

    reports = []
    for seed in seeds:
        cb = sample_codebooks(ch, inputs, n, rates, seed, budget=budget)
        reports.append(simulate(ch, cb, mode=mode, trials=trials, seed=seed,
                                threads=threads, budget=budget))

    metrics = ["pe", "equivocation_rate", "leakage", "secrecy_gap"]
    df = pd.DataFrame([asdict(r) for r in reports])[metrics].astype(float)
    stats = df.agg(["mean", "min", "max"])
    aggregate = {m: {s: float(stats.loc[s, m]) for s in stats.index} for m in metrics}

    logger.info(f"Experiment n={n}, {len(seeds)} seeds: "
                f"mean leakage {aggregate['leakage']['mean']:.6f}, "
                f"mean Pe {aggregate['pe']['mean']:.4f}")
    return ExperimentReport(reports=reports, aggregate=aggregate)
