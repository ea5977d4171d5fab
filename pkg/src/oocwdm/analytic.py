"""Closed-form error probabilities for CCR and PIC receivers on DWDM/OOC links.

Every CCR formula here is half the probability of a threshold-crossing event
built from independent binomial hit counts:

    Pe = 1/2 * P(I0 + sum_j alpha_j * I_j >= S)

with I0 ~ Binomial(N-1, p) for same-channel users, I_j ~ Binomial(N, p) for
each adjacent channel j, and p = W^2 / (2F). All terms are nonnegative, so
sums are accumulated in the log domain and never underflow. Interferer
coefficients are exact fractions and threshold comparisons are made in
integer arithmetic after clearing denominators.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ._logmath import (
    NEG_INF,
    ceil_div,
    log_binom_pmf,
    log_comb,
    log_fraction,
    logsumexp,
    round_half_away,
)
from .ooc import max_cardinality

MAX_INTERFERERS = 8
LN10 = math.log(10.0)


def as_fraction(x: Fraction | int | str | float) -> Fraction:
    """Accept 3/4, "3/4", Fraction(3, 4); floats only if they are exact binary values."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def _check_alpha(alpha: Fraction) -> Fraction:
    alpha = as_fraction(alpha)
    if not 0 < alpha <= 1:
        raise ValueError(f"interferer coefficient must lie in (0, 1], got {alpha}")
    return alpha


@dataclass(frozen=True)
class CcrConfig:
    F: int
    W: int
    N: int
    S: int
    strict: bool = True

    def __post_init__(self) -> None:
        if self.F < 2 or self.W < 2:
            raise ValueError(f"need F >= 2 and W >= 2, got F={self.F}, W={self.W}")
        if self.N < 1:
            raise ValueError(f"need at least one active user, got N={self.N}")
        if self.S < 1:
            raise ValueError(f"threshold must be positive, got S={self.S}")
        if self.W * self.W >= 2 * self.F:
            raise ValueError(f"hit probability W^2/(2F) must be < 1 (F={self.F}, W={self.W})")
        if self.strict and self.deviations:
            raise ValueError("strict mode: " + "; ".join(self.deviations))

    @property
    def p(self) -> Fraction:
        return Fraction(self.W * self.W, 2 * self.F)

    @property
    def deviations(self) -> tuple[str, ...]:
        out = []
        if self.S > self.W:
            out.append(f"S={self.S} exceeds W={self.W}")
        if self.N > max_cardinality(self.F, self.W):
            out.append(f"N={self.N} exceeds max cardinality {max_cardinality(self.F, self.W)}")
        return tuple(out)

    @property
    def flags(self) -> tuple[str, ...]:
        if self.strict:
            return ("strict",)
        tags = ["permissive"]
        if self.S > self.W:
            tags.append("S>W")
        if self.N > max_cardinality(self.F, self.W):
            tags.append("N>Nmax")
        return tuple(tags)


@dataclass(frozen=True)
class PicConfig:
    F: int
    W: int
    N: int
    S1: int
    S2: int
    strict: bool = True

    def __post_init__(self) -> None:
        if self.F < 2 or self.W < 2:
            raise ValueError(f"need F >= 2 and W >= 2, got F={self.F}, W={self.W}")
        if self.N < 1:
            raise ValueError(f"need at least one active user, got N={self.N}")
        if self.S1 < 1 or self.S2 < 1:
            raise ValueError(f"thresholds must be positive, got S1={self.S1}, S2={self.S2}")
        if self.W * self.W > self.F:
            raise ValueError(f"hit rate W^2/F must be <= 1 (F={self.F}, W={self.W})")
        if self.strict and self.deviations:
            raise ValueError("strict mode: " + "; ".join(self.deviations))

    @property
    def R(self) -> Fraction:
        return Fraction(self.W * self.W, self.F)

    @property
    def p(self) -> Fraction:
        return self.R / 2

    @property
    def deviations(self) -> tuple[str, ...]:
        out = []
        for name, s in (("S1", self.S1), ("S2", self.S2)):
            if s > self.W:
                out.append(f"{name}={s} exceeds W={self.W}")
        if self.N > max_cardinality(self.F, self.W):
            out.append(f"N={self.N} exceeds max cardinality {max_cardinality(self.F, self.W)}")
        return tuple(out)

    @property
    def flags(self) -> tuple[str, ...]:
        if self.strict:
            return ("strict",)
        return ("permissive",) + tuple(d.split(" ")[0] for d in self.deviations)

    def ccr(self) -> CcrConfig:
        """The conventional receiver with the first-stage threshold."""
        return CcrConfig(self.F, self.W, self.N, self.S1, strict=self.strict)


@dataclass(frozen=True)
class InterferenceProfile:
    alphas: tuple[Fraction, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphas", tuple(_check_alpha(a) for a in self.alphas))

    @classmethod
    def of(cls, *alphas: Fraction | int | str) -> "InterferenceProfile":
        return cls(tuple(as_fraction(a) for a in alphas))

    def __len__(self) -> int:
        return len(self.alphas)

    def __iter__(self):
        return iter(self.alphas)

    def common_denominator(self) -> int:
        return math.lcm(*(a.denominator for a in self.alphas)) if self.alphas else 1


@dataclass(frozen=True)
class BerValue:
    value: float
    log_value: float
    flags: tuple[str, ...] = ()
    exact: Fraction | None = field(default=None, compare=False)

    @property
    def log10_value(self) -> float:
        return self.log_value / LN10

    @classmethod
    def from_log(cls, log_value: float, flags=(), exact=None) -> "BerValue":
        return cls(math.exp(log_value), log_value, tuple(flags), exact)

    @classmethod
    def from_fraction(cls, x: Fraction, flags=()) -> "BerValue":
        return cls(float(x), log_fraction(x), tuple(flags), x)


_LOG_HALF = math.log(0.5)


def _log_params(p: Fraction) -> tuple[float, float]:
    return log_fraction(p), log_fraction(1 - p)


# -- no adjacent channels ----------------------------------------------------

def ber_ccr_no_wdm(cfg: CcrConfig, exact: bool = False) -> BerValue:
    """1/2 * P(Binomial(N-1, p) >= S); zero when S > N-1."""
    N, S = cfg.N, cfg.S
    if exact:
        p = cfg.p
        q = 1 - p
        total = sum(
            (math.comb(N - 1, i) * p**i * q ** (N - 1 - i) for i in range(S, N)),
            Fraction(0),
        )
        return BerValue.from_fraction(total / 2, cfg.flags)
    lp, lq = _log_params(cfg.p)
    terms = [log_binom_pmf(N - 1, i, lp, lq) for i in range(S, N)]
    return BerValue.from_log(_LOG_HALF + logsumexp(terms), cfg.flags)


# -- one adjacent channel ---------------------------------------------------

def _h_lower(S: int, i: int, alpha: Fraction) -> int:
    # smallest integer h with i + alpha*h >= S
    return max(0, ceil_div((S - i) * alpha.denominator, alpha.numerator))


def ber_ccr_one_interferer(cfg: CcrConfig, alpha, exact: bool = False) -> BerValue:
    """Double binomial sum for a single adjacent channel of strength ``alpha``."""
    alpha = _check_alpha(alpha)
    N, S = cfg.N, cfg.S
    if exact:
        p = cfg.p
        q = 1 - p
        total = Fraction(0)
        for i in range(N):
            for h in range(_h_lower(S, i, alpha), N + 1):
                total += math.comb(N, h) * math.comb(N - 1, i) * p ** (i + h) * q ** (2 * N - (h + 1 + i))
        return BerValue.from_fraction(total / 2, cfg.flags)
    lp, lq = _log_params(cfg.p)
    terms = []
    for i in range(N):
        ci = log_comb(N - 1, i)
        for h in range(_h_lower(S, i, alpha), N + 1):
            terms.append(log_comb(N, h) + ci + (i + h) * lp + (2 * N - (h + 1 + i)) * lq)
    return BerValue.from_log(_LOG_HALF + logsumexp(terms), cfg.flags)


# -- several adjacent channels ----------------------------------------------

def _scaled_weights(prof: InterferenceProfile) -> tuple[int, list[int]]:
    L = prof.common_denominator()
    return L, [int(a * L) for a in prof.alphas]


def _log_interference_pmf(
    N: int, weights: Sequence[int], lp: float, lq: float, cap: int
) -> tuple[np.ndarray, np.ndarray]:
    """Log pmf of min(cap, sum_j weights[j] * Binomial(N, p)) as sorted (support, log mass).

    Mass above ``cap`` is pooled at ``cap``; callers only ask for tails at or
    below it. A dense array is used when the support fills enough of 0..cap,
    a dict otherwise.
    """
    pmf = [log_binom_pmf(N, k, lp, lq) for k in range(N + 1)]
    if cap + 1 <= 4 * (N + 1) ** len(weights):
        dist = np.full(cap + 1, NEG_INF)
        dist[0] = 0.0
        for w in weights:
            acc = np.full(cap + 1, NEG_INF)
            for k, lk in enumerate(pmf):
                shift = w * k
                if shift < cap:
                    np.logaddexp(acc[shift:cap], dist[: cap - shift] + lk, out=acc[shift:cap])
                acc[cap] = logsumexp([acc[cap], _log_total(dist[max(0, cap - shift) :]) + lk])
            dist = acc
        return np.arange(cap + 1), dist
    sparse = {0: 0.0}
    for w in weights:
        bins: dict[int, list[float]] = defaultdict(list)
        for t, lt in sparse.items():
            for k, lk in enumerate(pmf):
                bins[min(cap, t + w * k)].append(lt + lk)
        sparse = {t: logsumexp(v) for t, v in bins.items()}
    keys = sorted(sparse)
    return np.array(keys), np.array([sparse[t] for t in keys])


def _log_total(logs: np.ndarray) -> float:
    """log of the sum of exp(logs), with an fsum in the linear domain."""
    if logs.size == 0:
        return NEG_INF
    m = float(logs.max())
    if m == NEG_INF:
        return NEG_INF
    return m + math.log(math.fsum(np.exp(logs - m).tolist()))


def _exact_interference_pmf(N: int, weights: Sequence[int], p: Fraction, cap: int) -> dict[int, Fraction]:
    q = 1 - p
    pmf = [math.comb(N, k) * p**k * q ** (N - k) for k in range(N + 1)]
    dist = {0: Fraction(1)}
    for w in weights:
        acc: dict[int, Fraction] = defaultdict(Fraction)
        for t, pt in dist.items():
            for k, pk in enumerate(pmf):
                acc[min(cap, t + w * k)] += pt * pk
        dist = dict(acc)
    return dist


def ber_ccr_multi_interferer(cfg: CcrConfig, prof: InterferenceProfile, exact: bool = False) -> BerValue:
    """1/2 * P(I0 + sum_j alpha_j I_j >= S) for any number of adjacent channels.

    Every adjacent channel adds nonnegative power. A single-entry profile is
    delegated to :func:`ber_ccr_one_interferer`.
    """
    if not isinstance(prof, InterferenceProfile):
        prof = InterferenceProfile.of(*prof)
    if len(prof) == 0:
        raise ValueError("empty interference profile; use ber_ccr_no_wdm")
    if len(prof) > MAX_INTERFERERS:
        raise ValueError(f"at most {MAX_INTERFERERS} interferers supported, got {len(prof)}")
    if len(prof) == 1:
        return ber_ccr_one_interferer(cfg, prof.alphas[0], exact=exact)

    N, S = cfg.N, cfg.S
    L, weights = _scaled_weights(prof)
    if exact:
        p = cfg.p
        q = 1 - p
        dist = _exact_interference_pmf(N, weights, p, L * S)
        total = Fraction(0)
        for i in range(N):
            need = L * (S - i)
            tail = sum((v for t, v in dist.items() if t >= need), Fraction(0))
            total += math.comb(N - 1, i) * p**i * q ** (N - 1 - i) * tail
        return BerValue.from_fraction(total / 2, cfg.flags)

    lp, lq = _log_params(cfg.p)
    support, logs = _log_interference_pmf(N, weights, lp, lq, L * S)
    terms = []
    for i in range(N):
        lt = _log_total(logs[np.searchsorted(support, L * (S - i)) :])
        if lt != NEG_INF:
            terms.append(log_binom_pmf(N - 1, i, lp, lq) + lt)
    return BerValue.from_log(_LOG_HALF + logsumexp(terms), cfg.flags)


def ber_ccr(cfg: CcrConfig, prof: InterferenceProfile | Iterable = ()) -> BerValue:
    """Dispatch on the number of adjacent channels."""
    if not isinstance(prof, InterferenceProfile):
        prof = InterferenceProfile.of(*prof)
    if len(prof) == 0:
        return ber_ccr_no_wdm(cfg)
    return ber_ccr_multi_interferer(cfg, prof)


# -- PIC, evaluated exactly as printed ---------------------------------------

def _signed_log_pow(x: float, log_abs: float, e: int) -> tuple[int, float]:
    """sign and log|.| of x**e where log_abs = log|x| (0**0 = 1)."""
    if e == 0:
        return 1, 0.0
    if x == 0:
        return 1, NEG_INF
    sign = -1 if (x < 0 and e % 2) else 1
    return sign, e * log_abs


def _pic_interference_level(N: int, n1: int, S1: int, alpha: Fraction, lR: float, l1R: float) -> float:
    """log P_I for a given count n1 of first-stage decisions."""
    terms = []
    for j in range(n1 + 1):
        lo = max(0, round_half_away((S1 - j) / alpha))
        cj = log_comb(N, j)
        for k0 in range(lo, N + 1):
            terms.append(cj + log_comb(N, k0) + (j + k0) * lR + (N + n1 - j - k0) * l1R)
    return lR + logsumexp(terms)


def _pic_bracket(N: int, W: int, S2: int, n2: int, alpha: Fraction, lR: float, l1R: float) -> float:
    terms = []
    hi = round_half_away((S2 + n2 - W) / alpha)
    for k1 in range(0, min(hi, N) + 1):
        terms.append(log_comb(N, k1) + k1 * lR + (N + k1) * l1R)
    lo = max(0, round_half_away((S2 + n2) / alpha))
    for k2 in range(lo, N + 1):
        terms.append(log_comb(N, k2) + k2 * lR + (N + k2) * l1R)
    return logsumexp(terms)


def ber_pic_paper(cfg: PicConfig, alpha) -> BerValue:
    """Two-stage PIC error probability with the published exponents kept verbatim.

    The printed expression is not a normalized probability in general; the
    result carries a ``paper-faithful`` flag plus diagnostics whenever the
    intermediate level P_I exceeds one or the total leaves [0, 1]. Values are
    reported as computed, never clamped.
    """
    alpha = _check_alpha(alpha)
    N, W, S1, S2 = cfg.N, cfg.W, cfg.S1, cfg.S2
    R = cfg.R
    lR = log_fraction(R)
    l1R = log_fraction(1 - R)
    flags = list(cfg.flags) + ["paper-faithful"]

    pos: list[float] = []
    neg: list[float] = []
    pi_above_one = False
    for n1 in range(N):
        lpi = _pic_interference_level(N, n1, S1, alpha, lR, l1R)
        pi = math.exp(lpi)
        one_minus = -math.expm1(lpi)  # 1 - P_I without cancellation near P_I -> 0
        if one_minus < 0:
            pi_above_one = True
        log_one_minus = math.log(abs(one_minus)) if one_minus != 0 else NEG_INF
        base1 = log_comb(N - 1, n1)
        for n2 in range(max(0, W - S2 + 1), N - n1):
            e = N - n1 - n2 - 1
            s_pow, l_pow = _signed_log_pow(one_minus, log_one_minus, e)
            l_pi = 0.0 if n2 == 0 else (n2 * lpi if pi > 0 else NEG_INF)
            lt = base1 + log_comb(N - 1 - n1, n2) + l_pi + l_pow
            lt += _pic_bracket(N, W, S2, n2, alpha, lR, l1R)
            if lt == NEG_INF:
                continue
            (pos if s_pow > 0 else neg).append(lt)

    lp_, ln_ = logsumexp(pos), logsumexp(neg)
    scale = N * _LOG_HALF
    if pi_above_one:
        flags.append("P_I>1")
    if ln_ == NEG_INF:
        log_val = scale + lp_
        value = math.exp(log_val)
    elif lp_ > ln_:
        log_val = scale + lp_ + math.log1p(-math.exp(ln_ - lp_))
        value = math.exp(log_val)
    else:
        value = math.exp(scale + lp_) - math.exp(scale + ln_)
        log_val = float("nan") if value < 0 else (math.log(value) if value > 0 else NEG_INF)
    if not 0 <= value <= 1:
        flags.append("out-of-range")
    return BerValue(value, log_val, tuple(flags))


# -- spectral overlap model -------------------------------------------------

_FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


def _upper_tail(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def captured_power_fraction(fwhm: float, spacing: float, offset: int, filter_bw: float) -> float:
    """Fraction of a Gaussian source spectrum passed by a rectangular filter at 0.

    The source is centred ``offset * spacing`` nm away and has the given FWHM.
    """
    if fwhm <= 0 or spacing <= 0 or filter_bw <= 0:
        raise ValueError("spectral widths and spacing must be positive")
    if offset == 0:
        raise ValueError("offset must be nonzero")
    sigma = fwhm * _FWHM_TO_SIGMA
    mu = abs(offset) * spacing
    half = filter_bw / 2.0
    # both tails on the far side of the peak, so erfc keeps relative accuracy
    if mu >= half:
        return _upper_tail((mu - half) / sigma) - _upper_tail((mu + half) / sigma)
    return 1.0 - _upper_tail((half - mu) / sigma) - _upper_tail((half + mu) / sigma)


def alpha_from_spectrum(
    fwhm: float, spacing: float, offset: int, filter_bw: float, max_denominator: int = 64
) -> Fraction:
    """Captured power fraction snapped to the nearest b/a with a <= ``max_denominator``."""
    frac = captured_power_fraction(fwhm, spacing, offset, filter_bw)
    return Fraction(frac).limit_denominator(max_denominator)
