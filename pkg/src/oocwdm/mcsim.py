"""Chip-synchronous simulation and exhaustive enumeration of the receiver models.

Nothing in here uses the closed forms of :mod:`oocwdm.analytic`; the
enumerations work from the joint distribution of hit counts and the
simulator from individual user bits and hits, so both act as independent
oracles for the analytic engine.

Interference mechanism shared by every routine: each user sends a 1 with
probability 1/2, and a user's codeword lands a pulse on another user's
codeword ("hit") with probability R = W^2/F. A hit only counts when the
interfering user's bit is 1, which gives the per-user rate p = R/2 used by
the CCR formulas.

For the PIC receiver the hit between the desired user and an undesired
user j is one shared indicator, seen by both j's first-stage decision and
the desired user's cancellation step. Hits between two undesired users and
all hits from adjacent channels are independent indicators.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .analytic import CcrConfig, InterferenceProfile, PicConfig, as_fraction
from .ooc import CodeFamily, correlation_table

Z95 = NormalDist().inv_cdf(0.975)
CHUNK = 1 << 20


class GuardExceeded(ValueError):
    """Enumeration support would be too large."""


# -- confidence intervals -----------------------------------------------------

def wilson_interval(errors: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = errors / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, min(center - half, phat)), min(1.0, max(center + half, phat))


@dataclass(frozen=True)
class BerEstimate:
    errors: int
    trials: int
    ber: float
    ci95_low: float
    ci95_high: float
    seed: int

    @classmethod
    def from_counts(cls, errors: int, trials: int, seed: int) -> "BerEstimate":
        lo, hi = wilson_interval(errors, trials)
        return cls(errors, trials, errors / trials, lo, hi, seed)

    def interval(self, z: float = 3.0) -> tuple[float, float]:
        return wilson_interval(self.errors, self.trials, z)

    def contains(self, value: float, z: float = 3.0) -> bool:
        lo, hi = self.interval(z)
        return lo <= value <= hi


# -- exact enumeration ----------------------------------------------------------

def _int_pmf(n: int, num: int, den: int) -> list[int]:
    """Numerators of Binomial(n, num/den) over the common denominator den**n."""
    return [math.comb(n, k) * num**k * (den - num) ** (n - k) for k in range(n + 1)]


def enumerate_ccr_exact(
    cfg: CcrConfig, prof: InterferenceProfile | Sequence = (), max_users: int = 12, max_interferers: int = 4
) -> Fraction:
    """Half the mass of {I0 + sum_j alpha_j I_j >= S}, summed term by term over the joint support.

    Each joint outcome's probability is an integer over a common power of the
    denominator of p, so the sum is exact.
    """
    if not isinstance(prof, InterferenceProfile):
        prof = InterferenceProfile.of(*prof)
    if cfg.N > max_users:
        raise GuardExceeded(f"N={cfg.N} exceeds enumeration guard {max_users}")
    if len(prof) > max_interferers:
        raise GuardExceeded(f"{len(prof)} interferers exceed enumeration guard {max_interferers}")
    N, S = cfg.N, cfg.S
    p = cfg.p
    num, den = p.numerator, p.denominator
    L = prof.common_denominator()
    weights = [int(a * L) for a in prof.alphas]

    own = _int_pmf(N - 1, num, den)
    adj = _int_pmf(N, num, den)
    supports = [range(N)] + [range(N + 1)] * len(weights)
    mass = 0
    for outcome in itertools.product(*supports):
        i0, rest = outcome[0], outcome[1:]
        if L * i0 + sum(w * k for w, k in zip(weights, rest)) >= L * S:
            term = own[i0]
            for k in rest:
                term *= adj[k]
            mass += term
    return Fraction(mass, 2 * den ** (N - 1 + N * len(weights)))


def _binom(n: int, r: Fraction) -> list[Fraction]:
    q = 1 - r
    return [math.comb(n, k) * r**k * q ** (n - k) for k in range(n + 1)]


def _weighted_sum_pmf(parts: Sequence[tuple[int, list[Fraction]]]) -> dict[int, Fraction]:
    dist = {0: Fraction(1)}
    for w, pmf in parts:
        nxt: dict[int, Fraction] = {}
        for t, pt in dist.items():
            for k, pk in enumerate(pmf):
                if pk:
                    nxt[t + w * k] = nxt.get(t + w * k, 0) + pt * pk
        dist = nxt
    return dist


def _tail(dist: dict[int, Fraction]):
    """P(T >= x) as a function of integer x."""
    keys = sorted(dist)
    cum: dict[int, Fraction] = {}
    acc = Fraction(0)
    for t in reversed(keys):
        acc += dist[t]
        cum[t] = acc

    def tail(x: int) -> Fraction:
        for t in keys:
            if t >= x:
                return cum[t]
        return Fraction(0)

    return tail


def enumerate_pic_exact(
    cfg: PicConfig, alpha=None, bit: int | None = None, max_users: int = 16, max_states: int = 4096
) -> Fraction:
    """Exact error probability of the two-stage PIC receiver.

    ``alpha`` is None (no adjacent channel), one rational, or an
    :class:`InterferenceProfile`. Each adjacent channel carries N users.
    With ``bit`` set, returns P(error | desired bit = bit) instead.
    Enumeration runs over the target bit, the number A of active undesired
    users, the number of active users in every adjacent channel, and then
    the first-stage outcomes of the undesired users, which are independent
    given those counts.
    """
    if alpha is None:
        prof = InterferenceProfile()
    elif isinstance(alpha, InterferenceProfile):
        prof = alpha
    else:
        prof = InterferenceProfile.of(as_fraction(alpha))
    N, W, S1, S2 = cfg.N, cfg.W, cfg.S1, cfg.S2
    if N > max_users:
        raise GuardExceeded(f"N={N} exceeds enumeration guard {max_users}")
    if (N + 1) ** len(prof) > max_states:
        raise GuardExceeded(f"{len(prof)} adjacent channels exceed enumeration guard")
    if bit not in (None, 0, 1):
        raise ValueError(f"bit must be None, 0 or 1, got {bit!r}")
    R = cfg.R
    half = Fraction(1, 2)
    bit_weight = half if bit is None else Fraction(1)
    L = prof.common_denominator()
    weights = [int(a * L) for a in prof.alphas]

    hit_pmf = [_binom(n, R) for n in range(N + 1)]
    bits_pmf = _binom(N, half)
    active_pmf = _binom(N - 1, half)

    total = Fraction(0)
    for dvec in itertools.product(range(N + 1), repeat=len(weights)):
        p_d = Fraction(1)
        for d in dvec:
            p_d *= bits_pmf[d]
        cross_tail = _tail(_weighted_sum_pmf([(w, hit_pmf[d]) for w, d in zip(weights, dvec)]))

        for bk in ((0, 1) if bit is None else (bit,)):
            for A in range(N):
                # first-stage miss of an active user that the target hits
                miss = Fraction(0)
                if A > 0:
                    for m, pm in enumerate(hit_pmf[A - 1]):
                        miss += pm * (1 - cross_tail(L * (S1 - W - bk - m)))
                q_act = R * miss
                # first-stage false alarm of an idle user that the target hits
                fa = Fraction(0)
                for m, pm in enumerate(hit_pmf[A]):
                    fa += pm * cross_tail(L * (S1 - bk - m))
                q_in = R * fa

                xs = _binom(A, q_act)
                ys = _binom(N - 1 - A, q_in)
                err = Fraction(0)
                for x, px in enumerate(xs):
                    if not px:
                        continue
                    for y, py in enumerate(ys):
                        if not py:
                            continue
                        up = cross_tail(L * (S2 - W * bk - x + y))
                        err += px * py * ((1 - up) if bk else up)
                total += p_d * bit_weight * active_pmf[A] * err
    return total


# -- link description -----------------------------------------------------------

@dataclass(frozen=True)
class ChannelModel:
    """Users sharing one wavelength. ``family`` is only needed in code mode."""

    length: int
    weight: int
    users: int
    family: CodeFamily | None = None
    assignment: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.users < 0:
            raise ValueError("users must be nonnegative")
        if self.family is not None:
            if (self.family.length, self.family.weight) != (self.length, self.weight):
                raise ValueError("family parameters disagree with channel (F, W)")
            assign = self.assignment if self.assignment is not None else tuple(range(self.users))
            if len(assign) != self.users or len(set(assign)) != len(assign):
                raise ValueError("codeword assignment must be injective with one entry per user")
            if any(not 0 <= a < len(self.family) for a in assign):
                raise ValueError(
                    f"{self.users} users need {self.users} codewords, family has {len(self.family)}"
                )
            object.__setattr__(self, "assignment", tuple(assign))

    @classmethod
    def from_family(cls, family: CodeFamily, users: int, assignment=None) -> "ChannelModel":
        return cls(family.length, family.weight, users, family, assignment)

    def codewords(self):
        return [self.family[a] for a in self.assignment]


@dataclass(frozen=True)
class LinkModel:
    target: ChannelModel
    interferers: tuple[tuple[ChannelModel, Fraction], ...] = ()
    mode: str = "model"

    def __post_init__(self) -> None:
        if self.mode not in ("model", "code"):
            raise ValueError(f"mode must be 'model' or 'code', got {self.mode!r}")
        fixed = []
        for ch, a in self.interferers:
            a = as_fraction(a)
            if not 0 < a <= 1:
                raise ValueError(f"interferer coefficient must lie in (0, 1], got {a}")
            if (ch.length, ch.weight) != (self.target.length, self.target.weight):
                raise ValueError("all channels must use the same (F, W)")
            fixed.append((ch, a))
        object.__setattr__(self, "interferers", tuple(fixed))
        if self.mode == "code":
            for ch in (self.target, *(c for c, _ in self.interferers)):
                if ch.family is None:
                    raise ValueError("code mode needs a code family on every channel")
        if self.target.weight**2 > self.target.length:
            raise ValueError("hit rate W^2/F exceeds one")

    @classmethod
    def binomial(cls, F: int, W: int, N: int, alphas=(), interferer_users: int | None = None) -> "LinkModel":
        n_adj = N if interferer_users is None else interferer_users
        return cls(
            ChannelModel(F, W, N),
            tuple((ChannelModel(F, W, n_adj), as_fraction(a)) for a in alphas),
            "model",
        )

    @classmethod
    def coded(cls, family: CodeFamily, N: int, alphas=(), interferer_users: int | None = None) -> "LinkModel":
        n_adj = N if interferer_users is None else interferer_users
        return cls(
            ChannelModel.from_family(family, N),
            tuple((ChannelModel.from_family(family, n_adj), as_fraction(a)) for a in alphas),
            "code",
        )

    @property
    def scale(self) -> tuple[int, list[int]]:
        L = math.lcm(*(a.denominator for _, a in self.interferers)) if self.interferers else 1
        return L, [int(a * L) for _, a in self.interferers]


# -- simulation -----------------------------------------------------------------

def _chunk_sizes(trials: int, chunk: int) -> list[int]:
    full, rest = divmod(trials, chunk)
    return [chunk] * full + ([rest] if rest else [])


def _run_chunks(fn, trials: int, seed: int, chunk: int, workers: int) -> int:
    sizes = _chunk_sizes(trials, chunk)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(np.random.Generator(np.random.PCG64(ss)), n) for ss, n in zip(streams, sizes)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            counts = list(pool.map(lambda job: fn(*job), jobs))
    else:
        counts = [fn(*job) for job in jobs]
    return int(sum(counts))


def _ccr_model_chunk(link: LinkModel, S: int):
    F, W, N = link.target.length, link.target.weight, link.target.users
    R = W * W / F
    L, weights = link.scale

    # each user's hit is Bern(1/2) bit times Bern(R) position, so the per-channel
    # count is Binomial(users, R/2); drawing it directly is the same distribution
    p = R / 2

    def run(rng: np.random.Generator, n: int) -> int:
        b = rng.integers(0, 2, n)
        z = L * (W * b + rng.binomial(max(N - 1, 0), p, n))
        for (ch, _), w in zip(link.interferers, weights):
            z += w * rng.binomial(ch.users, p, n)
        return int(np.count_nonzero((z >= L * S) != (b == 1)))

    return run


def _pic_model_chunk(link: LinkModel, S1: int, S2: int):
    F, W, N = link.target.length, link.target.weight, link.target.users
    R = W * W / F
    L, weights = link.scale
    K = N - 1

    def cross(rng, dvecs, shape):
        t = np.zeros(shape, dtype=np.int64)
        for d, w in zip(dvecs, weights):
            dd = d if len(shape) == 1 else d[:, None]
            t += w * rng.binomial(np.broadcast_to(dd, shape), R)
        return t

    def run(rng: np.random.Generator, n: int) -> int:
        bk = rng.integers(0, 2, n)
        B = rng.integers(0, 2, (n, K))
        A = B.sum(axis=1)
        h = (rng.random((n, K)) < R).astype(np.int64)
        dvecs = [rng.binomial(ch.users, 0.5, n) for ch, _ in link.interferers]
        others = rng.binomial(A[:, None] - B, R)
        zj = L * (W * B + bk[:, None] * h + others) + cross(rng, dvecs, (n, K))
        bhat = (zj >= L * S1).astype(np.int64)
        z2 = L * (W * bk + ((B - bhat) * h).sum(axis=1)) + cross(rng, dvecs, (n,))
        return int(np.count_nonzero((z2 >= L * S2) != (bk == 1)))

    return run


def _code_tables(link: LinkModel):
    own = link.target.codewords()
    same = np.array([[correlation_table(a, b) for b in own] for a in own], dtype=np.int64)
    adj = [
        np.array([[correlation_table(a, b) for b in ch.codewords()] for a in own], dtype=np.int64).reshape(
            len(own), ch.users, link.target.length
        )
        for ch, _ in link.interferers
    ]
    return same, adj


def _code_decisions(link: LinkModel, tables, rng, n: int, rows: int):
    """Bits, correlations and L-scaled decision variables Z[:, j] for receivers j < rows."""
    F, N = link.target.length, link.target.users
    L, weights = link.scale
    same, adj = tables
    B = rng.integers(0, 2, (n, N))
    s = rng.integers(0, F, (n, N))
    delta = (s[:, None, :] - s[:, :rows, None]) % F  # (n, rows, N): shift of user u seen by receiver j
    jj = np.arange(rows)[:, None]
    uu = np.arange(N)[None, :]
    corr = same[jj, uu, delta]
    z = L * (B[:, None, :] * corr).sum(axis=2)
    for (ch, _), w, tab in zip(link.interferers, weights, adj):
        d = rng.integers(0, 2, (n, ch.users))
        r = rng.integers(0, F, (n, ch.users))
        dx = (r[:, None, :] - s[:, :rows, None]) % F
        z += w * (d[:, None, :] * tab[jj, np.arange(ch.users)[None, :], dx]).sum(axis=2)
    return B, corr, z


def _ccr_code_chunk(link: LinkModel, S: int):
    tables = _code_tables(link)
    L, _ = link.scale

    def run(rng, n):
        B, _, z = _code_decisions(link, tables, rng, n, 1)
        return int(np.count_nonzero((z[:, 0] >= L * S) != (B[:, 0] == 1)))

    return run


def _pic_code_chunk(link: LinkModel, S1: int, S2: int):
    tables = _code_tables(link)
    L, _ = link.scale
    N = link.target.users

    def run(rng, n):
        B, corr, z = _code_decisions(link, tables, rng, n, N)
        bhat = (z[:, 1:] >= L * S1).astype(np.int64)
        z2 = z[:, 0] - L * (bhat * corr[:, 0, 1:]).sum(axis=1)
        return int(np.count_nonzero((z2 >= L * S2) != (B[:, 0] == 1)))

    return run


def _code_chunk_size(link: LinkModel, rows: int) -> int:
    width = rows * (link.target.users + sum(ch.users for ch, _ in link.interferers))
    return max(1024, (1 << 23) // max(width, 1))


def simulate_ccr(link: LinkModel, S: int, trials: int, seed: int, workers: int = 1) -> BerEstimate:
    """Monte Carlo BER of the conventional correlation receiver.

    Trials are split into fixed-size chunks with independent substreams of
    ``seed``, so the estimate does not depend on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if S < 1:
        raise ValueError("threshold must be positive")
    if link.mode == "model":
        fn, chunk = _ccr_model_chunk(link, S), CHUNK
    else:
        fn, chunk = _ccr_code_chunk(link, S), _code_chunk_size(link, 1)
    errors = _run_chunks(fn, trials, seed, chunk, workers)
    return BerEstimate.from_counts(errors, trials, seed)


def simulate_pic(link: LinkModel, S1: int, S2: int, trials: int, seed: int, workers: int = 1) -> BerEstimate:
    """Monte Carlo BER of the two-stage parallel interference cancellation receiver."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if S1 < 1 or S2 < 1:
        raise ValueError("thresholds must be positive")
    if link.target.users <= 1:
        fn = _ccr_model_chunk(link, S2) if link.mode == "model" else _ccr_code_chunk(link, S2)
        chunk = CHUNK if link.mode == "model" else _code_chunk_size(link, 1)
    elif link.mode == "model":
        fn, chunk = _pic_model_chunk(link, S1, S2), CHUNK // max(1, link.target.users)
    else:
        fn, chunk = _pic_code_chunk(link, S1, S2), _code_chunk_size(link, link.target.users)
    errors = _run_chunks(fn, trials, seed, chunk, workers)
    return BerEstimate.from_counts(errors, trials, seed)


def pic_config_of(link: LinkModel, S1: int, S2: int, strict: bool = False) -> PicConfig:
    t = link.target
    return PicConfig(t.length, t.weight, t.users, S1, S2, strict=strict)
