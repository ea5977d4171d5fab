import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oocwdm.analytic import (
    CcrConfig,
    InterferenceProfile,
    PicConfig,
    alpha_from_spectrum,
    ber_ccr,
    ber_ccr_multi_interferer,
    ber_ccr_no_wdm,
    ber_ccr_one_interferer,
    ber_pic_paper,
    captured_power_fraction,
)
from oracles import ccr_brute_force, gaussian_capture_trapezoid, no_wdm_by_complement, pic_printed_exact

# frozen from oracles.no_wdm_by_complement(64, 2, 32, 2)
NO_WDM_64_2_32_2 = Fraction(
    5766788952572122138321932482132607426079211553, 45671926166590716193865151022383844364247891968
)
# frozen from oracles.ccr_brute_force(64, 2, 4, 2, [1/2, 1/2]), 100 joint outcomes
MULTI_64_2_4_2 = Fraction(90893357659369, 36028797018963968)
# frozen from oracles.pic_printed_exact(64, 2, 4, 2, 2, 1/2)
PIC_PAPER_64_2_4 = Fraction(
    1159229304747228906703699509375, 2596148429267413814265248164610048
)
# frozen from oracles.gaussian_capture_trapezoid(2.0, 0.8, 1, 0.8), 2e5 panels
CAPTURE_2NM = 0.23998948153582525


def rel(a, b):
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


# -- configs ------------------------------------------------------------------

def test_ccr_config_strict_rules():
    with pytest.raises(ValueError):
        CcrConfig(64, 2, 4, 3)
    with pytest.raises(ValueError):
        CcrConfig(64, 2, 32, 2)
    cfg = CcrConfig(64, 2, 32, 24, strict=False)
    assert cfg.flags == ("permissive", "S>W", "N>Nmax")
    assert cfg.p == Fraction(1, 32)
    with pytest.raises(ValueError):
        CcrConfig(8, 4, 2, 1, strict=False)  # W^2/(2F) = 1


def test_profile_domain():
    with pytest.raises(ValueError):
        InterferenceProfile.of("0")
    with pytest.raises(ValueError):
        InterferenceProfile.of("5/4")
    assert InterferenceProfile.of("1/2", 1).alphas == (Fraction(1, 2), Fraction(1))


# -- no WDM -------------------------------------------------------------------

def test_no_wdm_single_user_is_zero():
    v = ber_ccr_no_wdm(CcrConfig(64, 2, 1, 1))
    assert v.value == 0 and v.log_value == -math.inf


def test_no_wdm_two_users_hand_value():
    v = ber_ccr_no_wdm(CcrConfig(64, 2, 2, 1))
    assert rel(v.value, 1 / 64) < 1e-15
    assert ber_ccr_no_wdm(CcrConfig(64, 2, 2, 1), exact=True).exact == Fraction(1, 64)


def test_no_wdm_full_load():
    v = ber_ccr_no_wdm(CcrConfig(64, 2, 31, 2))
    assert 0 < v.value < 0.5
    assert no_wdm_by_complement(64, 2, 32, 2) == NO_WDM_64_2_32_2
    v32 = ber_ccr_no_wdm(CcrConfig(64, 2, 32, 2, strict=False))
    assert rel(v32.value, NO_WDM_64_2_32_2) < 1e-13
    assert ber_ccr_no_wdm(CcrConfig(64, 2, 32, 2, strict=False), exact=True).exact == NO_WDM_64_2_32_2


# -- one interferer -----------------------------------------------------------

def test_one_interferer_hand_value():
    cfg = CcrConfig(16, 2, 2, 2)
    assert ber_ccr_one_interferer(cfg, Fraction(1, 2), exact=True).exact == Fraction(1, 1024)
    assert rel(ber_ccr_one_interferer(cfg, Fraction(1, 2)).value, 1 / 1024) <= 1e-14


@pytest.mark.parametrize("F", [16, 32, 64])
@pytest.mark.parametrize("N", [2, 3, 5, 7])
def test_weak_interferer_recovers_no_wdm(F, N):
    for S in (1, 2):
        cfg = CcrConfig(F, 2, N, S, strict=False)
        base = ber_ccr_no_wdm(cfg).value
        for a in (Fraction(1, N + 1), Fraction(1, 3 * N)):
            assert rel(ber_ccr_one_interferer(cfg, a).value, base) <= 1e-12


def test_interferer_never_helps():
    cfg = CcrConfig(64, 2, 31, 2)
    assert ber_ccr_one_interferer(cfg, Fraction(1, 2)).value >= ber_ccr_no_wdm(cfg).value


@pytest.mark.parametrize("alpha", ["1/4", "1/2", "3/4", "1", "2/3"])
@pytest.mark.parametrize("F, W, N, S", [(16, 2, 4, 2), (32, 3, 5, 2), (64, 2, 9, 1), (64, 3, 6, 3)])
def test_one_interferer_matches_brute_force(F, W, N, S, alpha):
    cfg = CcrConfig(F, W, N, S, strict=False)
    exact = ccr_brute_force(F, W, N, S, [Fraction(alpha)])
    assert ber_ccr_one_interferer(cfg, Fraction(alpha), exact=True).exact == exact
    assert rel(ber_ccr_one_interferer(cfg, Fraction(alpha)).value, exact) <= 1e-12


# -- several interferers ----------------------------------------------------

def test_multi_golden_value():
    assert ccr_brute_force(64, 2, 4, 2, ["1/2", "1/2"]) == MULTI_64_2_4_2
    cfg = CcrConfig(64, 2, 4, 2)
    prof = InterferenceProfile.of("1/2", "1/2")
    assert ber_ccr_multi_interferer(cfg, prof, exact=True).exact == MULTI_64_2_4_2
    assert rel(ber_ccr_multi_interferer(cfg, prof).value, MULTI_64_2_4_2) <= 1e-13


def test_single_entry_profile_is_one_interferer_path():
    cfg = CcrConfig(32, 2, 6, 2)
    a = ber_ccr_multi_interferer(cfg, InterferenceProfile.of("3/4"))
    b = ber_ccr_one_interferer(cfg, Fraction(3, 4))
    assert a.log_value == b.log_value


def test_multi_rejects_empty_and_oversized():
    cfg = CcrConfig(64, 2, 4, 2)
    with pytest.raises(ValueError):
        ber_ccr_multi_interferer(cfg, InterferenceProfile())
    with pytest.raises(ValueError):
        ber_ccr_multi_interferer(cfg, InterferenceProfile.of(*["1/2"] * 9))


@pytest.mark.parametrize("alphas", [["1/4", "3/4"], ["1/3", "1/2", "1"], ["2/5", "1/7"]])
def test_multi_matches_brute_force(alphas):
    cfg = CcrConfig(32, 2, 5, 2)
    exact = ccr_brute_force(32, 2, 5, 2, alphas)
    assert rel(ber_ccr_multi_interferer(cfg, InterferenceProfile.of(*alphas)).value, exact) <= 1e-12


alpha_st = st.fractions(min_value=Fraction(1, 64), max_value=1, max_denominator=64).filter(lambda a: a > 0)


@settings(max_examples=60, deadline=None)
@given(st.lists(alpha_st, min_size=2, max_size=4), st.randoms(use_true_random=False))
def test_multi_permutation_invariant(alphas, rnd):
    cfg = CcrConfig(64, 2, 8, 2)
    shuffled = list(alphas)
    rnd.shuffle(shuffled)
    a = ber_ccr_multi_interferer(cfg, InterferenceProfile(tuple(alphas)))
    b = ber_ccr_multi_interferer(cfg, InterferenceProfile(tuple(shuffled)))
    assert rel(a.value, b.value) <= 1e-13


# -- monotonicity properties ----------------------------------------------------

strict_cfgs = st.sampled_from([(16, 2), (32, 2), (64, 2), (32, 3), (64, 3)]).flatmap(
    lambda fw: st.tuples(
        st.just(fw[0]),
        st.just(fw[1]),
        st.integers(2, max(2, min(12, (fw[0] - 1) // (fw[1] * (fw[1] - 1))))),
        st.integers(1, fw[1]),
    )
)


@settings(max_examples=80, deadline=None)
@given(strict_cfgs, st.lists(alpha_st, max_size=3))
def test_monotone_in_users(c, alphas):
    F, W, N, S = c
    if N + 1 > (F - 1) // (W * (W - 1)):
        N -= 1
    lo = ber_ccr(CcrConfig(F, W, max(N, 1), S), alphas).value
    hi = ber_ccr(CcrConfig(F, W, N + 1, S), alphas).value
    assert hi >= lo * (1 - 1e-12)


@settings(max_examples=80, deadline=None)
@given(strict_cfgs, st.lists(alpha_st, max_size=3))
def test_monotone_in_threshold(c, alphas):
    F, W, N, _ = c
    vals = [ber_ccr(CcrConfig(F, W, N, S), alphas).value for S in range(1, W + 1)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))


@settings(max_examples=80, deadline=None)
@given(strict_cfgs, alpha_st, alpha_st)
def test_monotone_in_alpha(c, a, b):
    F, W, N, S = c
    lo, hi = sorted((a, b))
    cfg = CcrConfig(F, W, N, S)
    assert ber_ccr(cfg, [hi]).value >= ber_ccr(cfg, [lo]).value * (1 - 1e-12)
    assert ber_ccr(cfg, [lo, hi]).value >= ber_ccr(cfg, [lo, lo]).value * (1 - 1e-12)


@settings(max_examples=60, deadline=None)
@given(strict_cfgs, alpha_st, st.integers(0, 3))
def test_more_equal_interferers_never_help(c, a, k):
    F, W, N, S = c
    cfg = CcrConfig(F, W, N, S)
    assert ber_ccr(cfg, [a] * (k + 1)).value >= ber_ccr(cfg, [a] * k).value * (1 - 1e-12)


@settings(max_examples=60, deadline=None)
@given(strict_cfgs, st.lists(alpha_st, max_size=3))
def test_values_in_half_unit_interval(c, alphas):
    F, W, N, S = c
    v = ber_ccr(CcrConfig(F, W, N, S), alphas)
    assert 0 <= v.value <= 0.5
    if v.value > 0:
        assert rel(math.exp(v.log_value), v.value) == 0


# -- dynamic range ------------------------------------------------------------------

@pytest.mark.parametrize(
    "F, W, N, S, alphas",
    [
        (4096, 2, 40, 2, []),  # ~1e-7, strict
        (64, 2, 60, 40, ["1/2"]),  # ~1e-40
        (1024, 2, 300, 150, ["1/4", "1/4"]),  # ~1e-250
        (1024, 2, 400, 300, []),  # below the double range
    ],
)
def test_log_domain_matches_exact(F, W, N, S, alphas):
    cfg = CcrConfig(F, W, N, S, strict=F == 4096)
    v = ber_ccr(cfg, alphas)
    ex = (ber_ccr_no_wdm(cfg, exact=True) if not alphas else ber_ccr_multi_interferer(cfg, alphas, exact=True)).exact
    log_exact = math.log(ex.numerator) - math.log(ex.denominator)
    assert math.isfinite(v.log_value)
    assert abs(v.log_value - log_exact) <= 1e-9 * abs(log_exact) + 1e-12
    if float(ex) >= 1e-300:
        assert rel(v.value, ex) <= 1e-9


# -- PIC as printed ---------------------------------------------------------------

def test_pic_paper_golden():
    assert pic_printed_exact(64, 2, 4, 2, 2, Fraction(1, 2)) == PIC_PAPER_64_2_4
    v = ber_pic_paper(PicConfig(64, 2, 4, 2, 2), Fraction(1, 2))
    assert rel(v.value, PIC_PAPER_64_2_4) <= 1e-12
    assert "paper-faithful" in v.flags


@pytest.mark.parametrize("F, W, N, S1, S2, alpha", [(16, 2, 3, 1, 2, "1/2"), (32, 2, 6, 2, 1, "3/4"), (16, 3, 5, 1, 3, "1/4")])
def test_pic_paper_matches_exact_rational(F, W, N, S1, S2, alpha):
    v = ber_pic_paper(PicConfig(F, W, N, S1, S2, strict=False), Fraction(alpha))
    assert rel(v.value, pic_printed_exact(F, W, N, S1, S2, Fraction(alpha))) <= 1e-12


def test_pic_paper_out_of_range_is_reported_not_clamped():
    cfg = PicConfig(16, 3, 6, 1, 2, strict=False)
    v = ber_pic_paper(cfg, Fraction(1, 4))
    ex = pic_printed_exact(16, 3, 6, 1, 2, Fraction(1, 4))
    assert ex < 0 and v.value < 0
    assert "out-of-range" in v.flags and "P_I>1" in v.flags
    assert math.isnan(v.log_value)


def test_pic_paper_empty_outer_sum():
    # W - S2 + 1 = 2 > N - n1 - 1 for every n1 when N = 2
    v = ber_pic_paper(PicConfig(64, 2, 2, 1, 1), Fraction(1, 2))
    assert v.value == 0


def test_pic_config_rules():
    with pytest.raises(ValueError):
        PicConfig(64, 2, 4, 0, 1)
    with pytest.raises(ValueError):
        PicConfig(64, 2, 4, 3, 1)
    with pytest.raises(ValueError):
        PicConfig(8, 3, 2, 1, 1, strict=False)  # R = 9/8


# -- spectral model -------------------------------------------------------------

def test_alpha_from_spectrum_against_quadrature():
    assert rel(gaussian_capture_trapezoid(2.0, 0.8, 1, 0.8), CAPTURE_2NM) < 1e-12
    assert rel(captured_power_fraction(2.0, 0.8, 1, 0.8), CAPTURE_2NM) < 1e-9
    a = alpha_from_spectrum(2.0, 0.8, 1, 0.8)
    assert a == Fraction(6, 25)
    assert a.denominator <= 64


def test_alpha_symmetry_and_line_limit():
    for args in [(2.0, 0.8, 0.8), (1.0, 0.8, 0.4), (3.0, 0.4, 1.0)]:
        f, s, bw = args
        assert alpha_from_spectrum(f, s, 1, bw) == alpha_from_spectrum(f, s, -1, bw)
        assert captured_power_fraction(f, s, 2, bw) == captured_power_fraction(f, s, -2, bw)
    assert alpha_from_spectrum(1e-6, 0.8, 1, 0.8) == 0
    assert captured_power_fraction(1e-6, 0.8, 1, 0.8) == 0.0


def test_alpha_rejects_bad_inputs():
    with pytest.raises(ValueError):
        alpha_from_spectrum(0, 0.8, 1, 0.8)
    with pytest.raises(ValueError):
        alpha_from_spectrum(2.0, 0.8, 0, 0.8)
    with pytest.raises(ValueError):
        alpha_from_spectrum(2.0, -0.8, 1, 0.8)


def test_narrower_source_leaks_less():
    assert alpha_from_spectrum(1.0, 0.8, 1, 0.8) < alpha_from_spectrum(2.0, 0.8, 1, 0.8)
