"""Bit-error-rate models for DWDM links carrying optical orthogonal codes."""

from .analytic import (
    BerValue,
    CcrConfig,
    InterferenceProfile,
    PicConfig,
    alpha_from_spectrum,
    ber_ccr,
    ber_ccr_multi_interferer,
    ber_ccr_no_wdm,
    ber_ccr_one_interferer,
    ber_pic_paper,
)
from .mcsim import (
    BerEstimate,
    ChannelModel,
    LinkModel,
    enumerate_ccr_exact,
    enumerate_pic_exact,
    simulate_ccr,
    simulate_pic,
)
from .ooc import (
    CodeFamily,
    Codeword,
    autocorrelation,
    crosscorrelation,
    generate_family,
    max_cardinality,
    validate_family,
)

__version__ = "0.1.0"
