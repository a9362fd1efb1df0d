"""Link-level BER simulation of WHT-precoded SFBC against STBC and SFBC MIMO-OFDM."""

from .channel import FadingMode, PowerDelayProfile, generate_fading, make_profile
from .modem import Modulation, demap_hard, map_bits
from .sim import BerPoint, Scenario, Scheme, run_sweep, run_trial, snr_to_noise_var

__all__ = [
    "BerPoint", "FadingMode", "Modulation", "PowerDelayProfile", "Scenario", "Scheme",
    "demap_hard", "generate_fading", "make_profile", "map_bits", "run_sweep", "run_trial",
    "snr_to_noise_var",
]
__version__ = "0.1.0"
