"""Closed-form Randles ECM identification from three impedance measurements."""

from .ecm_model import (
    EcmParams,
    ImpedancePoint,
    ImpedanceSpectrum,
    randles_impedance,
    spectrum_from_params,
    warburg_impedance,
)
from .solver import FrequencyTriplet, TripletMeasurement, identify, identify_detailed

__version__ = "0.1.0"

__all__ = [
    "EcmParams",
    "FrequencyTriplet",
    "ImpedancePoint",
    "ImpedanceSpectrum",
    "TripletMeasurement",
    "identify",
    "identify_detailed",
    "randles_impedance",
    "spectrum_from_params",
    "warburg_impedance",
]
