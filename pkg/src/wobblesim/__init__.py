"""Channel autocorrelation and coherence time of air-to-ground links under UAV pitch wobbling."""

from .acf_analytic import AcfCurve, AutocorrMatrix, Provenance, acf, acf_wiener, acf_sinusoid, analytic_curve
from .coherence import CoherenceKind, CoherenceResult, InconclusiveCoherence, coherence_time
from .spectrum import AngleLaw, ChannelSpec, reference_channel
from .wobble import FrequencyLaw, PitchProcessSpec, ProcessKind

__all__ = [
    "AcfCurve",
    "AngleLaw",
    "AutocorrMatrix",
    "ChannelSpec",
    "CoherenceKind",
    "CoherenceResult",
    "FrequencyLaw",
    "InconclusiveCoherence",
    "PitchProcessSpec",
    "ProcessKind",
    "Provenance",
    "acf",
    "acf_sinusoid",
    "acf_wiener",
    "analytic_curve",
    "coherence_time",
    "reference_channel",
]

__version__ = "0.1.0"
