"""Room impulse response toolkit.

Core library (dsp, acoustics, losses, model, fit, data, evaluation) plus an
HTTP service (`rirlab.service`) and a thin CLI client (`rirlab.cli`).
"""

__version__ = "0.1.0"

from .errors import RirlabError
from .dsp import OctaveBands, Signal, Spectrogram, StftConfig

__all__ = ["RirlabError", "OctaveBands", "Signal", "Spectrogram", "StftConfig", "__version__"]
