"""Simulated myoelectric prosthetic-hand pipeline.

EMG synthesis and preprocessing, time- and frequency-domain window features,
a 10-unit tanh / softmax gesture classifier, evaluation, and a hand controller
with FSR tactile feedback. Hot window kernels come from a compiled extension
when available (see :mod:`myohand.kernels`).
"""
__version__ = "0.1.0"

from .kernels import BACKEND
from .signal_io import AdcConfig, GestureClass, Recording, Window

__all__ = ["BACKEND", "AdcConfig", "GestureClass", "Recording", "Window", "__version__"]
