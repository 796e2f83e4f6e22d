"""Filter-bank SSVEP classification toolkit."""

__version__ = "0.1.0"

from .core import Recording, StimulusTable, SubBandStack, Window, validate_recording

__all__ = [
    "Recording", "StimulusTable", "SubBandStack", "Window", "validate_recording",
    "__version__",
]
