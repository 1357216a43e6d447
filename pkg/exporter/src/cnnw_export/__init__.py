"""One-shot exporter: torchvision plain-conv chains to CNNW + TNSR files."""

from .errors import ExporterError, MissingNetwork, UnsupportedLayer
from .export import ExportManifest, export

__all__ = [
    "ExportManifest",
    "ExporterError",
    "MissingNetwork",
    "UnsupportedLayer",
    "export",
]

__version__ = "0.1.0"
