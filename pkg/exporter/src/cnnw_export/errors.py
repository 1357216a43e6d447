class ExporterError(Exception):
    """Base for everything this package raises on purpose."""


class MissingNetwork(ExporterError):
    """Unknown architecture name, or its weights cannot be obtained."""


class UnsupportedLayer(ExporterError):
    """The requested chain needs an op outside conv/relu/2x2-maxpool."""
