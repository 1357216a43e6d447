"""Exception hierarchy shared by all csfp modules."""


class CsfpError(Exception):
    """Base class for every error raised by this package."""


class IoError(CsfpError):
    """A file is missing, unreadable, or cannot be written."""


class FormatError(CsfpError):
    """A file exists but its content does not match the expected format."""


class InvalidDims(CsfpError):
    """An array has zero-sized or otherwise unusable dimensions."""


class IndexOutOfRange(CsfpError):
    """A frequency-bin index lies outside the 1..M / 1..N grid."""


class DegenerateInput(CsfpError):
    """The band-limited reconstruction is identically zero, so no
    attention map can be normalized."""


class DimMismatch(CsfpError):
    """Two inputs that must share dimensions do not."""


class EmptyStack(CsfpError):
    """A feature stack has no spatial positions."""


class UnknownLayer(CsfpError):
    """A requested layer name does not exist in the weight bundle."""


class ChannelMismatch(CsfpError):
    """Image channel count does not match the network's input channels."""


class ChainError(CsfpError):
    """Layer channel counts in a weight bundle are inconsistent."""


class InvalidSpec(CsfpError):
    """A distortion specification has an out-of-range parameter."""


class EmptyCorpus(CsfpError):
    """A corpus directory or manifest contains no usable images."""


class DegenerateData(CsfpError):
    """Objective scores are all equal; the logistic fit is undefined."""


class TooFew(CsfpError):
    """Not enough records for the requested statistic."""


class IdenticalImages(CsfpError):
    """PSNR is infinite because the two images are identical."""


class TooSmall(CsfpError):
    """Image is smaller than the SSIM window."""
