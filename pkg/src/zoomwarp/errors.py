"""Exception types shared across the package."""


class FoldoverError(ValueError):
    """A warp grid or axis lost injectivity (crossing sample lines)."""


class DegenerateSaliencyError(ValueError):
    """Kernel-weighted saliency mass vanished at some sample point."""


class InjectivityError(ValueError):
    """Two warp tiles claimed the same output point with conflicting inverses."""


class EmptyDomainError(ValueError):
    """An operation over commonly-valid points found none."""


class FormatError(ValueError):
    """A file does not conform to the dense-array or PNG contracts."""
