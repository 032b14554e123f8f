"""Exception hierarchy shared by all modules."""


class LensfolError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(LensfolError, ValueError):
    pass


# integer / arithmetic layer
class NotInGamma(InvalidInput):
    pass


class NotCoprime(InvalidInput):
    pass


class InvalidSpec(InvalidInput):
    pass


# one-variable function engine
class NonzeroAtOrigin(InvalidInput):
    pass


class NotEven(InvalidInput):
    pass


class NotMonotone(InvalidInput):
    pass


# homogeneous functions
class RankMismatch(InvalidInput):
    pass


class NotQuadratic(InvalidInput):
    pass


class NotDefinite(InvalidInput):
    pass


# foliated maps
class FiberRankNot2(InvalidInput):
    pass


class NotOrientationPreserving(InvalidInput):
    pass


class NotFoliated(InvalidInput):
    pass


class NotDiffeo(LensfolError):
    """The induced map of leaf values is not a diffeomorphism."""


# gluing
class OnCore(InvalidInput):
    pass


class OnBoundary(InvalidInput):
    pass


class IncompatiblePair(InvalidInput):
    pass


class ChartSwapping(InvalidInput):
    pass


class NotDefinedForSpec(InvalidInput):
    pass
