"""Exception types raised across auctionlab."""


class AuctionLabError(Exception):
    pass


class DomainError(AuctionLabError, ValueError):
    """Argument outside the support of a distribution or the range of a map."""


class SingularDensityError(AuctionLabError, ZeroDivisionError):
    """Density vanishes where a virtual value or h-transform is requested."""


class TailSingularityError(AuctionLabError, ZeroDivisionError):
    """1 - F(x) is numerically zero, so a hazard rate is undefined."""


class InfeasibleEpsilonError(AuctionLabError, ValueError):
    pass


class NonIncreasingStrategyError(AuctionLabError, ValueError):
    pass


class NoRootError(AuctionLabError, RuntimeError):
    pass


class DegenerateCrossingError(AuctionLabError, RuntimeError):
    pass


class UnsupportedDistributionError(AuctionLabError, ValueError):
    pass


class ConfigError(AuctionLabError, ValueError):
    pass
