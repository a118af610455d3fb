"""Exception types raised across the toolkit."""


class NascoError(Exception):
    """Base class for all toolkit errors."""


class PoleOnImaginaryAxis(NascoError, ZeroDivisionError):
    pass


class DegenerateLoop(NascoError):
    pass


class ImproperTransferFunction(NascoError, ValueError):
    pass


class ReducibleChain(NascoError, ValueError):
    pass


class InvalidContract(NascoError, ValueError):
    pass


class MalformedTrace(NascoError, ValueError):
    pass


class UnstableClosedLoop(NascoError):
    """Closed loop has a pole with non-negative real part.

    ``state`` carries the channel-state label when the failure comes from one
    entry of a controller bank.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class InvalidRange(NascoError, ValueError):
    pass


class UnknownChannelState(NascoError, KeyError):
    pass


class ConfigError(NascoError, ValueError):
    pass
