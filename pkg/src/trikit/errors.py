"""Exception hierarchy shared by every trikit module."""


class TrikitError(Exception):
    """Base class for all library errors."""


class MalformedInput(TrikitError, ValueError):
    """Input violates a precondition (bad field, bad file, wrong shape...)."""


class PrecisionError(TrikitError):
    """A decision could not be certified at the available precision."""


class IndeterminateValuation(PrecisionError):
    """A jet is zero to its known precision, so its valuation is unknown."""


class MathFailure(TrikitError):
    """A mathematical verification failed (not a precision problem).

    ``info`` carries a JSON-serializable diagnostic block.
    """

    def __init__(self, message, info=None):
        super().__init__(message)
        self.info = dict(info or {})
