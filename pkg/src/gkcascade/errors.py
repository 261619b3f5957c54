class InputError(ValueError):
    """Bad user-supplied data. The CLI maps these to exit code 2."""


class EmptyPanel(InputError):
    pass


class UnknownTicker(InputError):
    def __init__(self, ticker):
        super().__init__(f"unknown ticker: {ticker!r}")
        self.ticker = ticker


class DuplicateDate(InputError):
    pass


class MalformedHeader(InputError):
    pass


class MalformedRow(InputError):
    pass


class InsufficientData(InputError):
    pass


class ZeroVariance(InputError):
    def __init__(self, asset):
        super().__init__(f"asset {asset!r} has zero return variance")
        self.asset = asset


class DimensionMismatch(ValueError):
    pass


class EmptySample(ValueError):
    pass


class InvalidAlpha(ValueError):
    pass
