"""Exception types shared across the package."""


class PlancogError(Exception):
    """Base class for all analysis errors raised by this package."""


class LexError(PlancogError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ParseError(PlancogError):
    def __init__(self, message, line, expected=()):
        detail = f"line {line}: {message}"
        if expected:
            detail += " (expected " + ", ".join(sorted(expected)) + ")"
        super().__init__(detail)
        self.line = line
        self.expected = frozenset(expected)


class AnalysisError(PlancogError):
    """A request that cannot be answered for the given program (bad line, unknown variable...)."""


class KbFormatError(PlancogError):
    def __init__(self, message, line):
        super().__init__(f"kb line {line}: {message}")
        self.line = line


class KbValidationError(PlancogError):
    def __init__(self, diagnostics):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = list(diagnostics)
