"""Exception hierarchy shared by every conetree module."""


class ConeTreeError(Exception):
    """Base class for all library errors."""


class ParseError(ConeTreeError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SignatureMismatch(ConeTreeError):
    pass


class UnknownElement(ConeTreeError):
    pass


class FormulaError(ConeTreeError):
    """Raised for unassigned variables, unknown symbols and ill-arity atoms."""


class AmalgamationError(ConeTreeError):
    pass


class DescriptorError(ConeTreeError):
    pass


class PartialIsomorphismError(ConeTreeError):
    pass


class WitnessError(ConeTreeError):
    pass


class InvalidStructure(ConeTreeError):
    """An input structure failed validation where a valid one was required."""

    def __init__(self, report, what="structure"):
        self.report = report
        first = report.violations[0] if report.violations else None
        super().__init__(f"invalid {what}: {first}")
