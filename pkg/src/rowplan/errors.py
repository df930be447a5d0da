"""Exception hierarchy.

Configuration/validation problems derive from :class:`ConfigError` (CLI exit
code 1); everything raised while running derives from :class:`RowplanError`
only (exit code 2).
"""


class RowplanError(Exception):
    pass


class ConfigError(RowplanError, ValueError):
    pass


class FieldValidationError(ConfigError):
    pass


class FieldFileError(FieldValidationError):
    def __init__(self, message, line=None, field=None):
        super().__init__(message)
        self.line = line
        self.field = field


class DomainError(RowplanError, ValueError):
    pass


class OrderingError(RowplanError, ValueError):
    """An edge or update points upstream (against the direction of travel)."""


class AlreadyPassedError(OrderingError):
    pass


class AssignmentError(RowplanError, ValueError):
    pass


class WindowOverflowError(RowplanError):
    def __init__(self, count, cap):
        super().__init__(
            f"{count} targets in one axis window exceeds the exhaustive-search cap of {cap}; "
            "shrink window_length"
        )
        self.count = count
        self.cap = cap


class KinematicViolationError(RowplanError):
    pass


class OracleSizeError(RowplanError, ValueError):
    pass


class ReportError(RowplanError):
    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row
