from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from iddgames.data.classes import ValidationReport


class IddError(Exception):
    pass


class EdgeListParseError(IddError, ValueError):
    def __init__(self, line_number: int, line: str) -> None:
        self.line_number = line_number
        self.line = line
        super().__init__(f"Line {line_number}: expected 2 node identifiers, got {len(line.split())}: {line!r}")


class InvalidGraphError(IddError, ValueError):
    pass


class NodeIndexError(IddError, IndexError):
    pass


class GameFormatError(IddError, ValueError):
    pass


class InvalidStrategyError(IddError, ValueError):
    pass


class UnknownRegretModeError(IddError, ValueError):
    pass


class NotTransferVulnerableError(IddError):
    pass


class AssumptionViolatedError(IddError):
    def __init__(self, message: str, report: Optional["ValidationReport"] = None) -> None:
        self.report = report
        super().__init__(message)


class InternalConsistencyError(IddError, RuntimeError):
    pass


class SelectorRangeError(IddError, ValueError):
    pass


class SizeCapExceededError(IddError):
    pass


class InvalidConfigError(IddError, ValueError):
    pass


class InvalidGeneratorParamsError(IddError, ValueError):
    pass


class PowerLawFitError(IddError, ValueError):
    pass
