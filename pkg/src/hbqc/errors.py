"""Exception hierarchy shared by every hbqc module."""


class HBQCError(Exception):
    """Base class for all errors raised by hbqc."""


class ContractViolation(HBQCError, ValueError):
    """A caller broke a precondition (bad index, width mismatch, ...)."""


class InvalidParameter(HBQCError, ValueError):
    """A numeric parameter is out of range or not finite."""


class InvalidState(HBQCError, ValueError):
    """A quantum state is malformed (wrong length, not normalized)."""


class InvalidCircuit(HBQCError, ValueError):
    """A circuit or computation set contains a gate it must not contain."""


class UnsupportedGate(InvalidCircuit):
    """The transpiler has no rewrite for this gate."""


class ResourceBound(HBQCError):
    """An exhaustive computation would exceed its configured size limit."""


class ParseError(HBQCError, ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
