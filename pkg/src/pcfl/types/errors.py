class PcflError(Exception):
    """Base class of every error raised by pcfl"""


class PcflSyntaxError(PcflError, ValueError):
    def __init__(self, reason: str, line: int, column: int):
        self.reason = reason
        self.line = line
        self.column = column

        super().__init__(f"{line}:{column}: {reason}")


class PcflTypeError(PcflError, TypeError):
    pass


class ResourceLimitError(PcflError, RuntimeError):
    pass
