"""
Exception hierarchy shared by services and commands
"""
from typing import List, Optional


class CoreTuneError(Exception):
    """Base error; carries a human-readable detail and the process exit code"""

    exit_code: int = 1

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class ConfigError(CoreTuneError):
    """Invalid or unknown run configuration"""

    exit_code = 2

    def __init__(self, detail: str, errors: Optional[List[str]] = None):
        super().__init__(detail)
        self.errors = errors or []

    def __str__(self) -> str:
        if not self.errors:
            return self.detail
        return self.detail + "\n" + "\n".join(f"  {e}" for e in self.errors)


class DataFormatError(CoreTuneError):
    """Malformed embeddings file"""

    exit_code = 2

    def __init__(self, detail: str, line: Optional[int] = None):
        if line is not None:
            detail = f"line {line}: {detail}"
        super().__init__(detail)
        self.line = line


class ShapeError(CoreTuneError):
    """Operand dimensions do not agree"""


class NumericalError(CoreTuneError):
    """Non-finite value in an input, a loss or a parameter"""

    exit_code = 3

    def __init__(
        self,
        detail: str,
        epoch: Optional[int] = None,
        batch: Optional[int] = None,
        row: Optional[int] = None,
    ):
        where = []
        if epoch is not None:
            where.append(f"epoch {epoch}")
        if batch is not None:
            where.append(f"batch {batch}")
        if row is not None:
            where.append(f"row {row}")
        if where:
            detail = f"{detail} ({', '.join(where)})"
        super().__init__(detail)
        self.epoch = epoch
        self.batch = batch
        self.row = row


class CheckFailure(CoreTuneError):
    """A verification command exceeded its tolerance"""

    exit_code = 1
