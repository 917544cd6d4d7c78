"""Exception hierarchy shared by every module of the package."""


class DecomposableError(Exception):
    """Base class for all errors raised by this package."""


class NotChordal(DecomposableError, ValueError):
    pass


class NotAPermutation(DecomposableError, ValueError):
    pass


class NotEligible(DecomposableError, ValueError):
    """The requested edge move would break decomposability."""


class InternalInconsistency(DecomposableError, RuntimeError):
    """A maintained structure disagrees with its from-scratch rebuild."""


class AreAdjacent(DecomposableError, ValueError):
    pass


class EmptyDataset(DecomposableError, ValueError):
    pass


class NotInClique(DecomposableError, ValueError):
    pass


class SeparatorNotPresent(DecomposableError, KeyError):
    pass


class ColumnMismatch(DecomposableError, ValueError):
    pass


class UnknownFormat(DecomposableError, ValueError):
    pass


class IngestError(DecomposableError):
    """Raised when a CSV input cannot be turned into a dataset."""


class EmptyFile(IngestError):
    pass


class RaggedRow(IngestError):
    def __init__(self, line: int, expected: int, got: int) -> None:
        super().__init__(f"line {line}: expected {expected} fields, got {got}")
        self.line = line


class DuplicateColumn(IngestError):
    def __init__(self, name: str) -> None:
        super().__init__(f"duplicate column name {name!r}")
        self.name = name
