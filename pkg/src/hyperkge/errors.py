"""Exception hierarchy.

The CLI maps these onto exit codes: ``DataError`` -> 2, ``NumericError`` -> 3.
"""


class HyperKGEError(Exception):
    pass


class DataError(HyperKGEError):
    """Bad input files, checksum failures, size mismatches."""


class MalformedLineError(DataError):
    def __init__(self, path, lineno, nfields):
        self.path = str(path)
        self.lineno = lineno
        self.nfields = nfields
        super().__init__(
            f"{self.path}:{lineno}: expected 3 tab-separated fields, got {nfields}"
        )


class AlreadyAugmentedError(DataError):
    pass


class ChecksumError(DataError):
    pass


class NumericError(HyperKGEError, ArithmeticError):
    pass


class DimensionMismatchError(NumericError, ValueError):
    def __init__(self, left, right):
        self.left = left
        self.right = right
        super().__init__(f"dimension mismatch: {left} vs {right}")


class DegenerateQuaternionError(NumericError):
    """Raised when normalizing a (near-)zero hypercomplex number."""

    def __init__(self, dims, eps):
        self.dims = list(dims)
        self.eps = eps
        head = ", ".join(str(d) for d in self.dims[:8])
        more = "" if len(self.dims) <= 8 else f" (+{len(self.dims) - 8} more)"
        super().__init__(f"norm <= {eps:g} at dimension index {head}{more}")


class NonFiniteScoreError(NumericError):
    def __init__(self, triple, score):
        self.triple = tuple(int(x) for x in triple)
        self.score = score
        super().__init__(f"non-finite score {score!r} for triple {self.triple}")
