"""Guard against accidental dense n-by-n materialization.

Everything in this package is designed to run in O(n R) memory. Dense
matrices are still useful below a size cutoff, both as a fast path and as
a test oracle, so densification is allowed up to a configurable threshold
and refused above it.
"""

from contextlib import contextmanager

DEFAULT_DENSE_THRESHOLD = 256

_threshold = DEFAULT_DENSE_THRESHOLD


class DenseMaterializationError(RuntimeError):
    """Raised when a code path asks for an n-by-n buffer with n above the threshold."""


def dense_threshold() -> int:
    return _threshold


def set_dense_threshold(value: int) -> None:
    """Set the largest n for which dense n-by-n buffers may be allocated."""
    global _threshold
    if value < 0:
        raise ValueError(f"dense threshold must be nonnegative, got {value}")
    _threshold = value


@contextmanager
def dense_limit(value: int):
    """Temporarily override the dense threshold (mainly for tests)."""
    global _threshold
    previous = _threshold
    set_dense_threshold(value)
    try:
        yield
    finally:
        _threshold = previous


def ensure_dense_allowed(n: int, context: str = "") -> None:
    """Raise DenseMaterializationError if an n-by-n allocation is out of policy."""
    if n > _threshold:
        where = f" in {context}" if context else ""
        raise DenseMaterializationError(
            f"refusing to materialize a dense {n}x{n} matrix{where}: "
            f"n exceeds the dense threshold {_threshold}"
        )
