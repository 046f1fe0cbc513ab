"""Plain-text matrix files: a dimension line, then row-major complex
entries written as "re+imj" with 17 significant digits."""

import numpy as np

from .errors import InvalidInputError

__all__ = ["read_matrix", "write_matrix", "format_entry"]


def format_entry(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}j"


def write_matrix(path, a) -> None:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    with open(path, "w") as fh:
        fh.write(f"{n}\n")
        for row in a:
            fh.write(" ".join(format_entry(z) for z in row) + "\n")


def read_matrix(path) -> np.ndarray:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise InvalidInputError(f"{path}: empty matrix file")
    try:
        n = int(lines[0])
    except ValueError:
        raise InvalidInputError(f"{path}: first line must be the dimension")
    if n < 1 or len(lines) != n + 1:
        raise InvalidInputError(
            f"{path}: expected {n} rows after the dimension line")
    out = np.empty((n, n), dtype=complex)
    for i, line in enumerate(lines[1:]):
        tokens = line.split()
        if len(tokens) != n:
            raise InvalidInputError(f"{path}: row {i} has {len(tokens)} entries, expected {n}")
        try:
            out[i] = [complex(t) for t in tokens]
        except ValueError as exc:
            raise InvalidInputError(f"{path}: row {i}: {exc}")
    return out
