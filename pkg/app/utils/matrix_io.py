"""Side files for explicit matrices and phase vectors"""
from pathlib import Path

import numpy as np

from app.exceptions import ConfigError


def read_complex_matrix(path: Path) -> np.ndarray:
    """Square complex matrix stored as whitespace-separated "re im" pairs, one row per line"""
    try:
        data = np.loadtxt(path, dtype=np.float64, ndmin=2)
    except (OSError, ValueError) as e:
        raise ConfigError(f"cannot read matrix file {path}: {e}") from e
    rows, columns = data.shape
    if columns != 2 * rows:
        raise ConfigError(f"{path}: expected {2 * rows} numbers per line for a {rows}x{rows} matrix, got {columns}")
    return data[:, 0::2] + 1j * data[:, 1::2]


def write_complex_matrix(matrix: np.ndarray, path: Path) -> None:
    matrix = np.asarray(matrix, dtype=np.complex128)
    pairs = np.empty((matrix.shape[0], 2 * matrix.shape[1]))
    pairs[:, 0::2] = matrix.real
    pairs[:, 1::2] = matrix.imag
    np.savetxt(path, pairs, fmt="%.17g")


def read_phases(path: Path) -> np.ndarray:
    """One radian value per line"""
    try:
        return np.atleast_1d(np.loadtxt(path, dtype=np.float64))
    except (OSError, ValueError) as e:
        raise ConfigError(f"cannot read phase file {path}: {e}") from e


def write_phases(theta: np.ndarray, path: Path) -> None:
    np.savetxt(path, np.asarray(theta, dtype=np.float64), fmt="%.17g")
