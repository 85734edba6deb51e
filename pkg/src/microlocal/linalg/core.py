"""Dense complex matrices: validation, rank, solving, spectra and JSON encoding.

Matrices are plain ``numpy`` complex128 arrays; :func:`as_matrix` is the single
entry point that enforces the carrier invariants (2-D, finite entries).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class LinAlgError(ValueError):
    """Raised for shape errors, singular inputs and failed post-conditions."""


@dataclass(frozen=True)
class ToleranceConfig:
    eq_tol: float = 1e-10
    rank_tol: float = 1e-8
    fd_tol: float = 1e-6

    def __post_init__(self):
        for name in ("eq_tol", "rank_tol", "fd_tol"):
            val = getattr(self, name)
            if not (val > 0 and np.isfinite(val)):
                raise ValueError(f"{name} must be positive, got {val!r}")

    def to_json(self) -> dict:
        return {"eq_tol": self.eq_tol, "rank_tol": self.rank_tol, "fd_tol": self.fd_tol}


DEFAULT_TOL = ToleranceConfig()


def as_matrix(x, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    m = np.asarray(x, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise LinAlgError(f"{name}: expected a 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise LinAlgError(f"{name}: entries must be finite")
    if square and m.shape[0] != m.shape[1]:
        raise LinAlgError(f"{name}: expected a square matrix, got shape {m.shape}")
    return m


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=complex)


def fro(m) -> float:
    return float(np.linalg.norm(m)) if np.size(m) else 0.0


def rel_diff(a, b) -> float:
    """Frobenius distance scaled by ``max(1, |a|, |b|)``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise LinAlgError(f"shape mismatch {a.shape} vs {b.shape}")
    return fro(a - b) / max(1.0, fro(a), fro(b))


def eigenvalues(m, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Eigenvalues with algebraic multiplicity (as a flat complex array)."""
    m = as_matrix(m, square=True)
    if m.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    ev = np.linalg.eigvals(m)
    scale = max(1.0, fro(m))
    if abs(ev.sum() - np.trace(m)) > cfg.eq_tol * scale * max(1, m.shape[0]):
        raise LinAlgError("eigenvalue sum does not reproduce the trace")
    return ev


def singular_values(m) -> np.ndarray:
    m = as_matrix(m)
    if m.size == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def rank(m, cfg: ToleranceConfig = DEFAULT_TOL) -> int:
    """Singular values above ``rank_tol * max(s_0, 1)``; the floor keeps rounding noise at rank 0."""
    s = singular_values(m)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > cfg.rank_tol * max(s[0], 1.0)))


def is_invertible(m, cfg: ToleranceConfig = DEFAULT_TOL) -> bool:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    if m.shape[0] == 0:
        return True
    s = singular_values(m)
    # Absolute floor: a tiny matrix is singular even if it is well conditioned.
    return bool(s[-1] > cfg.rank_tol * max(s[0], 1.0))


def solve(a, b, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    a = as_matrix(a, square=True, name="A")
    b = as_matrix(b, name="B")
    if a.shape[0] != b.shape[0]:
        raise LinAlgError(f"solve: inconsistent shapes {a.shape} and {b.shape}")
    if not is_invertible(a, cfg):
        raise LinAlgError("solve: A is singular")
    if a.shape[0] == 0:
        return zeros(0, b.shape[1])
    x = np.linalg.solve(a, b)
    # backward-error form: stable for any conditioning of A
    if fro(a @ x - b) > cfg.eq_tol * max(1.0, fro(a) * fro(x), fro(b)):
        raise LinAlgError("solve: residual exceeds tolerance")
    return x


def null_space(m, cfg: ToleranceConfig = DEFAULT_TOL, *, ncols: int | None = None) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel, singular values cut at rank_tol."""
    m = as_matrix(m)
    n = m.shape[1] if ncols is None else ncols
    if m.size == 0:
        return identity(n)
    _, s, vh = np.linalg.svd(m)
    r = 0 if s.size == 0 or s[0] == 0.0 else int(np.sum(s > cfg.rank_tol * max(s[0], 1.0)))
    return vh[r:].conj().T


def orth(m, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the column space."""
    m = as_matrix(m)
    if m.size == 0:
        return zeros(m.shape[0], 0)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    r = 0 if s[0] == 0.0 else int(np.sum(s > cfg.rank_tol * max(s[0], 1.0)))
    return u[:, :r]


# --- JSON --------------------------------------------------------------------

def complex_to_json(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(obj) -> complex:
    if isinstance(obj, (int, float)):
        return complex(obj)
    if not (isinstance(obj, (list, tuple)) and len(obj) == 2):
        raise ValueError(f"complex scalar must be [re, im], got {obj!r}")
    z = complex(float(obj[0]), float(obj[1]))
    if not np.isfinite(z):
        raise ValueError("complex scalar must be finite")
    return z


def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    flat = m.reshape(-1)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols, entries = int(obj["rows"]), int(obj["cols"]), obj["entries"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"matrix JSON needs rows/cols/entries: {exc}") from None
    if rows < 0 or cols < 0 or len(entries) != rows * cols:
        raise ValueError(f"matrix JSON: {len(entries)} entries for shape {rows}x{cols}")
    data = np.array([complex_from_json(e) for e in entries], dtype=complex)
    return as_matrix(data.reshape(rows, cols))
