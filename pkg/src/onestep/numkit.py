"""Complex-valued numerical substrate: DFT, spectral norm, least squares.

DFT convention used throughout the package::

    fft(v)[m]  = sum_q v[q] exp(-2j*pi*q*m/n)          (no scaling)
    ifft(v)[q] = (1/n) sum_m v[m] exp(+2j*pi*q*m/n)

Arbitrary lengths (including primes) are supported; the transforms are
backed by numpy's pocketfft, which switches to Bluestein's algorithm for
lengths with large prime factors.
"""

import numpy as np
import scipy.linalg

from .exceptions import ConvergenceError, InvalidArgumentError

__all__ = [
    "fft",
    "ifft",
    "spectral_norm",
    "matrix_spectral_norm",
    "least_squares",
    "RANK_RTOL",
]

RANK_RTOL = 1e-10


def _as_complex(v, name="v"):
    v = np.asarray(v, dtype=np.complex128)
    if v.size == 0 or 0 in v.shape:
        raise InvalidArgumentError(f"{name} must be non-empty")
    return v


def fft(v, axis=-1):
    """Forward DFT with the exp(-2j*pi*q*m/n) kernel and no scaling."""
    v = _as_complex(v)
    return np.fft.fft(v, axis=axis)


def ifft(v, axis=-1):
    """Inverse of :func:`fft` (carries the 1/n factor)."""
    v = _as_complex(v)
    return np.fft.ifft(v, axis=axis)


def spectral_norm(apply, apply_adjoint, n, p, tol=1e-8, max_iter=1000):
    """Largest singular value of an n x p operator by power iteration on A A^H.

    Parameters
    ----------
    apply, apply_adjoint : callable
        ``apply(x)`` maps C^p -> C^n, ``apply_adjoint(y)`` maps C^n -> C^p.
    n, p : int
        Operator dimensions.
    tol : float
        Relative tolerance on successive estimates of sigma_max^2.
    max_iter : int
        Iteration cap; :class:`ConvergenceError` is raised past it.

    The start vector is the normalized all-ones vector of C^n, so the result
    is reproducible. If that vector happens to be orthogonal to the leading
    left singular vector the iteration settles on a smaller singular value.
    """
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    if n < 1 or p < 1:
        raise InvalidArgumentError("operator dimensions must be positive")

    u = np.full(n, 1.0 / np.sqrt(n), dtype=np.complex128)
    lam_old = None
    for _ in range(max_iter):
        w = np.asarray(apply(apply_adjoint(u)), dtype=np.complex128)
        if w.shape != (n,):
            raise InvalidArgumentError(
                f"operator returned shape {w.shape}, expected ({n},)")
        lam = float(np.real(np.vdot(u, w)))
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        u = w / norm_w
        if lam_old is not None and abs(lam - lam_old) <= tol * abs(lam):
            return float(np.sqrt(max(lam, 0.0)))
        lam_old = lam
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations",
        last_iterate=u,
        estimate=float(np.sqrt(max(lam_old or 0.0, 0.0))),
    )


def matrix_spectral_norm(A, tol=1e-8, max_iter=1000):
    """:func:`spectral_norm` for an explicit (dense) matrix."""
    A = np.asarray(A)
    if A.ndim != 2:
        raise InvalidArgumentError("A must be a matrix")
    n, p = A.shape
    AH = A.conj().T
    return spectral_norm(lambda x: A @ x, lambda y: AH @ y, n, p,
                         tol=tol, max_iter=max_iter)


def least_squares(A, y, rtol=RANK_RTOL):
    """Minimum-norm solution of min ||A w - y||_2 for an n x m matrix, m <= n.

    Rank is read off a column-pivoted QR factorization: diagonal entries of R
    below ``rtol * |R[0, 0]|`` (|R[0, 0]| is the largest column norm) count as
    zero. The rank-deficient case goes through a complete orthogonal
    decomposition so the returned vector has the smallest l2 norm among all
    minimizers; with full column rank this is (A^H A)^{-1} A^H y.
    """
    A = np.asarray(A, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if A.ndim != 2 or y.ndim != 1:
        raise InvalidArgumentError("A must be 2-D and y 1-D")
    n, m = A.shape
    if y.shape[0] != n:
        raise InvalidArgumentError(
            f"dimension mismatch: A is {n}x{m}, y has length {y.shape[0]}")
    if m > n:
        raise InvalidArgumentError(f"need m <= n, got {n}x{m}")
    if m == 0:
        return np.zeros(0, dtype=np.complex128)

    Q, R, piv = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag[0] == 0.0:
        return np.zeros(m, dtype=np.complex128)
    r = int(np.count_nonzero(diag > rtol * diag[0]))

    c = Q[:, :r].conj().T @ y
    R1 = R[:r, :]
    if r == m:
        w_piv = scipy.linalg.solve_triangular(R1, c)
    else:
        # R1 = L^H Z^H with R1^H = Z L; the min-norm solution lies in range(Z).
        Z, L = scipy.linalg.qr(R1.conj().T, mode="economic")
        u = scipy.linalg.solve_triangular(L.conj().T, c, lower=True)
        w_piv = Z @ u

    w = np.empty(m, dtype=np.complex128)
    w[piv] = w_piv
    return w
