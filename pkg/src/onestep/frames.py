"""Design matrices and their geometry.

Gabor frames are indexed with the linearization ``i = l + m*n`` where ``l`` is
the circular time shift and ``m`` the modulation frequency; column ``i`` has
entries ``g[(q - l) % n] * exp(2j*pi*m*q/n)`` for ``q = 0..n-1``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import numkit
from .exceptions import InvalidArgumentError

__all__ = [
    "Frame",
    "CoherenceReport",
    "is_prime",
    "alltop_seed",
    "build_gabor_frame",
    "gabor_apply",
    "gabor_adjoint_apply",
    "gabor_columns",
    "gaussian_design",
    "identity_frame",
    "explicit_frame",
    "worst_case_coherence",
    "average_coherence",
    "frame_spectral_norm",
    "welch_bound",
    "gabor_nu_bound",
    "check_coherence_property",
    "check_strong_coherence_property",
    "coherence_report",
    "is_alltop",
    "save_frame",
    "load_frame",
    "save_seed",
    "load_seed",
]

COLUMN_NORM_TOL = 1e-10
SEED_NORM_TOL = 1e-12
# Gabor frames above this size default to the FFT operator form.
DENSE_GABOR_MAX_N = 64
# Number of columns pushed through the adjoint per block in Gram scans.
_GRAM_BLOCK = 256


@dataclass(frozen=True, eq=False)
class Frame:
    """An n x p design matrix, explicit or (for Gabor) implicit.

    ``matrix`` holds the dense form when it is materialized. Gabor frames in
    operator form keep only ``seed``. Gaussian frames keep the unnormalized
    draw in ``raw`` next to the column-normalized ``matrix``.
    """

    n: int
    p: int
    kind: str
    matrix: np.ndarray | None = None
    seed: np.ndarray | None = None
    raw: np.ndarray | None = None
    normalized: bool = True
    rng_seed: int | None = None
    column_norm_tol: float = COLUMN_NORM_TOL
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise InvalidArgumentError("frame dimensions must be positive")
        if self.n > self.p:
            raise InvalidArgumentError(f"need n <= p, got n={self.n}, p={self.p}")
        if self.matrix is None and self.kind != "gabor":
            raise InvalidArgumentError("only Gabor frames may omit the dense matrix")
        if self.matrix is not None:
            if self.matrix.shape != (self.n, self.p):
                raise InvalidArgumentError("matrix shape disagrees with (n, p)")
            if not np.all(np.isfinite(self.matrix)):
                raise InvalidArgumentError("matrix has non-finite entries")
            self.matrix.setflags(write=False)
        if self.kind == "gabor":
            if self.seed is None or self.p != self.n ** 2:
                raise InvalidArgumentError("Gabor frame needs a seed and p = n^2")
            self.seed.setflags(write=False)
        if self.normalized:
            norms = self.column_norms()
            if np.max(np.abs(norms - 1.0)) > self.column_norm_tol:
                raise InvalidArgumentError("frame declared normalized but columns are not unit norm")

    @property
    def is_operator(self):
        return self.matrix is None

    def apply(self, beta):
        """X @ beta. ``beta`` may carry trailing batch columns."""
        beta = np.asarray(beta, dtype=np.complex128)
        if beta.shape[0] != self.p:
            raise InvalidArgumentError(f"expected leading dimension {self.p}, got {beta.shape[0]}")
        if self.matrix is not None:
            return self.matrix @ beta
        return gabor_apply(self.seed, beta)

    def adjoint(self, y):
        """X^H @ y. ``y`` may carry trailing batch columns."""
        y = np.asarray(y, dtype=np.complex128)
        if y.shape[0] != self.n:
            raise InvalidArgumentError(f"expected leading dimension {self.n}, got {y.shape[0]}")
        if self.matrix is not None:
            return self.matrix.conj().T @ y
        return gabor_adjoint_apply(self.seed, y)

    def columns(self, idx):
        """Dense n x len(idx) submatrix."""
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.p):
            raise InvalidArgumentError("column index out of range")
        if self.matrix is not None:
            return np.asarray(self.matrix[:, idx], dtype=np.complex128)
        return gabor_columns(self.seed, idx)

    def column_norms(self):
        if self.matrix is not None:
            return np.linalg.norm(self.matrix, axis=0)
        # every Gabor column is a shifted, modulated copy of the seed
        return np.full(self.p, np.linalg.norm(self.seed))

    def dense(self):
        if self.matrix is not None:
            return np.asarray(self.matrix, dtype=np.complex128)
        return gabor_columns(self.seed, np.arange(self.p))

    def with_raw(self):
        """The unnormalized Gaussian draw as its own (non-normalized) Frame."""
        if self.raw is None:
            raise InvalidArgumentError("frame has no raw form")
        return Frame(self.n, self.p, "gaussian", matrix=self.raw, normalized=False,
                     rng_seed=self.rng_seed)


@dataclass(frozen=True)
class CoherenceReport:
    n: int
    p: int
    mu: float
    nu: float
    spectral_norm: float
    welch: float | None
    cp1: bool
    cp2: bool
    scp1: bool
    scp2: bool
    analytic: bool

    @property
    def cp_holds(self):
        return self.cp1 and self.cp2

    @property
    def scp_holds(self):
        return self.scp1 and self.scp2

    def to_dict(self):
        return {
            "n": self.n,
            "p": self.p,
            "mu": self.mu,
            "nu": self.nu,
            "spectral_norm": self.spectral_norm,
            "welch": self.welch,
            "cp_holds": self.cp_holds,
            "cp1": self.cp1,
            "cp2": self.cp2,
            "scp_holds": self.scp_holds,
            "scp1": self.scp1,
            "scp2": self.scp2,
            "analytic": self.analytic,
        }


def is_prime(n):
    """Trial division; fine for the n <= ~1e4 used here."""
    n = int(n)
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def alltop_seed(n):
    """Alltop sequence g_q = exp(2j*pi*q^3/n)/sqrt(n) for prime n >= 5."""
    n = int(n)
    if n < 5 or not is_prime(n):
        raise InvalidArgumentError(f"Alltop seed needs a prime n >= 5, got {n}")
    q = np.arange(n, dtype=np.int64)
    # reduce q^3 mod n in integers before taking the phase
    phase = (q * q % n) * q % n
    return np.exp(2j * np.pi * phase / n) / np.sqrt(n)


def _check_seed(g):
    g = np.asarray(g, dtype=np.complex128)
    if g.ndim != 1 or g.size < 2:
        raise InvalidArgumentError("seed must be a vector of length >= 2")
    if abs(np.linalg.norm(g) - 1.0) > SEED_NORM_TOL:
        raise InvalidArgumentError(f"seed must have unit norm, got {np.linalg.norm(g)!r}")
    return g


def _shift_matrix(g):
    # G[q, l] = g[(q - l) % n]
    n = g.size
    q = np.arange(n)
    return g[(q[:, None] - q[None, :]) % n]


def gabor_columns(g, idx):
    """Columns ``idx`` of the Gabor frame generated by ``g``, as an n x len(idx) array."""
    g = np.asarray(g, dtype=np.complex128)
    n = g.size
    idx = np.asarray(idx, dtype=np.int64)
    ell = idx % n
    m = idx // n
    q = np.arange(n)
    shifted = g[(q[:, None] - ell[None, :]) % n]
    return shifted * np.exp(2j * np.pi * ((q[:, None] * m[None, :]) % n) / n)


def gabor_apply(g, beta):
    """X @ beta for the Gabor frame of ``g`` in O(n^2 log n).

    ``beta`` has length n^2 (optionally with trailing batch dimensions).
    """
    g = np.asarray(g, dtype=np.complex128)
    n = g.size
    beta = np.asarray(beta, dtype=np.complex128)
    if beta.shape[0] != n * n:
        raise InvalidArgumentError(f"beta must have leading length {n * n}")
    batch = beta.shape[1:]
    B = beta.reshape((n, n) + batch)  # B[m, l, ...]
    # sum over m of B[m, l] exp(2j pi m q / n) = n * ifft over m
    H = n * numkit.ifft(B, axis=0)  # H[q, l, ...]
    G = _shift_matrix(g).reshape((n, n) + (1,) * len(batch))
    return np.sum(G * H, axis=1)


def gabor_adjoint_apply(g, y):
    """X^H @ y for the Gabor frame of ``g`` in O(n^2 log n).

    For a fixed shift l the proxy entries over m are the DFT of
    y[q] * conj(g[(q - l) % n]).
    """
    g = np.asarray(g, dtype=np.complex128)
    n = g.size
    y = np.asarray(y, dtype=np.complex128)
    if y.shape[0] != n:
        raise InvalidArgumentError(f"y must have leading length {n}")
    batch = y.shape[1:]
    G = _shift_matrix(g).conj().reshape((n, n) + (1,) * len(batch))
    P = y[:, None, ...] * G  # P[q, l, ...]
    F = numkit.fft(P, axis=0)  # F[m, l, ...]
    return F.reshape((n * n,) + batch)


def build_gabor_frame(g, form=None):
    """Gabor frame [W_0 T, ..., W_{n-1} T] generated by a unit-norm seed.

    ``form`` is "explicit", "operator", or None (explicit up to n = 64).
    """
    g = _check_seed(g)
    n = g.size
    if form is None:
        form = "explicit" if n <= DENSE_GABOR_MAX_N else "operator"
    if form not in ("explicit", "operator"):
        raise InvalidArgumentError(f"unknown form {form!r}")
    matrix = gabor_columns(g, np.arange(n * n)) if form == "explicit" else None
    return Frame(n, n * n, "gabor", matrix=matrix, seed=g.copy())


def gaussian_design(n, p, seed, normalize=True):
    """i.i.d. N(0, 1/n) design drawn from ``numpy.random.default_rng(seed)``.

    With ``normalize`` the frame's matrix has unit-norm columns; the raw draw
    is always kept on ``Frame.raw``.
    """
    n, p = int(n), int(p)
    if n < 1 or p < n:
        raise InvalidArgumentError(f"need 1 <= n <= p, got n={n}, p={p}")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, p)) / np.sqrt(n)
    raw.setflags(write=False)
    if normalize:
        matrix = raw / np.linalg.norm(raw, axis=0)
    else:
        matrix = raw
    return Frame(n, p, "gaussian", matrix=matrix, raw=raw, normalized=normalize,
                 rng_seed=None if isinstance(seed, np.random.Generator) else seed)


def identity_frame(n):
    return Frame(n, n, "explicit", matrix=np.eye(n, dtype=np.complex128))


def explicit_frame(matrix, normalized=True):
    matrix = np.array(matrix, dtype=np.complex128)
    if matrix.ndim != 2:
        raise InvalidArgumentError("matrix must be 2-D")
    n, p = matrix.shape
    return Frame(n, p, "explicit", matrix=matrix, normalized=normalized)


def _as_frame(X):
    if isinstance(X, Frame):
        return X
    X = np.asarray(X)
    return Frame(X.shape[0], X.shape[1], "explicit", matrix=X, normalized=False)


def worst_case_coherence(X):
    """mu(X) = max over i != j of |<x_i, x_j>|.

    Dense frames use the full Gram matrix; operator-form Gabor frames are
    scanned block by block through the adjoint, so the p x p Gram is never
    held in memory.
    """
    X = _as_frame(X)
    if X.p < 2:
        return 0.0
    if X.matrix is not None and X.p <= 4096:
        M = X.matrix
        gram = np.abs(M.conj().T @ M)
        np.fill_diagonal(gram, 0.0)
        return float(gram.max())
    best = 0.0
    for start in range(0, X.p, _GRAM_BLOCK):
        idx = np.arange(start, min(start + _GRAM_BLOCK, X.p))
        rows = np.abs(X.adjoint(X.columns(idx)))  # p x block
        rows[idx, np.arange(idx.size)] = 0.0
        best = max(best, float(rows.max()))
    return best


def average_coherence(X):
    """nu(X) = max_i |sum_{j != i} <x_i, x_j>| / (p - 1).

    Computed as X^H (X 1) minus the diagonal ||x_i||^2.
    """
    X = _as_frame(X)
    if X.p < 2:
        return 0.0
    row_sums = X.adjoint(X.apply(np.ones(X.p, dtype=np.complex128)))
    row_sums = row_sums - X.column_norms() ** 2
    return float(np.max(np.abs(row_sums)) / (X.p - 1))


def frame_spectral_norm(X, tol=1e-8, max_iter=1000):
    X = _as_frame(X)
    return numkit.spectral_norm(X.apply, X.adjoint, X.n, X.p, tol=tol, max_iter=max_iter)


def welch_bound(n, p):
    """sqrt((p - n) / (n (p - 1))), the smallest mu any p unit vectors in C^n can have."""
    if not p > n >= 1:
        raise InvalidArgumentError(f"Welch bound needs p > n >= 1, got n={n}, p={p}")
    return math.sqrt((p - n) / (n * (p - 1)))


def gabor_nu_bound(g):
    """Upper bound on the average coherence of the Gabor frame generated by ``g``.

    [n gmax (sqrt(n) - gmin) + 1 - n gmin^2] / (n^2 - 1).
    """
    g = np.asarray(g, dtype=np.complex128)
    n = g.size
    mags = np.abs(g)
    gmax, gmin = float(mags.max()), float(mags.min())
    return (n * gmax * (math.sqrt(n) - gmin) + 1.0 - n * gmin ** 2) / (n ** 2 - 1)


def check_coherence_property(mu, nu, n, p):
    """(mu <= 0.1/sqrt(2 ln p), nu <= mu/sqrt(n)).

    Upper bounds may be passed in place of exact mu and nu.
    """
    cp1 = mu <= 0.1 / math.sqrt(2.0 * math.log(p))
    cp2 = nu <= mu / math.sqrt(n)
    return bool(cp1), bool(cp2)


def check_strong_coherence_property(mu, nu, n, p):
    """(mu <= 1/(60 e ln p), nu <= mu/sqrt(n))."""
    scp1 = mu <= 1.0 / (60.0 * math.e * math.log(p))
    scp2 = nu <= mu / math.sqrt(n)
    return bool(scp1), bool(scp2)


def is_alltop(X):
    if X.kind != "gabor" or not is_prime(X.n) or X.n < 5:
        return False
    return np.allclose(X.seed, alltop_seed(X.n), atol=1e-12)


def coherence_report(X, analytic=False):
    """mu, nu, spectral norm, Welch bound and the (S)CP flags of a frame.

    With ``analytic`` and an Alltop frame the closed forms mu = 1/sqrt(n),
    nu = 1/(n + 1) (an upper bound) and ||X||_2 = sqrt(n) are used.
    """
    X = _as_frame(X)
    if analytic:
        if not is_alltop(X):
            raise InvalidArgumentError("analytic report is only available for Alltop Gabor frames")
        mu = 1.0 / math.sqrt(X.n)
        nu = 1.0 / (X.n + 1)
        snorm = math.sqrt(X.n)
    else:
        mu = worst_case_coherence(X)
        nu = average_coherence(X)
        snorm = frame_spectral_norm(X)
    welch = welch_bound(X.n, X.p) if X.p > X.n else None
    if X.p >= 2:
        cp1, cp2 = check_coherence_property(mu, nu, X.n, X.p)
        scp1, scp2 = check_strong_coherence_property(mu, nu, X.n, X.p)
    else:
        cp1 = cp2 = scp1 = scp2 = True
    return CoherenceReport(X.n, X.p, mu, nu, snorm, welch, cp1, cp2, scp1, scp2, analytic)


# -- text formats -------------------------------------------------------------

def _fmt(z):
    return f"{z.real:.17g} {z.imag:.17g}"


def save_frame(path, X):
    """Write an explicit frame: header ``n p kind`` then one matrix row per line."""
    X = _as_frame(X)
    M = X.dense()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{X.n} {X.p} {X.kind}\n")
        for row in M:
            fh.write(" ".join(_fmt(z) for z in row))
            fh.write("\n")


def load_frame(path, normalized=True):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise InvalidArgumentError(f"{path}: bad header, expected 'n p kind'")
        n, p, kind = int(header[0]), int(header[1]), header[2]
        rows = []
        for line in fh:
            if not line.strip():
                continue
            vals = np.array(line.split(), dtype=np.float64)
            if vals.size != 2 * p:
                raise InvalidArgumentError(f"{path}: row has {vals.size // 2} entries, expected {p}")
            rows.append(vals[0::2] + 1j * vals[1::2])
    if len(rows) != n:
        raise InvalidArgumentError(f"{path}: found {len(rows)} rows, expected {n}")
    M = np.array(rows)
    if kind == "gabor":
        # recover the seed from column 0 so the frame keeps its operator path
        return Frame(n, p, "gabor", matrix=M, seed=M[:, 0].copy(), normalized=normalized)
    return Frame(n, p, "explicit" if kind != "gaussian" else kind, matrix=M, normalized=normalized)


def save_seed(path, g):
    g = np.asarray(g, dtype=np.complex128)
    with open(path, "w", encoding="utf-8") as fh:
        for z in g:
            fh.write(_fmt(z) + "\n")


def load_seed(path):
    vals = np.loadtxt(path, dtype=np.float64, ndmin=2)
    if vals.shape[1] != 2:
        raise InvalidArgumentError(f"{path}: expected 're im' pairs")
    return vals[:, 0] + 1j * vals[:, 1]
