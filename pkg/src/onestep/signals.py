"""Sparse test signals, complex Gaussian noise, and signal statistics."""

import csv
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError

__all__ = [
    "SparseSignal",
    "SignalStats",
    "Measurement",
    "draw_support",
    "draw_ordered_prefix",
    "make_signal",
    "signal_stats",
    "sample_noise",
    "measure",
    "save_signal_csv",
    "load_signal_csv",
    "save_measurement",
    "load_measurement",
]

PHASE_MODES = ("positive_real", "uniform_phase")


@dataclass(frozen=True, eq=False)
class SparseSignal:
    """A k-sparse vector in C^p stored as (support, values)."""

    p: int
    support: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.complex128)
        if support.ndim != 1 or values.shape != support.shape:
            raise InvalidArgumentError("support and values must be aligned 1-D arrays")
        if support.size > self.p:
            raise InvalidArgumentError("k exceeds p")
        if support.size:
            if support[0] < 0 or support[-1] >= self.p:
                raise InvalidArgumentError("support index out of range")
            if np.any(np.diff(support) <= 0):
                raise InvalidArgumentError("support must be strictly increasing")
            if np.any(values == 0):
                raise InvalidArgumentError("nonzero values required on the support")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "values", values)

    @property
    def k(self):
        return int(self.support.size)

    @property
    def energy(self):
        return float(np.sum(np.abs(self.values) ** 2))

    @property
    def beta_min(self):
        return float(np.min(np.abs(self.values)))

    @property
    def mar(self):
        return self.beta_min ** 2 * self.k / self.energy

    def dense(self):
        beta = np.zeros(self.p, dtype=np.complex128)
        beta[self.support] = self.values
        return beta

    @classmethod
    def from_dense(cls, beta, tol=0.0):
        beta = np.asarray(beta, dtype=np.complex128)
        support = np.flatnonzero(np.abs(beta) > tol)
        return cls(beta.size, support, beta[support])


@dataclass(frozen=True)
class SignalStats:
    mar: float
    lar: np.ndarray
    energy: float
    snr: float | None = None
    snr_min: float | None = None


@dataclass(frozen=True, eq=False)
class Measurement:
    y: np.ndarray
    sigma2: float
    noise: np.ndarray | None = None

    @property
    def n(self):
        return int(self.y.size)


def draw_ordered_prefix(p, k, seed=None):
    """First k entries of a uniformly random permutation of range(p).

    Partial Fisher-Yates over a sparse swap table, so the cost is O(k)
    regardless of p.
    """
    p, k = int(p), int(k)
    if not 0 <= k <= p:
        raise InvalidArgumentError(f"need 0 <= k <= p, got k={k}, p={p}")
    rng = np.random.default_rng(seed)
    swaps = {}
    out = np.empty(k, dtype=np.int64)
    for i in range(k):
        j = int(rng.integers(i, p))
        out[i] = swaps.get(j, j)
        swaps[j] = swaps.get(i, i)
    return out


def draw_support(p, k, seed=None):
    """Uniformly random k-subset of range(p), sorted."""
    return np.sort(draw_ordered_prefix(p, k, seed))


def make_signal(p, support, target_mar=1.0, total_energy=1.0,
                phase_mode="uniform_phase", seed=None):
    """Sparse signal with a prescribed minimum-to-average ratio and energy.

    Two magnitude levels are used: the last support index gets ``a`` and the
    other k - 1 entries get ``a * sqrt((k/target_mar - 1)/(k - 1))``, which
    makes MAR = target_mar and ||beta||^2 = total_energy exactly. With k = 1
    the MAR is 1 whatever the target.
    """
    support = np.sort(np.asarray(support, dtype=np.int64))
    k = support.size
    if not 0.0 < target_mar <= 1.0:
        raise InvalidArgumentError(f"target_mar must lie in (0, 1], got {target_mar}")
    if total_energy <= 0:
        raise InvalidArgumentError("total_energy must be positive")
    if k < 1:
        raise InvalidArgumentError("support must be non-empty")
    if phase_mode not in PHASE_MODES:
        raise InvalidArgumentError(f"phase_mode must be one of {PHASE_MODES}")

    a = np.sqrt(total_energy * target_mar / k)
    mags = np.empty(k)
    if k == 1:
        mags[0] = np.sqrt(total_energy)
    else:
        mags[:-1] = a * np.sqrt((k / target_mar - 1.0) / (k - 1))
        mags[-1] = a
    if phase_mode == "uniform_phase":
        rng = np.random.default_rng(seed)
        values = mags * np.exp(2j * np.pi * rng.random(k))
    else:
        values = mags.astype(np.complex128)
    return SparseSignal(p, support, values)


def signal_stats(beta, n, sigma2=0.0):
    """MAR, LAR_1..LAR_k, energy and (for sigma2 > 0) SNR and SNR_min.

    The expected noise energy is n * sigma2, so SNR = ||beta||^2 / (n sigma2).
    """
    if beta.k == 0:
        raise InvalidArgumentError("signal has empty support")
    mags2 = np.sort(np.abs(beta.values) ** 2)[::-1]
    energy = float(mags2.sum())
    lar = mags2 * beta.k / energy
    mar = float(lar[-1])
    snr = snr_min = None
    if sigma2 > 0:
        snr = energy / (n * sigma2)
        snr_min = snr * mar
    return SignalStats(mar=mar, lar=lar, energy=energy, snr=snr, snr_min=snr_min)


def sample_noise(n, sigma2, seed=None):
    """CN(0, sigma2 I): real and imaginary parts i.i.d. N(0, sigma2/2)."""
    if sigma2 < 0:
        raise InvalidArgumentError("sigma2 must be non-negative")
    if sigma2 == 0:
        return np.zeros(n, dtype=np.complex128)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((2, n))
    return np.sqrt(sigma2 / 2.0) * (z[0] + 1j * z[1])


def measure(X, beta, eta=None, sigma2=0.0):
    """y = X beta + eta."""
    if beta.p != X.p:
        raise InvalidArgumentError(f"signal length {beta.p} does not match frame p={X.p}")
    if beta.k and X.matrix is None:
        y = X.columns(beta.support) @ beta.values
    else:
        y = X.apply(beta.dense())
    if eta is not None:
        eta = np.asarray(eta, dtype=np.complex128)
        if eta.shape != (X.n,):
            raise InvalidArgumentError(f"noise must have length {X.n}")
        y = y + eta
    return Measurement(y=y, sigma2=sigma2, noise=eta)


def save_signal_csv(path, beta):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for i, v in zip(beta.support, beta.values):
            w.writerow([int(i), repr(float(v.real)), repr(float(v.imag))])


def load_signal_csv(path, p):
    idx, vals = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0] == "index":
                continue
            idx.append(int(row[0]))
            vals.append(float(row[1]) + 1j * float(row[2]))
    order = np.argsort(idx)
    return SparseSignal(p, np.asarray(idx, dtype=np.int64)[order],
                        np.asarray(vals, dtype=np.complex128)[order])


def save_measurement(path, y):
    y = np.asarray(y, dtype=np.complex128)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im"])
        for z in y:
            w.writerow([repr(float(z.real)), repr(float(z.imag))])


def load_measurement(path):
    vals = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0] == "re":
                continue
            vals.append(float(row[0]) + 1j * float(row[1]))
    if not vals:
        raise InvalidArgumentError(f"{path}: no measurement entries")
    return np.asarray(vals, dtype=np.complex128)
