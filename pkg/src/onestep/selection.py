"""One-step thresholding: thresholds, model selection, recovery, and guarantees.

All logarithms are natural logarithms. Indices are 0-based.
"""

import json
import math
import warnings
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from . import numkit
from .exceptions import InvalidArgumentError, OverSelectionError

__all__ = [
    "ThresholdSpec",
    "SelectionResult",
    "RecoveryResult",
    "GuaranteeParams",
    "MarFloor",
    "ost_threshold",
    "recovery_threshold",
    "optimal_t",
    "signal_proxy",
    "threshold_proxy",
    "top_k",
    "ost_select",
    "sost_select",
    "ost_recover",
    "required_measurements",
    "required_measurements_sost",
    "mar_floor",
    "mar_floor_sost",
    "guaranteed_detections",
    "recovery_sparsity_cap",
    "T_PARTIAL",
]

DEFAULT_C = 10.0
# t = (sqrt 2 - 1)/sqrt 2 balances the two threshold branches when c = 2t
T_PARTIAL = (math.sqrt(2.0) - 1.0) / math.sqrt(2.0)
_E_HALF = 1.0 - math.exp(-0.5)
_SMALL_P = 128


def _warn_small_p(p):
    if p < _SMALL_P:
        warnings.warn(f"guarantee assumes p >= {_SMALL_P}, got p={p}", stacklevel=3)


@dataclass(frozen=True)
class ThresholdSpec:
    lam: float
    variant: str
    c: float
    mu: float
    p: int
    t: float | None = None
    n: int | None = None
    snr: float | None = None
    sigma2: float | None = None
    y_norm: float | None = None
    critical_c: float | None = None

    def scaled(self, factor):
        """Same ingredients, threshold multiplied by ``factor``."""
        d = asdict(self)
        d["lam"] = self.lam * factor
        return ThresholdSpec(**d)

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass(frozen=True, eq=False)
class SelectionResult:
    proxy: np.ndarray
    selected: np.ndarray
    lam: float | None = None
    k: int | None = None

    def to_dict(self):
        d = {"index_base": 0, "selected": [int(i) for i in self.selected]}
        if self.lam is not None:
            d["lambda"] = float(self.lam)
        if self.k is not None:
            d["k"] = int(self.k)
        return d

    def to_json(self):
        return json.dumps(self.to_dict())


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    beta_hat: np.ndarray
    selected: np.ndarray
    residual: float
    lam: float | None = None

    def to_dict(self):
        d = {
            "index_base": 0,
            "selected": [int(i) for i in self.selected],
            "residual": float(self.residual),
            "values": [[float(self.beta_hat[i].real), float(self.beta_hat[i].imag)]
                       for i in self.selected],
        }
        if self.lam is not None:
            d["lambda"] = float(self.lam)
        return d

    def to_json(self):
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class GuaranteeParams:
    """Constants of the guarantees, with mu written as c1 * n^(-1/gamma)."""

    c1: float = 1.0
    gamma: float = 2.0
    c3: float = 37.0 * math.e
    c4: float = 43.0
    c4_sost: float = math.sqrt(800.0)

    def __post_init__(self):
        if self.c1 <= 0:
            raise InvalidArgumentError("c1 must be positive")
        if not (self.gamma == 0 or self.gamma >= 2):
            raise InvalidArgumentError("gamma must be 0 or >= 2")

    @property
    def c2(self):
        return (20.0 * self.c1) ** 2


class MarFloor(NamedTuple):
    value: float
    sparsity_ok: bool  # k <= n / (2 ln p)


def _check_t(t):
    if not 0.0 < t < 1.0:
        raise InvalidArgumentError(f"t must lie strictly inside (0, 1), got {t}")


def ost_threshold(mu, n, p, snr, sigma2, t=0.5, c=DEFAULT_C):
    """lambda = max{c mu sqrt(n snr)/t, sqrt(2)/(1 - t)} * sqrt(2 sigma2 ln p).

    ``c = 10`` carries the guarantee; ``c = 2 t`` reproduces the empirical
    regime used for the partial-selection experiments.
    """
    _check_t(t)
    if sigma2 <= 0 or snr <= 0:
        raise InvalidArgumentError("sigma2 and snr must be positive")
    if p < 2:
        raise InvalidArgumentError("p must be at least 2")
    first = c * mu * math.sqrt(n * snr) / t
    second = math.sqrt(2.0) / (1.0 - t)
    lam = max(first, second) * math.sqrt(2.0 * sigma2 * math.log(p))
    return ThresholdSpec(lam=lam, variant="model_selection", c=c, mu=mu, p=p,
                         t=t, n=n, snr=snr, sigma2=sigma2)


def recovery_threshold(mu, y_norm, p, c=DEFAULT_C):
    """lambda = c mu ||y|| sqrt(2 ln p / (1 - e^{-1/2})).

    Since every proxy entry obeys |f_i| <= ||y||, any c at or above
    ``critical_c = 1/(mu sqrt(2 ln p/(1 - e^{-1/2})))`` selects nothing; the
    value is reported on the returned spec.
    """
    if p < 2:
        raise InvalidArgumentError("p must be at least 2")
    if y_norm < 0:
        raise InvalidArgumentError("y_norm must be non-negative")
    root = math.sqrt(2.0 * math.log(p) / _E_HALF)
    lam = c * mu * y_norm * root
    critical = math.inf if mu == 0 else 1.0 / (mu * root)
    return ThresholdSpec(lam=lam, variant="recovery", c=c, mu=mu, p=p,
                         y_norm=y_norm, critical_c=critical)


def _golden_min(fun, lo, hi, tol=1e-6):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = fun(x1), fun(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = fun(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = fun(x2)
    x = 0.5 * (a + b)
    # the endpoints are admissible too; keep whichever is best
    return min((lo, x, hi), key=fun)


def _t_objective(snr, mar, k, p, c2, gamma):
    base = 2.0 * k * math.log(p)

    def obj(t):
        noise_term = 8.0 * (1.0 - t) ** -2 * base / (snr * mar)
        coh_term = (c2 * t ** -2 * base / mar) ** (gamma / 2.0)
        return max(noise_term, coh_term)

    return obj


def optimal_t(snr, mar, k, p, c2, gamma, lo=1e-3, hi=0.999):
    """Golden-section minimizer of the measurement-count objective over t."""
    if not (gamma == 0 or gamma >= 2):
        raise InvalidArgumentError("gamma must be 0 or >= 2")
    return _golden_min(_t_objective(snr, mar, k, p, c2, gamma), lo, hi)


def signal_proxy(X, y):
    """f = X^H y."""
    return X.adjoint(y)


def threshold_proxy(f, lam):
    """Indices with |f_i| > lam (strict), ascending."""
    return np.flatnonzero(np.abs(f) > lam)


def top_k(f, k):
    """Indices of the k largest |f_i|, ties broken toward the lower index; ascending."""
    k = int(k)
    if not 0 <= k <= f.size:
        raise InvalidArgumentError(f"need 0 <= k <= p, got k={k}, p={f.size}")
    order = np.argsort(-np.abs(f), kind="stable")
    return np.sort(order[:k])


def ost_select(X, y, lam):
    if lam < 0:
        raise InvalidArgumentError("threshold must be non-negative")
    f = signal_proxy(X, y)
    return SelectionResult(proxy=f, selected=threshold_proxy(f, lam), lam=float(lam))


def sost_select(X, y, k):
    f = signal_proxy(X, y)
    return SelectionResult(proxy=f, selected=top_k(f, k), k=int(k))


def _solve_on(X, y, selected):
    beta_hat = np.zeros(X.p, dtype=np.complex128)
    if selected.size:
        A = X.columns(selected)
        beta_hat[selected] = numkit.least_squares(A, y)
        residual = float(np.linalg.norm(y - A @ beta_hat[selected]))
    else:
        residual = float(np.linalg.norm(y))
    return beta_hat, residual


def ost_recover(X, y, lam=None, k=None):
    """Threshold the proxy, then least squares on the kept columns.

    Pass ``lam`` for OST or ``k`` for the sorted variant. Keeping more than n
    columns raises :class:`OverSelectionError`; keeping none returns zero with
    residual ||y||.
    """
    if (lam is None) == (k is None):
        raise InvalidArgumentError("give exactly one of lam or k")
    y = np.asarray(y, dtype=np.complex128)
    f = signal_proxy(X, y)
    if lam is not None:
        if lam < 0:
            raise InvalidArgumentError("threshold must be non-negative")
        selected = threshold_proxy(f, lam)
    else:
        selected = top_k(f, k)
    if selected.size > X.n:
        raise OverSelectionError(
            f"threshold kept {selected.size} columns but there are only {X.n} measurements",
            selected=selected)
    beta_hat, residual = _solve_on(X, y, selected)
    return RecoveryResult(beta_hat=beta_hat, selected=selected, residual=residual,
                          lam=None if lam is None else float(lam))


def required_measurements(k, p, snr, mar, params, t):
    """Measurement count sufficient for exact OST selection.

    max{2k ln p, 8(1-t)^-2 2k ln p/(snr mar), (c2 t^-2 2k ln p/mar)^(gamma/2)}.
    With gamma = 0 the last term is 1. ``p`` is taken as given: for Gabor
    frames, where p = n^2, callers iterate.
    """
    _check_t(t)
    _warn_small_p(p)
    base = 2.0 * k * math.log(p)
    obj = _t_objective(snr, mar, k, p, params.c2, params.gamma)
    return max(base, obj(t))


def required_measurements_sost(k, p, snr, mar, params):
    """Sorted variant: the same bound minimized over t."""
    _warn_small_p(p)
    t = optimal_t(snr, mar, k, p, params.c2, params.gamma)
    base = 2.0 * k * math.log(p)
    return max(base, _t_objective(snr, mar, k, p, params.c2, params.gamma)(t))


def _mar_floor_value(n, p, k, snr, mu, t):
    base = 2.0 * k * math.log(p)
    return max(8.0 * (1.0 - t) ** -2 * base / (n * snr),
               400.0 * t ** -2 * base * mu ** 2)


def mar_floor(n, p, k, snr, mu, t):
    """Smallest MAR (exclusive) for which exact OST selection is guaranteed.

    The same right-hand side bounds LAR_M for partial selection.
    """
    _check_t(t)
    _warn_small_p(p)
    ok = k <= n / (2.0 * math.log(p))
    return MarFloor(_mar_floor_value(n, p, k, snr, mu, t), bool(ok))


def mar_floor_sost(n, p, k, snr, mu, lo=1e-3, hi=0.999):
    _warn_small_p(p)
    t = _golden_min(lambda s: _mar_floor_value(n, p, k, snr, mu, s), lo, hi)
    ok = k <= n / (2.0 * math.log(p))
    return MarFloor(_mar_floor_value(n, p, k, snr, mu, t), bool(ok))


def guaranteed_detections(stats, floor):
    """Largest M with LAR_M > floor (0 if none)."""
    lar = np.asarray(stats.lar)
    above = np.flatnonzero(lar > floor)
    return int(above[-1] + 1) if above.size else 0


def recovery_sparsity_cap(p, spectral_norm, mu, mar, params=None, sost=False):
    """min{p/(c3^2 ||X||^2 ln p), mu^-2 MAR/(c4^2 ln p)}; c4 -> sqrt(800) for SOST."""
    params = params or GuaranteeParams()
    _warn_small_p(p)
    logp = math.log(p)
    c4 = params.c4_sost if sost else params.c4
    first = p / (params.c3 ** 2 * spectral_norm ** 2 * logp)
    second = math.inf if mu == 0 else mar / (mu ** 2 * c4 ** 2 * logp)
    return min(first, second)
