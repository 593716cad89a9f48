"""Seeded Monte Carlo harness for selection/recovery sweeps and empirical checks.

Per-trial seeds come from ``numpy.random.SeedSequence`` keyed by
(master seed, k, trial, threshold scale), so results do not depend on the
order in which trials run or on the number of worker threads.
"""

import csv
import io
import json
import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy import stats

from . import frames, numkit, selection, signals
from .exceptions import ConvergenceError, InvalidArgumentError, OverSelectionError

__all__ = [
    "ExperimentConfig",
    "TrialRecord",
    "ExperimentSummary",
    "SweepResult",
    "build_frame",
    "frame_mu",
    "trial_seed",
    "run_model_selection_trial",
    "run_recovery_trial",
    "run_sweep",
    "run_recovery_sweep",
    "summarize",
    "write_csv",
    "records_to_csv",
    "stoc_statistics",
    "stoc_violation_estimate",
    "submatrix_conditioning_estimate",
    "gaussian_coherence_check",
    "noise_proxy_tail_check",
    "binomial_se",
    "wilson_interval",
    "is_nonincreasing_trend",
    "CSV_COLUMNS",
]

ALGORITHMS = ("ost", "sost", "ost_recover")
RECOVERY_TOL = 1e-6
CSV_COLUMNS = ("k", "trial", "seed", "f_d", "f_fa", "exact", "subset",
               "recovered", "wall_time_ns")


@dataclass
class ExperimentConfig:
    """A sweep over model orders. Mirrors the JSON config document.

    ``threshold`` keys: ``t``, ``c`` (a number or ``"auto2t"`` for c = 2t) and
    ``scale`` for OST; ``c`` for recovery; unused for SOST. ``energy`` fixes
    ||beta||^2 in noiseless runs (default k); otherwise the energy follows from
    the SNR as snr * n * sigma2.
    """

    frame: dict
    k: list
    algorithm: str = "sost"
    mar: float = 1.0
    snr_db: float = 10.0
    sigma2: float = 1e-2
    threshold: dict = field(default_factory=dict)
    trials: int = 200
    seed: int = 0
    phase_mode: str = "uniform_phase"
    energy: float | None = None
    timing: bool = False

    def __post_init__(self):
        self.k = [int(v) for v in self.k]
        self.validate()

    def validate(self):
        if self.trials < 1:
            raise InvalidArgumentError("trials must be >= 1")
        if not self.k:
            raise InvalidArgumentError("k sweep must be non-empty")
        if min(self.k) < 1:
            raise InvalidArgumentError("every k must be >= 1")
        if self.algorithm not in ALGORITHMS:
            raise InvalidArgumentError(f"algorithm must be one of {ALGORITHMS}")
        if not 0.0 < self.mar <= 1.0:
            raise InvalidArgumentError("mar must lie in (0, 1]")
        if self.sigma2 < 0:
            raise InvalidArgumentError("sigma2 must be non-negative")
        if self.algorithm == "ost" and self.sigma2 == 0:
            raise InvalidArgumentError("the OST threshold needs sigma2 > 0")
        if self.phase_mode not in signals.PHASE_MODES:
            raise InvalidArgumentError(f"phase_mode must be one of {signals.PHASE_MODES}")
        if self.algorithm == "ost":
            t = self.threshold.get("t", 0.5)
            if not 0 < t < 1:
                raise InvalidArgumentError("threshold.t must lie in (0, 1)")
            c = self.threshold.get("c", selection.DEFAULT_C)
            if not (c == "auto2t" or (isinstance(c, (int, float)) and c >= 0)):
                raise InvalidArgumentError("threshold.c must be a non-negative number or 'auto2t'")
        if "type" not in self.frame:
            raise InvalidArgumentError("frame spec needs a 'type'")

    @property
    def snr(self):
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def scale(self):
        return float(self.threshold.get("scale", 1.0))

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")
        missing = {"frame", "k"} - set(d)
        if missing:
            raise InvalidArgumentError(f"missing config keys: {sorted(missing)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise InvalidArgumentError(str(exc)) from exc

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidArgumentError(f"{path}: {exc}") from exc
        return cls.from_dict(d)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class TrialRecord:
    k: int
    trial: int
    seed: int
    f_d: float
    f_fa: float
    exact: bool
    subset: bool
    recovered: bool
    wall_time_ns: int
    n_selected: int = 0
    overselected: bool = False


@dataclass
class ExperimentSummary:
    """Per-k aggregates, each list aligned with ``k``."""

    k: list
    trials: int
    f_d_mean: list
    f_d_se: list
    f_fa_mean: list
    f_fa_se: list
    exact_rate: list
    subset_rate: list
    recovered_rate: list
    wall_time_mean_ns: list
    overselected: list
    threshold: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def at(self, k):
        """Row for one model order as a flat dict."""
        i = self.k.index(k)
        return {name: getattr(self, name)[i] for name in
                ("f_d_mean", "f_d_se", "f_fa_mean", "f_fa_se", "exact_rate",
                 "subset_rate", "recovered_rate", "wall_time_mean_ns", "overselected")}


@dataclass
class SweepResult:
    summary: ExperimentSummary
    records: list


# -- frame specs ---------------------------------------------------------------

def build_frame(spec):
    """Frame from a JSON-style spec.

    ``{"type": "alltop", "n": N}``, ``{"type": "gaussian", "n": N, "p": P,
    "seed": S, "normalize": true}``, ``{"type": "identity", "n": N}`` or
    ``{"type": "file", "path": PATH}``. Alltop and Gabor specs take an
    optional ``"form"`` (explicit/operator).
    """
    kind = spec.get("type")
    if kind == "alltop":
        return frames.build_gabor_frame(frames.alltop_seed(spec["n"]), form=spec.get("form"))
    if kind == "gabor":
        return frames.build_gabor_frame(frames.load_seed(spec["seed_file"]), form=spec.get("form"))
    if kind == "gaussian":
        return frames.gaussian_design(spec["n"], spec["p"], spec.get("seed", 0),
                                      normalize=spec.get("normalize", True))
    if kind == "identity":
        return frames.identity_frame(spec["n"])
    if kind == "file":
        return frames.load_frame(spec["path"])
    raise InvalidArgumentError(f"unknown frame type {kind!r}")


def frame_mu(X):
    """Worst-case coherence used in thresholds: closed form for Alltop frames."""
    if frames.is_alltop(X):
        return 1.0 / math.sqrt(X.n)
    return frames.worst_case_coherence(X)


def trial_seed(master, k, trial, scale=1.0):
    """64-bit seed for one trial, a hash of (master, k, trial, threshold scale)."""
    scale_key = int(round(scale * 1_000_000))
    ss = np.random.SeedSequence(int(master), spawn_key=(int(k), int(trial), scale_key))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


# -- trials --------------------------------------------------------------------

@dataclass(frozen=True)
class _Context:
    cfg: ExperimentConfig
    frame: frames.Frame
    mu: float
    lam: float | None
    threshold: dict


def _prepare(cfg, frame=None):
    X = frame if frame is not None else build_frame(cfg.frame)
    mu = frame_mu(X)
    lam = None
    info = {"algorithm": cfg.algorithm, "mu": mu}
    if cfg.algorithm == "ost":
        t = cfg.threshold.get("t", 0.5)
        c = cfg.threshold.get("c", selection.DEFAULT_C)
        c = 2.0 * t if c == "auto2t" else float(c)
        spec = selection.ost_threshold(mu, X.n, X.p, cfg.snr, cfg.sigma2, t=t, c=c)
        lam = spec.lam * cfg.scale
        info.update(spec.to_dict())
        info["lam_base"] = spec.lam
        info["scale"] = cfg.scale
        info["lam"] = lam
    elif cfg.algorithm == "ost_recover":
        info["c"] = float(cfg.threshold.get("c", selection.DEFAULT_C))
        info["scale"] = cfg.scale
    return _Context(cfg, X, mu, lam, info)


def _signal_energy(cfg, n, k):
    if cfg.sigma2 > 0:
        return cfg.snr * n * cfg.sigma2
    return float(cfg.energy) if cfg.energy is not None else float(k)


def _draw_problem(ctx, k, rng):
    cfg, X = ctx.cfg, ctx.frame
    support = signals.draw_support(X.p, k, rng)
    beta = signals.make_signal(X.p, support, cfg.mar, _signal_energy(cfg, X.n, k),
                               cfg.phase_mode, rng)
    eta = signals.sample_noise(X.n, cfg.sigma2, rng)
    return beta, signals.measure(X, beta, eta, cfg.sigma2)


def _scores(support, selected):
    k = support.size
    hits = np.intersect1d(support, selected, assume_unique=True).size
    f_d = hits / k
    f_fa = (selected.size - hits) / selected.size if selected.size else 0.0
    subset = hits == selected.size
    exact = subset and hits == k
    return f_d, f_fa, bool(exact), bool(subset)


def run_model_selection_trial(cfg, k, seed, ctx=None):
    """One draw of (support, signal, noise) followed by OST or SOST."""
    ctx = ctx or _prepare(cfg)
    rng = np.random.default_rng(seed)
    beta, meas = _draw_problem(ctx, k, rng)
    t0 = time.perf_counter_ns()
    if cfg.algorithm == "sost":
        res = selection.sost_select(ctx.frame, meas.y, k)
    else:
        res = selection.ost_select(ctx.frame, meas.y, ctx.lam)
    elapsed = time.perf_counter_ns() - t0
    f_d, f_fa, exact, subset = _scores(beta.support, res.selected)
    return dict(f_d=f_d, f_fa=f_fa, exact=exact, subset=subset, recovered=False,
                wall_time_ns=elapsed if cfg.timing else 0,
                n_selected=int(res.selected.size), overselected=False)


def run_recovery_trial(cfg, k, seed, ctx=None):
    """Noiseless measurement, recovery threshold, least squares on the kept set."""
    ctx = ctx or _prepare(cfg)
    rng = np.random.default_rng(seed)
    beta, meas = _draw_problem(ctx, k, rng)
    c = ctx.threshold["c"]
    t0 = time.perf_counter_ns()
    lam = selection.recovery_threshold(ctx.mu, np.linalg.norm(meas.y), ctx.frame.p, c=c).lam
    lam *= ctx.cfg.scale
    overselected = False
    try:
        res = selection.ost_recover(ctx.frame, meas.y, lam)
        selected = res.selected
        err = float(np.max(np.abs(res.beta_hat - beta.dense())))
    except OverSelectionError as exc:
        overselected = True
        selected = exc.selected
        err = math.inf
    elapsed = time.perf_counter_ns() - t0
    f_d, f_fa, exact, subset = _scores(beta.support, selected)
    return dict(f_d=f_d, f_fa=f_fa, exact=exact, subset=subset,
                recovered=bool(err < RECOVERY_TOL),
                wall_time_ns=elapsed if cfg.timing else 0,
                n_selected=int(selected.size), overselected=overselected)


# -- sweeps ----------------------------------------------------------------------

def _mean_se(x):
    x = np.asarray(x, dtype=np.float64)
    mean = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return mean, se


def summarize(records, ks, trials, threshold=None):
    """Aggregate records per k; independent of record order."""
    by_k = {k: [] for k in ks}
    for r in sorted(records, key=lambda r: (r.k, r.trial)):
        by_k[r.k].append(r)
    out = {name: [] for name in ("f_d_mean", "f_d_se", "f_fa_mean", "f_fa_se", "exact_rate",
                                 "subset_rate", "recovered_rate", "wall_time_mean_ns",
                                 "overselected")}
    for k in ks:
        rs = by_k[k]
        m, s = _mean_se([r.f_d for r in rs])
        out["f_d_mean"].append(m)
        out["f_d_se"].append(s)
        m, s = _mean_se([r.f_fa for r in rs])
        out["f_fa_mean"].append(m)
        out["f_fa_se"].append(s)
        out["exact_rate"].append(float(np.mean([r.exact for r in rs])))
        out["subset_rate"].append(float(np.mean([r.subset for r in rs])))
        out["recovered_rate"].append(float(np.mean([r.recovered for r in rs])))
        out["wall_time_mean_ns"].append(float(np.mean([r.wall_time_ns for r in rs])))
        out["overselected"].append(int(sum(r.overselected for r in rs)))
    return ExperimentSummary(k=list(ks), trials=trials, threshold=dict(threshold or {}), **out)


def _fmt_float(x):
    return repr(float(x))


def records_to_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in sorted(records, key=lambda r: (r.k, r.trial)):
        w.writerow([r.k, r.trial, r.seed, _fmt_float(r.f_d), _fmt_float(r.f_fa),
                    int(r.exact), int(r.subset), int(r.recovered), r.wall_time_ns])
    return buf.getvalue()


def write_csv(path, records):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(records_to_csv(records))


def _run(cfg, trial_fn, out_dir=None, threads=1, frame=None):
    ctx = _prepare(cfg, frame)
    tasks = [(k, i, trial_seed(cfg.seed, k, i, cfg.scale))
             for k in cfg.k for i in range(cfg.trials)]

    def one(task):
        k, i, s = task
        return TrialRecord(k=k, trial=i, seed=s, **trial_fn(cfg, k, s, ctx))

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(one, tasks))
    else:
        records = [one(t) for t in tasks]

    summary = summarize(records, cfg.k, cfg.trials, ctx.threshold)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_csv(os.path.join(out_dir, "trials.csv"), records)
        with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
            json.dump(summary.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return SweepResult(summary=summary, records=records)


def run_sweep(cfg, out_dir=None, threads=1, frame=None):
    """Run every (k, trial) of ``cfg``; optionally write trials.csv and summary.json.

    Recovery configs are routed to :func:`run_recovery_sweep`.
    """
    if cfg.algorithm == "ost_recover":
        return run_recovery_sweep(cfg, out_dir=out_dir, threads=threads, frame=frame)
    return _run(cfg, run_model_selection_trial, out_dir, threads, frame)


def run_recovery_sweep(cfg, out_dir=None, threads=1, frame=None):
    if cfg.algorithm != "ost_recover":
        raise InvalidArgumentError("recovery sweep needs algorithm 'ost_recover'")
    if cfg.sigma2 != 0:
        raise InvalidArgumentError("recovery sweeps are noiseless: set sigma2 = 0")
    return _run(cfg, run_recovery_trial, out_dir, threads, frame)


def is_nonincreasing_trend(values, window=3, tol=0.0):
    """True when the centered moving average of ``values`` never rises by more than tol."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < window:
        smooth = v
    else:
        smooth = np.convolve(v, np.ones(window) / window, mode="valid")
    return bool(np.all(np.diff(smooth) <= tol))


# -- binomial helpers --------------------------------------------------------------

def binomial_se(prob, trials):
    """Standard error of an empirical frequency under success probability ``prob``."""
    prob = min(max(prob, 0.0), 1.0)
    return math.sqrt(prob * (1.0 - prob) / trials)


def wilson_interval(successes, trials, confidence=0.95):
    ci = stats.binomtest(int(successes), int(trials)).proportion_ci(
        confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


# -- statistical orthogonality ------------------------------------------------------

@dataclass(frozen=True)
class StocEstimate:
    k: int
    epsilon: float
    trials: int
    stoc1_violations: int
    stoc2_violations: int

    @property
    def stoc1_rate(self):
        return self.stoc1_violations / self.trials

    @property
    def stoc2_rate(self):
        return self.stoc2_violations / self.trials

    def to_dict(self):
        d = asdict(self)
        d.update(stoc1_rate=self.stoc1_rate, stoc2_rate=self.stoc2_rate)
        return d


def stoc_statistics(X, prefix, z):
    """(||(X_P^H X_P - I) z||_inf, ||X_{P^c}^H X_P z||_inf) for an ordered prefix P."""
    prefix = np.asarray(prefix, dtype=np.int64)
    A = X.columns(prefix)
    r = A.conj().T @ (A @ z) - z
    f = X.adjoint(A @ z)
    mask = np.ones(X.p, dtype=bool)
    mask[prefix] = False
    off = float(np.max(np.abs(f[mask]))) if mask.any() else 0.0
    return float(np.max(np.abs(r))), off


def stoc_violation_estimate(X, k, z=None, epsilon=None, trials=2000, seed=0, mu=None):
    """Frequency with which a random support breaks either StOC inequality.

    ``z`` defaults to the all-ones (unimodal) vector, ``epsilon`` to
    10 mu sqrt(2 ln p). A violation is a statistic strictly above
    epsilon * ||z||_2.
    """
    k = int(k)
    if not 1 <= k <= X.p:
        raise InvalidArgumentError("need 1 <= k <= p")
    z = np.ones(k, dtype=np.complex128) if z is None else np.asarray(z, dtype=np.complex128)
    if z.shape != (k,):
        raise InvalidArgumentError("z must have length k")
    if epsilon is None:
        mu = frame_mu(X) if mu is None else mu
        epsilon = 10.0 * mu * math.sqrt(2.0 * math.log(X.p))
    if epsilon < 0:
        raise InvalidArgumentError("epsilon must be non-negative")
    bound = epsilon * np.linalg.norm(z)
    rng = np.random.default_rng(seed)
    v1 = v2 = 0
    for _ in range(trials):
        prefix = signals.draw_ordered_prefix(X.p, k, rng)
        s1, s2 = stoc_statistics(X, prefix, z)
        v1 += s1 > bound
        v2 += s2 > bound
    return StocEstimate(k=k, epsilon=float(epsilon), trials=trials,
                        stoc1_violations=int(v1), stoc2_violations=int(v2))


# -- random submatrix conditioning ---------------------------------------------------

@dataclass(frozen=True)
class ConditioningEstimate:
    k: int
    trials: int
    exceedances: int
    threshold: float
    sigma_min: float
    sigma_max: float
    norm_mean: float
    norm_max: float

    @property
    def fraction(self):
        return self.exceedances / self.trials

    def interval(self, confidence=0.95):
        return wilson_interval(self.exceedances, self.trials, confidence)

    def to_dict(self):
        d = asdict(self)
        d["fraction"] = self.fraction
        d["ci95"] = list(self.interval())
        return d


def submatrix_conditioning_estimate(X, k, trials=2000, seed=0):
    """Fraction of random k-column submatrices with ||X_P^H X_P - I||_2 >= e^{-1/2}."""
    k = int(k)
    if not 1 <= k <= X.n:
        raise InvalidArgumentError("need 1 <= k <= n")
    thr = math.exp(-0.5)
    rng = np.random.default_rng(seed)
    hits = 0
    smin, smax = math.inf, 0.0
    norms = np.empty(trials)
    for i in range(trials):
        prefix = signals.draw_ordered_prefix(X.p, k, rng)
        A = X.columns(prefix)
        G = A.conj().T @ A
        D = G - np.eye(k)
        try:
            nrm = numkit.matrix_spectral_norm(D, tol=1e-10, max_iter=2000)
        except ConvergenceError:
            # nearly tied extreme eigenvalues; the Hermitian eigensolver settles it
            nrm = float(np.max(np.abs(np.linalg.eigvalsh(D))))
        norms[i] = nrm
        hits += nrm >= thr
        ev = np.linalg.eigvalsh(G)
        smin = min(smin, math.sqrt(max(ev[0], 0.0)))
        smax = max(smax, math.sqrt(max(ev[-1], 0.0)))
    return ConditioningEstimate(k=k, trials=trials, exceedances=int(hits), threshold=thr,
                                sigma_min=smin, sigma_max=smax,
                                norm_mean=float(norms.mean()), norm_max=float(norms.max()))


# -- Gaussian coherence ----------------------------------------------------------------

@dataclass(frozen=True)
class GaussianCoherenceCheck:
    n: int
    p: int
    draws: int
    mu_bound: float
    nu_bound: float
    mu_exceed: int
    nu_exceed: int
    mu_prob_bound: float
    nu_prob_bound: float
    hypothesis_ok: bool
    mu_max: float
    nu_max: float

    @property
    def mu_exceed_rate(self):
        return self.mu_exceed / self.draws

    @property
    def nu_exceed_rate(self):
        return self.nu_exceed / self.draws

    def mu_ok(self, n_se=3.0):
        return self.mu_exceed_rate <= self.mu_prob_bound + n_se * binomial_se(self.mu_prob_bound, self.draws)

    def nu_ok(self, n_se=3.0):
        return self.nu_exceed_rate <= self.nu_prob_bound + n_se * binomial_se(self.nu_prob_bound, self.draws)

    def to_dict(self):
        d = asdict(self)
        d.update(mu_exceed_rate=self.mu_exceed_rate, nu_exceed_rate=self.nu_exceed_rate,
                 mu_ci95=list(wilson_interval(self.mu_exceed, self.draws)),
                 nu_ci95=list(wilson_interval(self.nu_exceed, self.draws)),
                 mu_ok=self.mu_ok(), nu_ok=self.nu_ok())
        return d


def gaussian_coherence_check(n, p, draws=200, seed=0):
    """Exceedance counts of mu <= sqrt(15 ln p/n) and nu <= sqrt(15 ln p)/n.

    Coherences are taken on the raw i.i.d. N(0, 1/n) matrices. When
    n < 60 ln p or p <= n the bounds are not guaranteed; the run still
    proceeds with ``hypothesis_ok`` False and a warning.
    """
    logp = math.log(p)
    ok = n >= 60.0 * logp and p > n
    if not ok:
        warnings.warn(f"n={n}, p={p} violates p > n >= 60 ln p; bounds are not guaranteed",
                      stacklevel=2)
    mu_bound = math.sqrt(15.0 * logp / n)
    nu_bound = math.sqrt(15.0 * logp) / n
    mu_ex = nu_ex = 0
    mu_max = nu_max = 0.0
    for child in np.random.SeedSequence(seed).spawn(draws):
        raw = frames.gaussian_design(n, p, np.random.default_rng(child), normalize=False).raw
        mu = frames.worst_case_coherence(raw)
        nu = frames.average_coherence(raw)
        mu_ex += mu > mu_bound
        nu_ex += nu > nu_bound
        mu_max, nu_max = max(mu_max, mu), max(nu_max, nu)
    return GaussianCoherenceCheck(n=n, p=p, draws=draws, mu_bound=mu_bound, nu_bound=nu_bound,
                                  mu_exceed=int(mu_ex), nu_exceed=int(nu_ex),
                                  mu_prob_bound=2.0 / p, nu_prob_bound=2.0 / p ** 2,
                                  hypothesis_ok=ok, mu_max=mu_max, nu_max=nu_max)


# -- noise proxy tail ---------------------------------------------------------------------

@dataclass(frozen=True)
class TailCheck:
    p: int
    sigma2: float
    epsilon: float
    trials: int
    exceedances: int
    analytic_bound: float
    max_ratio: float  # largest ||X^H eta||_inf / sigma seen

    @property
    def empirical(self):
        return self.exceedances / self.trials

    def to_dict(self):
        d = asdict(self)
        d["empirical"] = self.empirical
        return d


def tail_bound(p, epsilon):
    """(4p/sqrt(2 pi)) exp(-epsilon^2/2)/epsilon."""
    return 4.0 * p / math.sqrt(2.0 * math.pi) * math.exp(-epsilon ** 2 / 2.0) / epsilon


def noise_proxy_tail_check(X, sigma2, epsilon=None, trials=100_000, seed=0, batch=4096):
    """Empirical Pr(||X^H eta||_inf >= sigma * epsilon) for eta ~ CN(0, sigma2 I).

    ``epsilon`` defaults to 2 sqrt(ln p). With sigma2 = 0 the frequency is
    reported as 0.
    """
    if epsilon is None:
        epsilon = 2.0 * math.sqrt(math.log(X.p))
    if epsilon <= 0:
        raise InvalidArgumentError("epsilon must be positive")
    bound = tail_bound(X.p, epsilon)
    if sigma2 == 0:
        return TailCheck(X.p, 0.0, epsilon, trials, 0, bound, 0.0)
    sigma = math.sqrt(sigma2)
    rng = np.random.default_rng(seed)
    hits = 0
    worst = 0.0
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        z = rng.standard_normal((2, X.n, b))
        eta = math.sqrt(sigma2 / 2.0) * (z[0] + 1j * z[1])
        m = np.max(np.abs(X.adjoint(eta)), axis=0) / sigma
        hits += int(np.count_nonzero(m >= epsilon))
        worst = max(worst, float(m.max()))
        done += b
    return TailCheck(X.p, float(sigma2), float(epsilon), trials, hits, bound, worst)
