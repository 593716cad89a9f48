"""Command-line interface.

Exit codes: 0 ok, 1 check failure, 2 usage, 3 validation, 4 over-selection,
5 I/O. Only JSON goes to stdout; diagnostics go to stderr.
"""

import argparse
import json
import math
import os
import sys
import tempfile
from datetime import datetime, timezone
from importlib import resources

import numpy as np

from . import __version__, experiments, frames, selection, signals
from .exceptions import InvalidArgumentError, OverSelectionError

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_INVALID, EXIT_OVERSELECT, EXIT_IO = 0, 1, 2, 3, 4, 5
SUITES = ("geometry", "stoc", "gaussian", "tails", "conditioning")


class UsageError(Exception):
    pass


def _clean(obj):
    """Make ``obj`` strict-JSON serializable (non-finite floats become strings)."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def _emit(obj):
    sys.stdout.write(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def _atomic_save(path, writer):
    """Call ``writer(tmp_path)`` then move the file into place."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write(path, text):
    def writer(tmp):
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    _atomic_save(path, writer)


def _now():
    return datetime.now(timezone.utc).isoformat()


def _manifest(command, config, seed, started, outputs):
    return {"command": command, "config": config, "version": __version__, "seed": seed,
            "started": started, "finished": _now(), "outputs": outputs}


# -- frame selection ----------------------------------------------------------------

def _add_frame_args(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--alltop", type=int, metavar="N", help="Alltop Gabor frame, prime N >= 5")
    g.add_argument("--gaussian", type=int, nargs=2, metavar=("N", "P"),
                   help="i.i.d. N(0, 1/N) design")
    g.add_argument("--frame-file", metavar="PATH", help="frame text file")
    g.add_argument("--seed-file", metavar="PATH", help="Gabor seed file ('re im' per line)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed for --gaussian")
    p.add_argument("--normalize", action="store_true", help="unit-norm columns for --gaussian")
    p.add_argument("--form", choices=("explicit", "operator"), default=None,
                   help="Gabor frame storage")


def _frame_spec(args):
    if args.alltop is not None:
        return {"type": "alltop", "n": args.alltop, "form": args.form}
    if args.gaussian is not None:
        n, p = args.gaussian
        return {"type": "gaussian", "n": n, "p": p, "seed": args.seed, "normalize": args.normalize}
    if args.frame_file is not None:
        return {"type": "file", "path": args.frame_file}
    return {"type": "gabor", "seed_file": args.seed_file, "form": args.form}


# -- commands ------------------------------------------------------------------------

def cmd_coherence(args):
    X = experiments.build_frame(_frame_spec(args))
    rep = frames.coherence_report(X, analytic=args.analytic)
    out = rep.to_dict()
    out.update(cp_holds=rep.cp_holds, scp_holds=rep.scp_holds)
    _emit(out)
    return EXIT_OK


def cmd_frame(args):
    started = _now()
    X = experiments.build_frame(_frame_spec(args))
    outputs = []
    try:
        if args.out:
            _atomic_save(args.out, lambda path: frames.save_frame(path, X))
            outputs.append(args.out)
        if args.seed_out:
            if X.seed is None:
                raise InvalidArgumentError("only Gabor frames have a seed")
            _atomic_save(args.seed_out, lambda path: frames.save_seed(path, X.seed))
            outputs.append(args.seed_out)
        for path in outputs:
            _atomic_write(path + ".manifest.json", json.dumps(_clean(_manifest(
                "frame", _frame_spec(args), getattr(args, "seed", None), started, [path])),
                indent=2) + "\n")
    except OSError:
        for path in outputs:
            for q in (path, path + ".manifest.json"):
                if os.path.exists(q):
                    os.unlink(q)
        raise
    _emit({"n": X.n, "p": X.p, "kind": X.kind, "outputs": outputs})
    return EXIT_OK


def _snr(args):
    if args.snr is not None and args.snr_db is not None:
        raise UsageError("give --snr or --snr-db, not both")
    if args.snr_db is not None:
        return 10.0 ** (args.snr_db / 10.0)
    return args.snr


def _threshold_mode(args, recover):
    modes = []
    if args.lam is not None:
        modes.append("lambda")
    if args.sost_k is not None:
        modes.append("sost")
    if args.t is not None or args.c is not None or args.sigma2 is not None \
            or args.snr is not None or args.snr_db is not None:
        modes.append("ost")
    if recover and args.recovery_c is not None:
        modes.append("recovery")
    if len(modes) != 1:
        raise UsageError("give exactly one threshold mode: --t/--c/--snr/--sigma2, "
                         "--sost-k, --lambda" + (", or --recovery-c" if recover else ""))
    return modes[0]


def _mu(X):
    return experiments.frame_mu(X)


def _resolve(args, X, y, recover):
    mode = _threshold_mode(args, recover)
    if mode == "lambda":
        return mode, args.lam, {"lam": args.lam, "variant": "fixed"}
    if mode == "sost":
        return mode, None, {"k": args.sost_k, "variant": "sorted"}
    if mode == "recovery":
        spec = selection.recovery_threshold(_mu(X), float(np.linalg.norm(y)), X.p, c=args.recovery_c)
        return mode, spec.lam, spec.to_dict()
    snr = _snr(args)
    if snr is None or args.sigma2 is None:
        raise UsageError("the OST threshold needs --snr (or --snr-db) and --sigma2")
    t = 0.5 if args.t is None else args.t
    if args.c is None:
        c = selection.DEFAULT_C
    elif args.c == "auto2t":
        c = 2.0 * t
    else:
        try:
            c = float(args.c)
        except ValueError:
            raise UsageError(f"--c expects a number or 'auto2t', got {args.c!r}") from None
    spec = selection.ost_threshold(_mu(X), X.n, X.p, snr, args.sigma2, t=t, c=c)
    return mode, spec.lam, spec.to_dict()


def _load_problem(args):
    X = experiments.build_frame(_frame_spec(args))
    y = signals.load_measurement(args.y)
    if y.size != X.n:
        raise InvalidArgumentError(f"measurement has length {y.size}, frame has n={X.n}")
    return X, y


def cmd_select(args):
    X, y = _load_problem(args)
    mode, lam, info = _resolve(args, X, y, recover=False)
    if mode == "sost":
        res = selection.sost_select(X, y, args.sost_k)
    else:
        res = selection.ost_select(X, y, lam)
    out = res.to_dict()
    out["threshold"] = info
    _emit(out)
    return EXIT_OK


def cmd_recover(args):
    X, y = _load_problem(args)
    mode, lam, info = _resolve(args, X, y, recover=True)
    if mode == "sost":
        res = selection.ost_recover(X, y, k=args.sost_k)
    else:
        res = selection.ost_recover(X, y, lam=lam)
    out = res.to_dict()
    out["threshold"] = info
    _emit(out)
    return EXIT_OK


def _load_config(source):
    if os.path.exists(source):
        return experiments.ExperimentConfig.from_json(source)
    name = source if source.endswith(".json") else source + ".json"
    ref = resources.files("onestep") / "configs" / name
    if not ref.is_file():
        raise InvalidArgumentError(f"no config file or bundled config named {source!r}")
    try:
        d = json.loads(ref.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"{name}: {exc}") from exc
    return experiments.ExperimentConfig.from_dict(d)


def cmd_experiment(args):
    started = _now()
    cfg = _load_config(args.config)
    if args.trials is not None:
        cfg.trials = args.trials
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.validate()
    result = experiments.run_sweep(cfg, threads=args.threads)
    summary = result.summary.to_dict()
    written = []
    if args.out:
        try:
            os.makedirs(args.out, exist_ok=True)
            paths = {name: os.path.join(args.out, name)
                     for name in ("trials.csv", "summary.json", "manifest.json")}
            _atomic_write(paths["trials.csv"], experiments.records_to_csv(result.records))
            written.append(paths["trials.csv"])
            _atomic_write(paths["summary.json"],
                          json.dumps(_clean(summary), indent=2, sort_keys=True) + "\n")
            written.append(paths["summary.json"])
            man = _manifest("experiment", cfg.to_dict(), cfg.seed, started, list(written))
            _atomic_write(paths["manifest.json"], json.dumps(_clean(man), indent=2) + "\n")
            written.append(paths["manifest.json"])
        except OSError:
            for path in written:
                if os.path.exists(path):
                    os.unlink(path)
            raise
    _emit(summary)
    return EXIT_OK


# -- verify suites --------------------------------------------------------------------

def _check(name, ok, **detail):
    return {"check": name, "pass": bool(ok), **detail}


def _suite_geometry(args):
    checks = []
    for n in (5, 7, 11, 31):
        X = frames.build_gabor_frame(frames.alltop_seed(n), form="explicit")
        mu = frames.worst_case_coherence(X)
        nu = frames.average_coherence(X)
        snorm = frames.frame_spectral_norm(X)
        M = X.dense()
        tight = float(np.max(np.abs(M @ M.conj().T - n * np.eye(n))))
        checks += [
            _check(f"mu n={n}", mu <= 1 / math.sqrt(n) + 1e-9, value=mu, bound=1 / math.sqrt(n)),
            _check(f"nu n={n}", nu <= 1 / (n + 1) + 1e-12, value=nu, bound=1 / (n + 1)),
            _check(f"nu<=mu/sqrt(n) n={n}", nu <= mu / math.sqrt(n) + 1e-12, value=nu),
            _check(f"spectral norm n={n}", abs(snorm - math.sqrt(n)) <= 1e-6, value=snorm),
            _check(f"tight n={n}", tight <= 1e-8, max_deviation=tight),
        ]
    return checks


def _suite_stoc(args):
    X = frames.build_gabor_frame(frames.alltop_seed(31))
    est = experiments.stoc_violation_estimate(X, 5, trials=args.trials or 2000, seed=args.seed)
    limit = 4.0 / X.p
    slack = 3.0 * experiments.binomial_se(limit, est.trials)
    return [_check("stoc1", est.stoc1_rate <= limit + slack, rate=est.stoc1_rate, limit=limit),
            _check("stoc2", est.stoc2_rate <= limit + slack, rate=est.stoc2_rate, limit=limit)]


def _suite_gaussian(args):
    chk = experiments.gaussian_coherence_check(512, 1024, draws=args.trials or 200, seed=args.seed)
    d = chk.to_dict()
    return [_check("worst-case coherence", chk.mu_ok(), rate=chk.mu_exceed_rate,
                   limit=chk.mu_prob_bound, bound=chk.mu_bound, ci95=d["mu_ci95"]),
            _check("average coherence", chk.nu_ok(), rate=chk.nu_exceed_rate,
                   limit=chk.nu_prob_bound, bound=chk.nu_bound, ci95=d["nu_ci95"]),
            _check("hypothesis", chk.hypothesis_ok)]


def _suite_tails(args):
    X = frames.gaussian_design(128, 1024, args.seed)
    res = experiments.noise_proxy_tail_check(X, 1.0, trials=args.trials or 100_000, seed=args.seed)
    return [_check("tail", res.empirical <= res.analytic_bound, empirical=res.empirical,
                   bound=res.analytic_bound, epsilon=res.epsilon)]


def _suite_conditioning(args):
    X = frames.build_gabor_frame(frames.alltop_seed(31))
    est = experiments.submatrix_conditioning_estimate(X, 5, trials=args.trials or 2000, seed=args.seed)
    # diagnostic: the premise of the probability bound fails at this size
    sane = 0.0 <= est.fraction <= 1.0 and est.sigma_min <= 1.0 + 1e-12 <= est.sigma_max + 2e-12
    return [_check("conditioning (diagnostic)", sane, **est.to_dict())]


def cmd_verify(args):
    checks = {"geometry": _suite_geometry, "stoc": _suite_stoc, "gaussian": _suite_gaussian,
              "tails": _suite_tails, "conditioning": _suite_conditioning}[args.suite](args)
    ok = all(c["pass"] for c in checks)
    _emit({"suite": args.suite, "pass": ok, "checks": checks})
    for c in checks:
        if not c["pass"]:
            print(f"FAIL {c['check']}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_CHECK


# -- parser ---------------------------------------------------------------------------

def _add_threshold_args(p, recover):
    p.add_argument("--y", required=True, metavar="PATH", help="measurement CSV (re,im)")
    p.add_argument("--t", type=float, help="OST trade-off parameter in (0, 1)")
    p.add_argument("--c", help="OST constant, a number or 'auto2t' for c = 2t")
    p.add_argument("--snr", type=float, help="linear SNR")
    p.add_argument("--snr-db", type=float, help="SNR in dB")
    p.add_argument("--sigma2", type=float, help="noise variance")
    p.add_argument("--sost-k", type=int, metavar="K", help="keep the K largest proxy entries")
    p.add_argument("--lambda", dest="lam", type=float, metavar="L", help="explicit threshold")
    if recover:
        p.add_argument("--recovery-c", type=float, metavar="C",
                       help="recovery threshold c * mu * ||y|| * sqrt(2 ln p / (1 - e^-1/2))")
    p.add_argument("--threads", type=int, default=os.cpu_count())


def build_parser():
    parser = argparse.ArgumentParser(prog="onestep", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coherence", help="coherence report of a frame")
    _add_frame_args(p)
    p.add_argument("--analytic", action="store_true", help="closed forms for Alltop frames")
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("frame", help="export a frame or its Gabor seed")
    _add_frame_args(p)
    p.add_argument("--out", metavar="PATH", help="frame text file")
    p.add_argument("--seed-out", metavar="PATH", help="Gabor seed file")
    p.set_defaults(func=cmd_frame)

    p = sub.add_parser("select", help="one-step thresholding model selection")
    _add_frame_args(p)
    _add_threshold_args(p, recover=False)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("recover", help="thresholding followed by least squares")
    _add_frame_args(p)
    _add_threshold_args(p, recover=True)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("experiment", help="Monte Carlo sweep from a JSON config")
    p.add_argument("config", help="config path or bundled name (fig2_desk, fig3_desk, ...)")
    p.add_argument("--out", metavar="DIR", help="directory for trials.csv, summary.json, manifest.json")
    p.add_argument("--threads", type=int, default=os.cpu_count())
    p.add_argument("--trials", type=int, help="override trials per k")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("verify", help="empirical checks of the guarantees")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, help="override the suite's trial/draw count")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OverSelectionError as exc:
        print(f"over-selection: {exc}", file=sys.stderr)
        return EXIT_OVERSELECT
    except (InvalidArgumentError, KeyError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
