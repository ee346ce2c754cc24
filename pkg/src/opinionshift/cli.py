"""Command-line front end.

Verbs: ``sweep`` (shift-curve CSV over a signal grid), ``report`` (regime
classification as text or JSON), ``trajectory`` (repeated-update or Kalman
tracking CSV), ``verify`` (closed-form/quadrature equivalence grid).

Every verb reads an optional plain-text config file (``key = value`` lines,
``#`` comments, dotted keys like ``mixture.1.delta``) and accepts overrides
as ``--<dotted.key> <value>`` flags of the same names.  CSV output is
UTF-8, comma-separated, ``.`` decimal point, shortest round-trip float
formatting, deterministic for a given spec.

Exit codes: 0 success, 2 validation error, 3 numerical-convergence failure.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import analysis
from .distributions import Distribution, Family, MixtureComponent, SignalModel
from .errors import ConvergenceError, ValidationError
from .posterior import BeliefState, posterior_mean
from .verification import (
    EQUIVALENCE_TOL,
    grid_passed,
    run_equivalence_grid,
    summarize_by_pair,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _fmt(value) -> str:
    # shortest representation that round-trips a float64
    return repr(float(value))


# ---------------------------------------------------------------------------
# Config grammar: `key = value`, `#` comments, dotted keys, no nesting.
# ---------------------------------------------------------------------------


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip().lower()
        if not key:
            raise ValidationError(f"config line {lineno}: empty key")
        out[key] = value.strip()
    return out


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}") from exc


def _apply_overrides(cfg: dict, extra) -> dict:
    """Fold `--dotted.key value` / `--dotted.key=value` tokens into cfg."""
    cfg = dict(cfg)
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise ValidationError(f"unexpected argument {tok!r}; overrides look like --key value")
        body = tok[2:]
        if "=" in body:
            key, value = body.split("=", 1)
            i += 1
        else:
            key = body
            if i + 1 >= len(extra):
                raise ValidationError(f"flag --{key} is missing a value")
            value = extra[i + 1]
            i += 2
        cfg[key.strip().lower()] = value.strip()
    return cfg


def _get(cfg, key, default=None, required=False):
    if key in cfg:
        return cfg[key]
    if required:
        raise ValidationError(f"missing required key {key!r}")
    return default


def _get_float(cfg, key, default=None, required=False):
    raw = _get(cfg, key, None, required)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise ValidationError(f"key {key!r}: expected a number, got {raw!r}") from None


def _get_int(cfg, key, default=None, required=False):
    raw = _get(cfg, key, None, required)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"key {key!r}: expected an integer, got {raw!r}") from None


def _get_bool(cfg, key, default=False):
    raw = _get(cfg, key, None)
    if raw is None:
        return default
    return str(raw).strip().lower() in {"1", "true", "yes", "on"}


def _parse_mixture(cfg) -> tuple:
    """Collect mixture.<i>.* keys into components (indices need not be dense)."""
    indices = set()
    for key in cfg:
        parts = key.split(".")
        if len(parts) == 3 and parts[0] == "mixture" and parts[1].isdigit():
            indices.add(int(parts[1]))
    components = []
    for i in sorted(indices):
        prefix = f"mixture.{i}."
        components.append(
            MixtureComponent(
                weight=_get_float(cfg, prefix + "weight", required=True),
                bias_point=_get_float(cfg, prefix + "delta", required=True),
                scale=_get_float(cfg, prefix + "sigma", required=True),
                family=Family.parse(_get(cfg, prefix + "family", "gaussian")),
            )
        )
    return tuple(components)


def _build_model(cfg):
    combo = _get(cfg, "combo")
    if combo is not None:
        parts = str(combo).split("-")
        if len(parts) != 2:
            raise ValidationError(
                f"combo must look like 'gaussian-cauchy', got {combo!r}"
            )
        cfg = {**cfg, "prior": parts[0], "signal": parts[1]}
    prior_family = Family.parse(_get(cfg, "prior", "gaussian"))
    signal_family = Family.parse(_get(cfg, "signal", "gaussian"))
    theta0 = _get_float(cfg, "theta0", 0.0)
    sigma0 = _get_float(cfg, "sigma0", 1.0)
    sigma_eps = _get_float(cfg, "sigma_eps", 1.0)
    bias = _get_float(cfg, "bias", 0.0)
    mixture = _parse_mixture(cfg)
    eps_weight = _get_float(cfg, "mixture.eps_weight",
                            1.0 - sum(c.weight for c in mixture) if mixture else 1.0)
    prior = BeliefState(Distribution(prior_family, theta0, sigma0))
    signal = SignalModel(
        noise=Distribution(signal_family, 0.0, sigma_eps),
        bias=bias,
        mixture=mixture,
        eps_weight=eps_weight,
    )
    return prior, signal


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

_SWEEP_HEADER = "x,x_minus_theta0,shift,theta1,method,combo"


def cmd_sweep(cfg, out_path, gnuplot=False) -> int:
    prior, signal = _build_model(cfg)
    x_min = _get_float(cfg, "x_min", prior.theta0 - 10.0 * prior.sigma0)
    x_max = _get_float(cfg, "x_max", prior.theta0 + 10.0 * prior.sigma0)
    n_points = _get_int(cfg, "n_points", 401)
    if not x_min < x_max:
        raise ValidationError(f"x_min ({x_min!r}) must be below x_max ({x_max!r})")
    if n_points < 2:
        raise ValidationError(f"n_points must be >= 2, got {n_points}")

    grid = np.linspace(x_min, x_max, n_points)
    rows = [_SWEEP_HEADER]
    for x in grid:
        x = float(x)
        res = posterior_mean(prior, signal, x)
        rows.append(
            ",".join(
                (
                    _fmt(x),
                    _fmt(x - prior.theta0),
                    _fmt(res.shift),
                    _fmt(res.theta1),
                    res.method.value,
                    res.combo.value,
                )
            )
        )
    _write_text(out_path, "\n".join(rows) + "\n")
    if gnuplot and out_path not in (None, "-"):
        script = (
            "set datafile separator ','\n"
            "set key autotitle columnhead\n"
            f"plot '{out_path}' using 2:3 with lines title 'shift'\n"
        )
        _write_text(str(out_path) + ".gp", script)
    return EXIT_OK


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


def cmd_report(cfg, as_json=False, stream=None) -> int:
    stream = stream or sys.stdout
    prior_family = Family.parse(_get(cfg, "prior", required=True))
    signal_family = Family.parse(_get(cfg, "signal", required=True))
    sigma0 = _get_float(cfg, "sigma0", 1.0)
    sigma_eps = _get_float(cfg, "sigma_eps", 1.0)
    bias = _get_float(cfg, "bias", 0.0)
    report = analysis.classify_regime(prior_family, signal_family, sigma0, sigma_eps, bias)
    payload = {
        "prior": prior_family.value,
        "signal": signal_family.value,
        "sigma0": sigma0,
        "sigma_eps": sigma_eps,
        "bias": bias,
        **report.to_dict(),
    }
    if as_json:
        stream.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        for key, value in payload.items():
            stream.write(f"{key} = {value}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# trajectory
# ---------------------------------------------------------------------------


def _signal_sequence(cfg, steps):
    constant = _get(cfg, "signal.constant")
    values = _get(cfg, "signal.values")
    path = _get(cfg, "signal.file")
    sources = [s for s in (constant, values, path) if s is not None]
    if len(sources) > 1:
        raise ValidationError("choose exactly one of signal.constant, signal.values, signal.file")
    if constant is not None:
        return [float(constant)] * steps
    if values is not None:
        seq = [float(v) for v in values.split(",") if v.strip()]
        if len(seq) < steps:
            raise ValidationError(f"signal.values provides {len(seq)} entries for {steps} steps")
        return seq[:steps]
    if path is not None:
        seq = []
        try:
            with open(path, "r", encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    line = line.split("#", 1)[0].strip()
                    if not line:
                        continue
                    try:
                        seq.append(float(line))
                    except ValueError:
                        raise ValidationError(
                            f"{path}:{lineno}: expected a number, got {line!r}"
                        ) from None
        except OSError as exc:
            raise ValidationError(f"cannot read signal file {path}: {exc}") from exc
        if len(seq) < steps:
            raise ValidationError(f"{path} provides {len(seq)} values for {steps} steps")
        return seq[:steps]
    raise ValidationError("trajectory needs signal.constant, signal.values, or signal.file")


def cmd_trajectory(cfg, out_path) -> int:
    mode = str(_get(cfg, "mode", "kalman")).strip().lower()
    steps = _get_int(cfg, "steps", 50)
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}")
    theta0 = _get_float(cfg, "theta0", 0.0)
    sigma0 = _get_float(cfg, "sigma0", 1.0)
    sigma_eps = _get_float(cfg, "sigma_eps", 1.0)
    xs = _signal_sequence(cfg, steps)

    rows = []
    if mode == "kalman":
        rows.append("t,x_t,theta_t,v_t,gain_t")
        state = analysis.KalmanState(theta=theta0, v=_get_float(cfg, "v0", 0.0))
        for t, x in enumerate(xs, start=1):
            state = analysis.kalman_step(state, x, sigma0, sigma_eps)
            rows.append(",".join((str(t), _fmt(x), _fmt(state.theta),
                                  _fmt(state.v), _fmt(state.gain))))
    elif mode in {"frozen", "frozen_kernel", "frozenkernel"}:
        rows.append("t,x_t,theta_t,shift_t")
        prior_family = Family.parse(_get(cfg, "prior", "gaussian"))
        signal_family = Family.parse(_get(cfg, "signal", "gaussian"))
        policy = str(_get(cfg, "scale_policy", "fixed")).strip().lower()
        if policy in {"fixed", "fixedscales", "fixed_scales"}:
            kalman_scales = False
        elif policy in {"kalman", "kalmanscales", "kalman_scales"}:
            kalman_scales = True
        else:
            raise ValidationError(f"unknown scale_policy {policy!r}")
        theta = theta0
        v = _get_float(cfg, "v0", 0.0)
        for t, x in enumerate(xs, start=1):
            scale = math.sqrt(v + sigma0 * sigma0) if kalman_scales else sigma0
            prior = BeliefState(Distribution(prior_family, theta, scale))
            signal = SignalModel(noise=Distribution(signal_family, 0.0, sigma_eps))
            res = posterior_mean(prior, signal, x)
            theta = theta + res.shift
            if kalman_scales:
                predicted = v + sigma0 * sigma0
                v = (1.0 - predicted / (predicted + sigma_eps * sigma_eps)) * predicted
            rows.append(",".join((str(t), _fmt(x), _fmt(theta), _fmt(res.shift))))
    else:
        raise ValidationError(f"unknown trajectory mode {mode!r}")
    _write_text(out_path, "\n".join(rows) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def cmd_verify(cfg, stream=None) -> int:
    stream = stream or sys.stdout
    theta0 = _get_float(cfg, "theta0", 0.7)
    sigma0 = _get_float(cfg, "sigma0", 1.0)
    entries = run_equivalence_grid(theta0=theta0, sigma0=sigma0)
    worst = summarize_by_pair(entries)
    stream.write(f"oracle-equivalence grid: {len(entries)} points, "
                 f"tolerance {EQUIVALENCE_TOL:g} * (1 + |theta1|)\n")
    for (pf, sf), entry in worst.items():
        status = "ok" if entry.passed else "FAIL"
        stream.write(
            f"  {pf:>8} prior / {sf:<8} signal  max deviation "
            f"{entry.normalized_error:.3e} at ratio {entry.ratio:g}, "
            f"x0 {entry.deviation:+g}  [{status}]\n"
        )
    if grid_passed(entries):
        stream.write("verify: PASS\n")
        return EXIT_OK
    stream.write("verify: FAIL\n")
    return EXIT_NUMERICAL


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="opinionshift",
        description="Bayesian opinion-shift curves, regime reports, and trajectories.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in ("sweep", "report", "trajectory", "verify"):
        p = sub.add_parser(verb)
        p.add_argument("--config", default=None, help="key = value config file")
        if verb in ("sweep", "trajectory"):
            p.add_argument("--out", default=None, help="output CSV path (default stdout)")
        if verb == "sweep":
            p.add_argument("--gnuplot", action="store_true",
                           help="also write a gnuplot script next to the CSV")
        if verb == "report":
            p.add_argument("--json", action="store_true", help="emit JSON instead of text")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        cfg = _apply_overrides(_load_config(args.config), extra)
        # `out` may come from config, overridden by the flag
        if args.verb == "sweep":
            out = args.out or _get(cfg, "out")
            return cmd_sweep(cfg, out, gnuplot=args.gnuplot or _get_bool(cfg, "gnuplot"))
        if args.verb == "report":
            return cmd_report(cfg, as_json=args.json or _get_bool(cfg, "json"))
        if args.verb == "trajectory":
            out = args.out or _get(cfg, "out")
            return cmd_trajectory(cfg, out)
        return cmd_verify(cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
