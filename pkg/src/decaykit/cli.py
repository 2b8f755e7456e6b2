"""Configuration-driven command-line front end.

Usage::

    decaykit SUBCOMMAND --config run.json [--out DIR] [--format csv|json|both]

Subcommands are ``spectra``, ``selfenergy``, ``poles``, ``evolve``,
``vanhove`` and ``relativistic``.  Each writes ``SUBCOMMAND.csv`` and/or
``SUBCOMMAND.json`` plus ``manifest.json`` (config hash, package version,
per-check pass/fail, data-file hashes) into the output directory.  Files
are written atomically and contain no timestamps, so identical configs
give byte-identical outputs.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.  Every
error prints one line ``decaykit: <kind>: <reason>`` on stderr.
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from decaykit import __version__
from decaykit.errors import ClosedChannel, DecayKitError, InsufficientRange
from decaykit.evolution import (
    TimeGrid,
    fit_features,
    lifetime,
    survival_decomposed,
    survival_line,
    survival_oracle,
    zeno_time,
)
from decaykit.poles import bound_states_nonrel, find_pole_nonrel
from decaykit.relativistic import (
    RelParams,
    correlation_amplitude,
    correlation_sum_rule,
    gamma_rel,
    lifetime_dilated,
    pole_rel,
    sigma2_rel_boundary,
    sigma2_rel_closed,
    sigma2_rel_dispersion,
    vanhove_limit_rel,
)
from decaykit.selfenergy import sigma2_boundary, sigma2_complex, sigma2_quadrature
from decaykit.spectral import (
    TwoBodyPhaseSpace,
    gamma_of,
    model_from_dict,
    model_to_dict,
    threshold_exponent,
    total_weight,
)
from decaykit.vanhove import convergence_scan

__all__ = ["ConfigError", "ComputeError", "main", "run"]

COMMANDS = ("spectra", "selfenergy", "poles", "evolve", "vanhove", "relativistic")
FORMATS = ("csv", "json", "both")
METHODS = ("line", "decomposed", "oracle", "all")
SERIES_HEADER = ("t", "re_A", "im_A", "P", "re_pole", "im_pole", "re_cut", "im_cut", "re_bound", "im_bound")


class ConfigError(Exception):
    """Malformed or out-of-range configuration (exit status 2)."""


class ComputeError(Exception):
    """Numerical failure while running a valid configuration (exit status 3)."""


# ------------------------------------------------------------------ config


def _field(cfg, name, kind=float, default=None, required=True):
    """Fetch and coerce ``cfg[name]`` with a dotted-path diagnostic on failure."""
    parts = name.split(".")
    node = cfg
    for p in parts:
        if not isinstance(node, dict) or p not in node:
            if required and default is None:
                raise ConfigError(f"field '{name}': missing")
            return default
        node = node[p]
    try:
        if kind is int:
            if isinstance(node, bool) or float(node) != int(node):
                raise ValueError
            return int(node)
        if kind is float:
            value = float(node)
            if not math.isfinite(value):
                raise ValueError
            return value
        return kind(node)
    except (TypeError, ValueError):
        raise ConfigError(f"field '{name}': expected {kind.__name__}, got {node!r}") from None


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return cfg


def _model(cfg):
    spec = cfg.get("model")
    if not isinstance(spec, dict):
        raise ConfigError("field 'model': missing or not an object")
    try:
        return model_from_dict(spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _lambdas(cfg):
    if "lambdas" in cfg:
        raw = cfg["lambdas"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("field 'lambdas': expected a nonempty list")
        lams = [_field({"x": v}, "x") for v in raw]
    else:
        lams = [_field(cfg, "lambda")]
    for lam in lams:
        if lam <= 0:
            raise ConfigError(f"field 'lambda': coupling must be positive, got {lam}")
    return lams


def _open_channel(model, E_a):
    if gamma_of(model, E_a) <= 0:
        raise ConfigError(f"closed channel: Gamma(E_a={E_a}) = 0 for the {model.family} model")


def _grid(cfg, scales):
    """Time grid from ``cfg['grid']``; ``unit`` may be ``"tau_E"`` or ``"tau_Z"``."""
    spec = cfg.get("grid")
    if not isinstance(spec, dict):
        raise ConfigError("field 'grid': missing or not an object")
    unit = spec.get("unit", "1")
    if unit not in scales:
        raise ConfigError(f"field 'grid.unit': expected one of {sorted(scales)}, got {unit!r}")
    t_min = _field(spec, "t_min", default=0.0, required=False)
    t_max = _field(spec, "t_max")
    n = _field(spec, "nodes", int)
    if n < 2 or not 0 <= t_min < t_max:
        raise ConfigError("field 'grid': need nodes >= 2 and 0 <= t_min < t_max")
    factor = scales[unit]
    try:
        return TimeGrid.from_spec({"t_min": t_min * factor, "t_max": t_max * factor, "nodes": n,
                                   "spacing": spec.get("spacing", "linear")})
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _energies(cfg, lo_default, hi_default):
    spec = cfg.get("energies", {})
    lo = _field(spec, "E_min", default=lo_default, required=False)
    hi = _field(spec, "E_max", default=hi_default, required=False)
    n = _field(spec, "nodes", int, default=201, required=False)
    if n < 2 or not lo < hi:
        raise ConfigError("field 'energies': need nodes >= 2 and E_min < E_max")
    return np.linspace(lo, hi, n)


def _rel_params(cfg):
    spec = cfg.get("relativistic")
    if not isinstance(spec, dict):
        raise ConfigError("field 'relativistic': missing or not an object")
    values = {k: _field(spec, k) for k in ("M", "m", "mu")}
    values["lam"] = _field(spec, "lambda", default=0.0, required=False)
    values["p"] = _field(spec, "p", default=0.0, required=False)
    try:
        params = RelParams(**values)
    except ValueError as exc:
        raise ConfigError(f"field 'relativistic': {exc}") from None
    if not params.is_open:
        raise ConfigError(f"closed channel: M = {params.M} <= 2m = {2 * params.m}")
    return params


# ------------------------------------------------------------------ output


def _num(x):
    return format(float(x), ".17g")


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def _csv_text(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join("" if v is None else _num(v) for v in row) + "\n")
    return buf.getvalue()


def _json_text(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write_atomic(path, text):
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _series_rows(series):
    def cols(arr):
        if arr is None:
            return [(None, None)] * series.t.size
        return list(zip(arr.real, arr.imag))

    amp = series.amplitude
    return [
        (t, a.real, a.imag, p, *pole, *cut, *bound)
        for t, a, p, pole, cut, bound in zip(series.t, amp, series.probability, cols(series.pole_part),
                                             cols(series.cut_part), cols(series.bound_part))
    ]


def _workers():
    raw = os.environ.get("DECAYKIT_THREADS", "")
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"DECAYKIT_THREADS: expected a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"DECAYKIT_THREADS: expected a positive integer, got {raw!r}")
    return n


def _parallel_map(fn, items):
    """Order-preserving map over independent jobs, capped by ``DECAYKIT_THREADS``."""
    n = min(_workers(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ------------------------------------------------------------------ commands
# Each command returns (csv_header, csv_rows, json_payload, checks).


def _cmd_spectra(cfg):
    model = _model(cfg)
    lo = model.branch_points[0]
    hi = model.branch_points[1] if len(model.branch_points) > 1 else lo + 10 * model.scale
    E = _energies(cfg, lo, hi)
    G = gamma_of(model, E)
    payload = {
        "model": model_to_dict(model),
        "branch_points": list(model.branch_points),
        "total_weight": total_weight(model),
        "threshold_exponent": threshold_exponent(model),
    }
    checks = {"gamma_nonnegative": bool(np.all(G >= 0))}
    return ("E", "Gamma"), list(zip(E, G)), payload, checks


def _cmd_selfenergy(cfg):
    model = _model(cfg)
    lo = model.branch_points[0]
    if isinstance(model, TwoBodyPhaseSpace):
        hi = 4 * model.M**2
    else:
        hi = model.branch_points[1] if len(model.branch_points) > 1 else 10 * model.scale
    E = _energies(cfg, lo, hi)
    # keep the real scan off the branch points themselves
    E = E[(E > model.branch_points[0]) & ~np.isin(E, model.branch_points)]
    rows = []
    for e in E:
        bv = sigma2_boundary(model, float(e))
        rows.append((e, bv.delta, bv.gamma))
    points = cfg.get("points", [])
    if not isinstance(points, list):
        raise ConfigError("field 'points': expected a list of [re, im] pairs")
    complex_out, agree = [], True
    for k, pt in enumerate(points):
        if not (isinstance(pt, list) and len(pt) == 2):
            raise ConfigError(f"field 'points[{k}]': expected [re, im]")
        z = complex(_field({"x": pt[0]}, "x"), _field({"x": pt[1]}, "x"))
        if z.imag == 0:
            raise ConfigError(f"field 'points[{k}]': imaginary part must be nonzero")
        closed = complex(sigma2_complex(model, z, "first"))
        # the phase-space family is subtracted; its unsubtracted integral diverges
        quad = None if isinstance(model, TwoBodyPhaseSpace) else sigma2_quadrature(model, z)
        if quad is not None:
            agree &= abs(closed - quad) <= 1e-8 * max(1.0, abs(closed))
        complex_out.append({"z": z, "first": closed, "second": complex(sigma2_complex(model, z, "second")),
                            "quadrature": quad})
    payload = {"model": model_to_dict(model), "complex_points": complex_out}
    checks = {"gamma_nonnegative": all(r[2] >= 0 for r in rows), "closed_matches_quadrature": bool(agree)}
    return ("E", "delta", "gamma"), rows, payload, checks


def _cmd_poles(cfg):
    model = _model(cfg)
    E_a = _field(cfg, "E_a")
    _open_channel(model, E_a)
    lams = _lambdas(cfg)
    gamma = float(sigma2_boundary(model, E_a).gamma)

    def job(lam):
        pole = find_pole_nonrel(model, E_a, lam)
        return pole, bound_states_nonrel(model, E_a, lam)

    results = _parallel_map(job, lams)
    rows, records = [], []
    for lam, (pole, bound) in zip(lams, results):
        golden = abs(pole.location.imag + 0.5 * lam * lam * gamma)
        rows.append((lam, pole.location.real, pole.location.imag, pole.residue.real, pole.residue.imag, golden))
        records.append({"lambda": lam, "pole": pole.as_dict(), "golden_rule_deviation": golden,
                        "bound_states": [b.as_dict() for b in bound]})
    checks = {"decaying": all(r[2] < 0 for r in rows)}
    header = ("lambda", "re_pole", "im_pole", "re_residue", "im_residue", "golden_rule_deviation")
    return header, rows, {"model": model_to_dict(model), "E_a": E_a, "poles": records}, checks


def _cmd_evolve(cfg):
    model = _model(cfg)
    E_a = _field(cfg, "E_a")
    _open_channel(model, E_a)
    lams = _lambdas(cfg)
    if len(lams) != 1:
        raise ConfigError("field 'lambdas': evolve takes a single coupling")
    lam = lams[0]
    method = cfg.get("method", "decomposed")
    if method not in METHODS:
        raise ConfigError(f"field 'method': expected one of {METHODS}, got {method!r}")
    n_modes = _field(cfg, "oracle_modes", int, default=4096, required=False)
    if n_modes < 64:
        raise ConfigError("field 'oracle_modes': need at least 64 modes")
    scales = {"1": 1.0, "tau_E": lifetime(model, E_a, lam), "tau_Z": zeno_time(model, lam)}
    grid = _grid(cfg, scales)

    runners = {
        "line": lambda: survival_line(model, E_a, lam, grid),
        "decomposed": lambda: survival_decomposed(model, E_a, lam, grid),
        "oracle": lambda: survival_oracle(model, E_a, lam, n_modes, grid),
    }
    chosen = list(runners) if method == "all" else [method]
    series = dict(zip(chosen, _parallel_map(lambda name: runners[name](), chosen)))
    primary = series["decomposed" if "decomposed" in series else chosen[0]]

    try:
        features = fit_features(primary, model, E_a, lam).as_dict()
    except InsufficientRange as exc:
        features = {"unavailable": str(exc)}
    tol = _field(cfg, "tolerance", default=1e-5, required=False)
    agreement = {}
    for i, a in enumerate(chosen):
        for b in chosen[i + 1:]:
            agreement[f"{a}-{b}"] = float(np.max(np.abs(series[a].amplitude - series[b].amplitude)))
    checks = {"normalized_at_zero": bool(grid.nodes[0] > 0 or abs(primary.amplitude[0] - 1) < 1e-6)}
    checks.update({f"agree_{k}": v <= tol for k, v in agreement.items()})
    payload = {
        "model": model_to_dict(model), "E_a": E_a, "lambda": lam, "methods": chosen,
        "tau_E": scales["tau_E"], "tau_Z": scales["tau_Z"], "features": features,
        "max_pairwise_difference": agreement,
        "pole": primary.pole.as_dict() if primary.pole is not None else None,
    }
    return SERIES_HEADER, _series_rows(primary), payload, checks


def _cmd_vanhove(cfg):
    model = _model(cfg)
    E_a = _field(cfg, "E_a")
    _open_channel(model, E_a)
    lams = _lambdas(cfg)
    if len(lams) < 3 or any(b >= a for a, b in zip(lams, lams[1:])):
        raise ConfigError("field 'lambdas': need at least 3 strictly decreasing couplings")
    window = cfg.get("window", [0.1, 5.0])
    if not (isinstance(window, list) and len(window) == 2):
        raise ConfigError("field 'window': expected [lo, hi] in units of 1/Gamma(E_a)")
    window = (_field({"x": window[0]}, "x"), _field({"x": window[1]}, "x"))
    if not 0 < window[0] < window[1]:
        raise ConfigError("field 'window': need 0 < lo < hi")
    features = cfg.get("features", False)
    if not isinstance(features, bool):
        raise ConfigError("field 'features': expected true or false")
    scan = convergence_scan(model, E_a, lams, window=window, features=features)
    rows = [(t, *scan.deviation[:, k]) for k, t in enumerate(scan.t_tilde_grid.nodes)]
    header = ("t_tilde",) + tuple(f"deviation_lambda_{lam:g}" for lam in lams)
    payload = {
        "model": model_to_dict(model), "E_a": E_a, "window": list(window),
        "records": scan.records(), "deviation_max": scan.deviation_max,
        "shrink_factors": scan.shrink_factors, "strictly_decreasing": scan.strictly_decreasing,
        "fitted_scalings": scan.fitted_scalings,
    }
    return header, rows, payload, {"strictly_decreasing": scan.strictly_decreasing}


def _cmd_relativistic(cfg):
    params = _rel_params(cfg)
    header, rows, series_info = ("M2", "re_sigma", "im_sigma"), [], {}
    on_shell = sigma2_rel_boundary(params, params.M**2)
    probes = [complex(params.M**2 * (0.5 + 0.5 * k), (-1) ** k * 0.3 * params.M**2) for k in range(4)]
    rep_gap = max(abs(sigma2_rel_closed(params, z) - sigma2_rel_dispersion(params, z)) for z in probes)
    gamma = gamma_rel(params, params.M**2)
    payload = {
        "params": {"M": params.M, "m": params.m, "mu": params.mu, "lambda": params.lam, "p": params.p},
        "E_p": params.E_p,
        "gamma_on_shell": gamma,
        "sigma_on_shell": complex(on_shell),
        "closed_vs_dispersion_max": rep_gap,
    }
    checks = {"renormalized_on_shell": abs(on_shell.real) <= 1e-12,
              "closed_matches_dispersion": rep_gap <= 1e-10}
    if params.lam > 0:
        tau = lifetime_dilated(params)
        grid = _grid(cfg, {"1": 1.0, "tau_E": tau}) if "grid" in cfg else TimeGrid.linear(0.0, 5 * tau, 201)
        series = correlation_amplitude(params, grid)
        limit = vanhove_limit_rel(params, grid.scaled(params.lam**2))
        sum_rule = correlation_sum_rule(params)
        header, rows = SERIES_HEADER, _series_rows(series)
        series_info = {
            "pole": pole_rel(params).as_dict(),
            "lifetime_dilated": tau,
            "dilated_rate": params.M / params.E_p * params.lam**2 * gamma,
            "A0": complex(series.amplitude[0]) if grid.nodes[0] == 0 else None,
            "sum_rule_A0": sum_rule,
            "limit_max_deviation": float(np.max(np.abs(series.probability - limit.probability))),
        }
        if grid.nodes[0] == 0:
            checks["sum_rule"] = abs(series.amplitude[0] - sum_rule) <= 1e-10
    payload.update(series_info)
    return header, rows, payload, checks


_COMMANDS = {
    "spectra": _cmd_spectra,
    "selfenergy": _cmd_selfenergy,
    "poles": _cmd_poles,
    "evolve": _cmd_evolve,
    "vanhove": _cmd_vanhove,
    "relativistic": _cmd_relativistic,
}


def config_hash(cfg: dict) -> str:
    """SHA-256 of the canonical (sorted, compact) JSON form of `cfg`."""
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def run(command: str, cfg: dict, out_dir: str, fmt: str = "both") -> dict:
    """Run one subcommand and write its outputs; returns the manifest.

    Raises
    ------
    ConfigError
        Invalid configuration, including a closed decay channel.
    ComputeError
        A numerical routine failed on a valid configuration.
    """
    if command not in _COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {COMMANDS}")
    if fmt not in FORMATS:
        raise ConfigError(f"--format: expected one of {FORMATS}, got {fmt!r}")
    try:
        header, rows, payload, checks = _COMMANDS[command](cfg)
    except ConfigError:
        raise
    except ClosedChannel as exc:
        raise ConfigError(f"closed channel: {exc}") from None
    except (DecayKitError, ArithmeticError, np.linalg.LinAlgError) as exc:
        raise ComputeError(f"{type(exc).__name__}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    os.makedirs(out_dir, exist_ok=True)
    texts = {}
    if fmt in ("csv", "both"):
        texts[f"{command}.csv"] = _csv_text(header, rows)
    if fmt in ("json", "both"):
        texts[f"{command}.json"] = _json_text(payload)
    for name, text in texts.items():
        _write_atomic(os.path.join(out_dir, name), text)
    manifest = {
        "command": command,
        "config_sha256": config_hash(cfg),
        "version": __version__,
        "checks": {k: bool(v) for k, v in checks.items()},
        "files": {name: hashlib.sha256(text.encode()).hexdigest() for name, text in texts.items()},
    }
    _write_atomic(os.path.join(out_dir, "manifest.json"), _json_text(manifest))
    return manifest


def _parser():
    ap = argparse.ArgumentParser(prog="decaykit", description="Unstable-state decay calculations.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, metavar="PATH", help="JSON run configuration")
    ap.add_argument("--out", default=".", metavar="DIR", help="output directory (default: .)")
    ap.add_argument("--format", default="both", choices=FORMATS, dest="fmt")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        run(args.command, cfg, args.out, args.fmt)
    except ConfigError as exc:
        print(f"decaykit: config: {exc}", file=sys.stderr)
        return 2
    except ComputeError as exc:
        print(f"decaykit: compute: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
