"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 configuration error, 3 numerical
failure. Set ``HAFVF_LOG_LEVEL`` (e.g. ``DEBUG``) for log output on stderr.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys
from typing import Any, Sequence

import numpy as np

from . import config as cfgmod
from . import streams
from .adafvf import OptimizerConfig, Testbed, final_loss, train_testbed
from .errors import ConfigError, DomainError, HafvfError, InputError, NumericalError
from .expfam import LinRegNIG, make_family
from .filtering import run, smooth
from .forgetting import BetaParams
from .models import SCENARIOS, ArConfig, SyntheticSpec, ar_fit, ar_predict, generate

EXIT_OK, EXIT_INPUT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("hafvf")


@contextlib.contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
        sys.stdout.flush()
        return
    try:
        fh = open(path, "w", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None
    with fh:
        yield fh


def _raw_config(args) -> dict[str, str]:
    raw: dict[str, str] = {}
    if getattr(args, "preset", None):
        if args.preset not in cfgmod.PRESETS:
            raise ConfigError(f"unknown preset {args.preset!r}; choose from {', '.join(cfgmod.PRESETS)}")
        raw.update(cfgmod.PRESETS[args.preset])
    if getattr(args, "config", None):
        raw.update(cfgmod.load(args.config))
    raw.update(cfgmod.parse_overrides(getattr(args, "set", None) or []))
    if getattr(args, "family", None):
        raw["family"] = args.family
    if getattr(args, "dim", None) is not None:
        raw["dim"] = str(args.dim)
    return raw


def _load_stream(args):
    """Rows, hierarchy config and change set for the filter-like commands."""
    raw = _raw_config(args)
    text = streams.read_text(args.input)
    rows = streams.parse_rows(text, args.format or streams.detect_format(args.input, text))
    name = raw.get("family", "bernoulli")
    if name not in cfgmod.PRIOR_KEYS:
        raise ConfigError(f"unknown family {name!r}; choose from {', '.join(cfgmod.PRIOR_KEYS)}")
    dim = int(float(raw["dim"])) if "dim" in raw else streams.infer_dim(name, rows)
    if dim is None and name in ("niw", "linreg"):
        dim = 1
    family = make_family(name, dim)
    hc = cfgmod.build(raw, family)
    changes = streams.read_changes(args.changes) if args.changes else None
    return rows, hc, changes


def cmd_filter(args) -> int:
    rows, hc, changes = _load_stream(args)
    stats, _ = streams.to_stats(hc.family, rows)
    records = [
        streams.step_record(t, hc.family, diag, state.theta, None if changes is None else t in changes)
        for t, (state, diag) in enumerate(run(hc, stats))
    ]
    with _open_out(args.output) as out:
        streams.write_records(records, out)
    if args.figures and records:
        from .plotting import memory_figure

        memory_figure(records, args.figures, sorted(changes or ()))
    return EXIT_OK


def cmd_smooth(args) -> int:
    rows, hc, changes = _load_stream(args)
    stats, _ = streams.to_stats(hc.family, rows)
    records = []
    if stats:
        res = smooth(hc, stats)
        for t, theta in enumerate(res.combined):
            rec: dict[str, Any] = {"t": t, "family": hc.family.name, "eta_eff": theta.eta}
            rec["clamped"] = res.clamped[t]
            rec["posterior"] = hc.family.summary(theta)
            rec["forward"] = streams.diagnostics_fields(res.forward[t][1])
            rec["backward"] = streams.diagnostics_fields(res.backward[t][1])
            rec["change"] = None if changes is None else t in changes
            records.append(rec)
    with _open_out(args.output) as out:
        streams.write_records(records, out)
    if args.figures and records:
        from .plotting import smooth_figure

        smooth_figure(records, args.figures, sorted(changes or ()))
    return EXIT_OK


def cmd_ar(args) -> int:
    if args.order < 1:
        raise ConfigError(f"field 'order': must be >= 1, got {args.order}")
    raw = dict(cfgmod.PRESETS["ar"])
    if args.config:
        raw.update(cfgmod.load(args.config))
    raw.update(cfgmod.parse_overrides(args.set or []))
    raw.pop("family", None)
    raw.pop("dim", None)
    family = LinRegNIG(args.order)
    hc = cfgmod.build(raw, family)
    text = streams.read_text(args.input)
    rows = streams.parse_rows(text, args.format or streams.detect_format(args.input, text))
    signal = []
    for row in rows:
        v = streams.observation(make_family("nig"), row)
        signal.append(float(v[0]))
    changes = streams.read_changes(args.changes) if args.changes else None
    steps = ar_fit(ArConfig(args.order, hc, args.smoothing), signal)
    records = []
    prev = hc.theta_0
    for s in steps:
        recent = signal[s.t - args.order : s.t]
        (pm, pv), = ar_predict(family, prev, recent, 1)
        rec: dict[str, Any] = {"t": s.t, "family": family.name}
        rec.update(streams.diagnostics_fields(s.diagnostics))
        rec.update(
            coef_mean=s.coef_mean, coef_sd=s.coef_sd, noise_var_mean=s.noise_var_mean, pred_mean=pm, pred_var=pv,
            change=None if changes is None else s.t in changes,
        )
        records.append(rec)
        prev = s.theta
    with _open_out(args.output) as out:
        streams.write_records(records, out)
    if args.figures and records:
        from .plotting import ar_figure

        ar_figure(records, signal, args.figures, sorted(changes or ()))
    return EXIT_OK


def _param_value(text: str):
    parts = [p.strip() for p in text.split(",")]
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"--param value {text!r} is not numeric") from None
    return nums[0] if len(nums) == 1 else tuple(nums)


def cmd_generate(args) -> int:
    params = {k: _param_value(v) for k, v in cfgmod.parse_overrides(args.param or []).items()}
    syn = generate(SyntheticSpec(args.scenario, args.seed, params))
    obs = np.asarray(syn.observations)
    with _open_out(args.output) as out:
        for x in obs:
            vals = np.atleast_1d(x)
            if args.format == "jsonl":
                out.write(streams.dumps(vals.tolist() if vals.size > 1 else float(vals[0])) + "\n")
            else:
                out.write(",".join(format(float(v), ".17g") for v in vals) + "\n")
    sidecar = args.changes_out or (None if args.output == "-" else args.output + ".changes.json")
    if sidecar:
        with _open_out(sidecar) as out:
            out.write(streams.dumps({"scenario": args.scenario, "seed": args.seed,
                                     "changes": list(syn.changes), "artifacts": list(syn.artifacts)}) + "\n")
    return EXIT_OK


def _beta_arg(text: str, name: str) -> BetaParams:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"{name} must be 'alpha,beta', got {text!r}") from None
    try:
        return BetaParams(a, b)
    except ConfigError as exc:
        raise ConfigError(f"{name}: {exc}") from None


def cmd_optdemo(args) -> int:
    if args.iterations < 0:
        raise ConfigError("iterations must be >= 0")
    try:
        sizes = tuple(int(s) for s in args.sizes.split(","))
    except ValueError:
        raise ConfigError(f"--sizes must be comma-separated integers, got {args.sizes!r}") from None
    if any(s < 1 for s in sizes):
        raise ConfigError("group sizes must be positive")
    if not 0.0 <= args.outlier_rate <= 1.0:
        raise ConfigError("outlier rate must lie in [0, 1]")
    config = OptimizerConfig(
        step_size=args.step_size, phi1_0=_beta_arg(args.phi1, "--phi1"), phi2_0=_beta_arg(args.phi2, "--phi2")
    )
    testbed = Testbed(sizes=sizes, noise=args.noise, outlier_rate=args.outlier_rate, outlier_scale=args.outlier_scale)
    res = train_testbed(testbed, config, args.iterations, args.seed)
    os.makedirs(args.output_dir, exist_ok=True)
    with _open_out(os.path.join(args.output_dir, "loss.jsonl")) as out:
        streams.write_records(
            ({"t": t, "loss": res.loss[t], "baseline_loss": res.baseline_loss[t], "outlier": bool(res.outliers[t])}
             for t in range(args.iterations)),
            out,
        )
    with _open_out(os.path.join(args.output_dir, "memory.jsonl")) as out:
        streams.write_records(
            ({"t": t, "group": g, "e_w1": res.memory[t, 2 * g], "e_w2": res.memory[t, 2 * g + 1]}
             for t in range(args.iterations) for g in range(len(sizes))),
            out,
        )
    summary = {
        "iterations": args.iterations,
        "outliers": int(res.outliers.sum()),
        "final_loss": final_loss(res.loss),
        "baseline_final_loss": final_loss(res.baseline_loss),
    }
    sys.stdout.write(streams.dumps(summary) + "\n")
    if args.figures and args.iterations:
        from .plotting import optimizer_figure

        optimizer_figure(res.loss, res.baseline_loss, res.memory, res.outliers, args.figures)
    return EXIT_OK


def _stream_args(p: argparse.ArgumentParser, family=True):
    p.add_argument("input", nargs="?", default="-", help="input file, or - for stdin (default)")
    p.add_argument("-o", "--output", default="-", help="output JSON-lines file (default stdout)")
    p.add_argument("--format", choices=("csv", "jsonl"), help="input format (default: from extension or content)")
    if family:
        p.add_argument("--family", choices=sorted(cfgmod.PRIOR_KEYS), help="observation family")
        p.add_argument("--dim", type=int, help="observation dimension (default: from the first row)")
        p.add_argument("--preset", help=f"start from a preset: {', '.join(cfgmod.PRESETS)}")
    p.add_argument("-c", "--config", help="key=value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config field")
    p.add_argument("--changes", help="file with true change trials, used to flag records")
    p.add_argument("--figures", metavar="DIR", help="also render PNG figures into DIR")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hafvf", description="Hierarchical adaptive forgetting filters.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter", help="online filtering, one record per observation")
    _stream_args(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("smooth", help="offline forward-backward smoothing")
    _stream_args(p)
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("ar", help="adaptive autoregressive model of a scalar signal")
    _stream_args(p, family=False)
    p.add_argument("--order", type=int, required=True, help="AR order")
    p.add_argument("--smoothing", choices=("forward", "forward-backward"), default="forward")
    p.set_defaults(func=cmd_ar)

    p = sub.add_parser("generate", help="write a synthetic scenario")
    p.add_argument("scenario", help=f"one of: {', '.join(SCENARIOS)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="scenario parameter")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--changes-out", help="change-trial sidecar (default: OUTPUT.changes.json)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("optdemo", help="optimizer comparison on a noisy quadratic with outliers")
    p.add_argument("--iterations", type=int, default=250)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step-size", type=float, default=0.05)
    p.add_argument("--sizes", default="10", help="comma-separated parameter group sizes")
    p.add_argument("--noise", type=float, default=0.5)
    p.add_argument("--outlier-rate", type=float, default=0.01)
    p.add_argument("--outlier-scale", type=float, default=100.0)
    p.add_argument("--phi1", default="9,1", help="prior over w1 as alpha,beta")
    p.add_argument("--phi2", default="9.5,0.5", help="prior over w2 as alpha,beta")
    p.add_argument("--output-dir", default=".", help="where loss.jsonl and memory.jsonl go")
    p.add_argument("--figures", metavar="DIR")
    p.set_defaults(func=cmd_optdemo)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    level = os.environ.get("HAFVF_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head); not an error here
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return EXIT_OK
    except InputError as exc:
        print(f"hafvf: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConfigError as exc:
        print(f"hafvf: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, DomainError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"hafvf: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except HafvfError as exc:
        print(f"hafvf: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
