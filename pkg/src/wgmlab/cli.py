"""Command-line entry point: ``wgmlab <subcommand> [options]``."""
from __future__ import annotations

import argparse
import json
import sys

from .config import ConfigError, default_config_text, load_config, parse_config
from .report import FORMATS, ExportError, export, render_figures
from .runner import REPORT_SECTIONS, ExperimentError, run_experiment

def _n_range(text: str) -> list:
    """``a:b:step`` (inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            parts = [int(v) for v in text.split(":")]
            a, b = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            return list(range(a, b + 1, step))
        return [int(v) for v in text.split(",")]
    except (ValueError, IndexError):
        raise argparse.ArgumentTypeError(f"bad n-range {text!r}: use a:b:step or n1,n2,...") from None


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="JSON experiment config (default: built-in annulus)")
    common.add_argument("--out", metavar="DIR", help="output directory (default from config)")
    common.add_argument("--format", choices=FORMATS, help="export format (default from config)")
    common.add_argument("--threads", type=int, default=1, metavar="K", help="worker threads over n")
    common.add_argument("--figures", action=argparse.BooleanOptionalAction, default=None,
                        help="render PNG figures (default: on for report)")
    common.add_argument("--quiet", action="store_true", help="suppress the check summary")

    parser = argparse.ArgumentParser(prog="wgmlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("potential", parents=[common], help="effective potential and E_0, eta_0")
    p.add_argument("--samples", type=int, help="number of s samples")

    p = sub.add_parser("agmon", parents=[common], help="Agmon distance profile")
    p.add_argument("--E", type=float, help="energy (default E_0)")
    p.add_argument("--nodes", type=int, help="grid size")
    p.add_argument("--seed", type=int, help="seed for the random oracle check")

    p = sub.add_parser("solve", parents=[common], help="radial eigenpairs for one n")
    p.add_argument("--n", type=int)
    p.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--nodes", type=int)
    p.add_argument("--pole-cut", type=float)
    p.add_argument("--oracle", action="store_true", help="compare with the shooting oracle")

    p = sub.add_parser("quasimode", parents=[common], help="quasimode residual scaling")
    p.add_argument("--E", type=float)
    p.add_argument("--h-list", type=_floats, metavar="H1,H2,...")

    for name, text in (("decay", "exponential concentration fit"), ("waves", "wave tunneling fit")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--omega", type=float, nargs=2, metavar=("A", "B"))
        p.add_argument("--n-range", type=_n_range, metavar="A:B:STEP")
        p.add_argument("--pole-cut", type=float)
        if name == "decay":
            p.add_argument("--eps", type=float)
        else:
            p.add_argument("--T", type=float)

    sub.add_parser("report", parents=[common], help="all sections with figures")
    return parser


OVERRIDES = {"samples": "potential_samples", "E": "E", "nodes": None, "seed": "seed", "n": "n",
             "window": "window", "pole_cut": "pole_cut", "oracle": "oracle", "h_list": "h_list",
             "omega": "omega", "n_range": "n_values", "eps": "eps", "T": "T"}


def _config_with_overrides(args):
    text = default_config_text() if args.config is None else None
    cfg = parse_config(text) if text is not None else load_config(args.config)
    raw = json.loads(cfg.echo)
    params = raw.setdefault("parameters", {})
    for arg, key in OVERRIDES.items():
        val = getattr(args, arg, None)
        if val is None or val is False:
            continue
        if arg == "nodes":
            key = "agmon_nodes" if args.command == "agmon" else "nodes"
        params[key] = list(val) if isinstance(val, (list, tuple)) else val
    experiment = "full-report" if args.command == "report" else args.command
    raw["experiment"] = experiment
    # the echo stays bit-exact to the input file; overrides are kept alongside
    merged = parse_config(json.dumps(raw))
    merged.echo = cfg.echo
    merged.overrides = {k: v for k, v in params.items() if getattr(cfg.parameters, k) != v}
    if experiment != cfg.experiment:
        merged.overrides["experiment"] = experiment
    return merged


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_with_overrides(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = args.out or cfg.output.get("dir", "results")
    fmt = args.format or cfg.output.get("format", "csv")
    sections = REPORT_SECTIONS if args.command == "report" else (args.command,)
    try:
        bundle = run_experiment(cfg, threads=args.threads, sections=list(sections))
    except ExperimentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    figures = args.figures if args.figures is not None else args.command == "report"
    try:
        files = export(bundle, out, fmt)
        if figures:
            files += render_figures(bundle, out)
        if args.command == "report" and fmt != "json":
            files += export(bundle, out, "json")
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not args.quiet:
        for sec, chk in bundle.checks:
            print(f"{'PASS' if chk.passed else 'FAIL'}  {sec}: {chk.name}")
        s = bundle.summary
        print(f"{s['passed']}/{s['total']} checks passed; {len(files)} files written to {out}")
    return 0 if bundle.passed else 1


if __name__ == "__main__":
    sys.exit(main())
