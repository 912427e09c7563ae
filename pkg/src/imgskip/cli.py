"""Command-line front end.

Experiment subcommands run one configured algorithm, writing a per-iteration
CSV (and optionally a float-map image dump and a convergence figure). The
``report`` subcommand renders figures from previously written CSVs.

Exit codes: 0 success, 2 divergence, 3 reference rejection.
"""

import argparse
import sys

from .errors import DivergenceError, ReferenceRejectedError
from .harness import ALGORITHMS, EXPERIMENTS, config_from_mapping, parse_config_file, run_experiment
from .report import render_report


def _add_experiment_args(sub):
    sub.add_argument("--algo", choices=ALGORITHMS, default=None)
    sub.add_argument("--p", type=float, default=None, help="skip probability in (0, 1]")
    sub.add_argument("--alpha", type=float, default=None)
    sub.add_argument("--huber-eps", type=float, default=None, dest="huber_eps")
    sub.add_argument("--gamma", type=float, default=None)
    sub.add_argument("--sigma", type=float, default=None)
    sub.add_argument("--tau", type=float, default=None)
    sub.add_argument("--omega", type=float, default=None)
    sub.add_argument("--iters", type=int, default=None, dest="outer_iters")
    sub.add_argument("--inner-iters", type=int, default=None, dest="inner_iters")
    sub.add_argument("--tol", type=float, default=None)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--repeats", type=int, default=None, dest="timing_repeats")
    sub.add_argument("--size", default=None, help="HxW, e.g. 64x64")
    sub.add_argument("--noise-sigma", type=float, default=None, dest="noise_sigma")
    sub.add_argument("--kernel-size", type=int, default=None, dest="kernel_size")
    sub.add_argument("--kernel-sigma", type=float, default=None, dest="kernel_sigma")
    sub.add_argument("--angles", type=int, default=None, dest="n_angles")
    sub.add_argument("--bins", type=int, default=None, dest="n_bins")
    sub.add_argument("--splitting", choices=("implicit", "explicit"), default=None)
    sub.add_argument("--config", default=None, help="key = value config file")
    sub.add_argument("--ref", default=None, dest="reference",
                     help="reference solution: 'auto' or a file path")
    sub.add_argument("--ref-iters", type=int, default=None, dest="ref_iters")
    sub.add_argument("--cache-dir", default=None, dest="cache_dir")
    sub.add_argument("--out", default=None, help="CSV output path")
    sub.add_argument("--dump-image", default=None, dest="dump_image",
                     help="float-map dump of the final image")
    sub.add_argument("--plot", default=None, help="convergence figure output path")


def build_parser():
    parser = argparse.ArgumentParser(prog="imgskip")
    subs = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        _add_experiment_args(subs.add_parser(name))
    rep = subs.add_parser("report", help="render figures from CSV logs")
    rep.add_argument("csvs", nargs="+")
    rep.add_argument("--out-dir", default="figures")
    rep.add_argument("--labels", default=None, help="comma-separated run labels")
    return parser


def _experiment_config(args):
    mapping = {}
    if args.config:
        mapping.update(parse_config_file(args.config))
    # CLI flags override the config file.
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        mapping[key] = value
    return config_from_mapping(args.command, mapping)


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "report":
        labels = args.labels.split(",") if args.labels else None
        written = render_report(args.csvs, args.out_dir, labels=labels)
        for path in written:
            print(path)
        return 0

    cfg = _experiment_config(args)
    try:
        _, _, summary = run_experiment(cfg)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ReferenceRejectedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    for key, value in summary.items():
        print(f"{key}: {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
