"""
HQAM-BICM design toolkit - command-line entry point.

Subcommands dump constellations, compute generalized weight spectra,
evaluate union bounds, run Monte Carlo BER sweeps and search for the best
(multiplexer, constellation) pair.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

from hqam_bicm.app.config import Config
from hqam_bicm.app.error_handler import ErrorHandler
from hqam_bicm.app.presenter import CommandPresenter
from hqam_bicm.app.presets import PRESETS
from hqam_bicm.ui.console_view import ConsoleView
from hqam_bicm.utils.path_manager import PathManager


def _add_code_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--code", help="octal generators, e.g. 5,7 (rows of a k_c > 1 code separated by ';')")
    mux = p.add_mutually_exclusive_group()
    mux.add_argument("--mux", help="D-MUX rows such as 2,2/1,1, 'identity', or 'all' canonical patterns")
    mux.add_argument("--rmux", help="R-MUX table such as '0,1/3,2/3;2/3,1/3,0'")
    mux.add_argument("--s-interleaver", dest="s_interleaver", action="store_true", default=None,
                     help="single interleaver over all coded bits")
    p.add_argument("--puncture", help="column-major keep-mask such as 10,11,01")
    p.add_argument("--wmax", type=int, help="spectrum truncation on the total weight")


def _add_channel_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--channel", choices=["awgn", "nakagami"])
    p.add_argument("--m", type=float, help="Nakagami shape parameter")
    p.add_argument("--snr", help="average SNR in dB: a:b:step or a comma list")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hqam-bicm", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--jobs", type=int, default=int(os.environ.get(Config.JOBS_ENV_VAR, "1")),
                        help=f"worker processes (default ${Config.JOBS_ENV_VAR} or 1)")
    parser.add_argument("--out-dir", default=".", help="directory for results and manifests")
    parser.add_argument("--log-file", default=Config.LOG_FILE, help="log file; empty string disables it")
    parser.add_argument("--strict", action="store_true", help="fail with exit code 3 on bound validity warnings")
    parser.add_argument("--verbose", action="store_true", help="debug logging and progress messages")
    parser.add_argument("--gnuplot", action="store_true", help="write tables as whitespace-separated .dat files")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constellation", help="points, labels, mu table and region check")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--alphas", default="", help="alpha_1..alpha_{q-1}, comma separated")
    p.add_argument("--unchecked", action="store_true", help="skip the region check")

    p = sub.add_parser("spectrum", help="generalized weight spectrum")
    _add_code_options(p)
    p.add_argument("--q", type=int, help="number of bit levels (inferred from the multiplexer if omitted)")
    p.add_argument("--M", type=int)
    p.add_argument("--example2", action="store_true", help="small worked example with a time-permuted D-MUX")

    p = sub.add_parser("bound", help="union bound curves")
    _add_code_options(p)
    _add_channel_options(p)
    p.add_argument("--M", type=int)
    p.add_argument("--alphas", help="alpha_1..alpha_{q-1}, or 'optimize' for random multiplexers")
    p.add_argument("--alpha-sweep", dest="alpha_sweep", action="store_true", default=None,
                   help="sweep the whole alpha grid instead of a single constellation")
    p.add_argument("--grid-step", dest="grid_step", type=float)
    p.add_argument("--J", type=int, help="D-MUX period used with --mux all")

    p = sub.add_parser("simulate", help="Monte Carlo BER sweep")
    _add_code_options(p)
    _add_channel_options(p)
    p.add_argument("--M", type=int)
    p.add_argument("--alphas")
    p.add_argument("--config", help="TOML or JSON simulation document")
    p.add_argument("--block-length", dest="block_length", type=int)
    p.add_argument("--min-errors", dest="min_errors", type=int)
    p.add_argument("--max-blocks", dest="max_blocks", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--all-zero", dest="all_zero", action="store_true", default=None)
    p.add_argument("--uncoded", action="store_true", default=None, help="bypass the code and hard-decide bits")

    p = sub.add_parser("optimize", help="joint multiplexer and constellation search")
    p.add_argument("--code")
    p.add_argument("--M", type=int)
    _add_channel_options(p)
    p.add_argument("--wmax", type=int)
    p.add_argument("--grid-step", dest="grid_step", type=float)
    p.add_argument("--J", type=int)
    p.add_argument("--target", type=float, help="freeze the design where the minimized bound reaches this value")
    p.add_argument("--ranked", action="store_true", default=None, help="include the best point of every pattern")

    for name in ("constellation", "spectrum", "bound", "simulate", "optimize"):
        choices = sorted(k for k, v in PRESETS.items() if v["command"] == name)
        sub.choices[name].add_argument("--preset", help=f"named scenario ({', '.join(choices) or 'none'})")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Command-line entry point.

    Returns:
        Process exit code: 0 success, 2 invalid configuration, 3 validity
        failure under --strict, 1 anything else.
    """
    # 1. Parse arguments
    args = build_parser().parse_args(argv)

    # 2. Logging and error notification
    ErrorHandler.setup_logging(args.log_file or None, logging.DEBUG if args.verbose else logging.INFO)
    view = ConsoleView(quiet=not args.verbose)
    ErrorHandler.set_notifier(lambda title, message: view.show_message(title, message, msg_type="error"))

    # 3. Wire the presenter
    presenter = CommandPresenter(view, PathManager(args.out_dir), jobs=args.jobs, strict=args.strict,
                                 gnuplot=args.gnuplot)

    # 4. Run the command
    try:
        return presenter.run(args.command, args)
    except Exception as e:
        ErrorHandler.handle_error(f"Unexpected failure in '{args.command}'", e)
        return Config.EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
