"""
This script runs one popcache command.

It requires a .yaml (or .json) input file containing:
- System parameters
    - N: library size
    - K: number of users, a single value or a list
    - K_T: number of transmitters
    - gamma, gamma_T: receiver and transmitter cache fractions
    - F: subpacketization budget
    - lambda: number of receiver caches (optional)
- Popularity
    - alpha: Zipf exponent, a single value or a list
- Run options
    - trials, seed, q_max, strict_b1
    - output_filename for generating the corresponding .csv file

Usage:

$ python run_popcache.py <path/to/input> [command]
"""

import sys
from argparse import ArgumentParser

from popcache.cli import main
from popcache.files import RunConfig


def parse_args():
    """
    Function to parse argments from command line

    Returns
    - args: a namespace with the input filename and the command
    """
    parser = ArgumentParser(
        prog="Run popcache",
        description="Optimize the transmitter cache segmentation for an input file"
    )
    parser.add_argument("filename", help="Input filename")
    parser.add_argument(
        "command", nargs="?", default="sweep",
        choices=["optimize", "sweep", "simulate", "bound", "verify", "place"],
    )
    return parser.parse_args()


if __name__ == "__main__":
    args = parse_args()
    config = RunConfig.read(args.filename)
    sys.exit(main([
        args.command,
        "--config", args.filename,
        "--out", f"{config.output_filename}.{'json' if args.command in ('optimize', 'verify', 'place') else 'csv'}",
        "--log-level", "INFO",
    ]))
