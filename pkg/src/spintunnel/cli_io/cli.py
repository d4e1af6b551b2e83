"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 computation failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings
from fractions import Fraction

import numpy as np

from ..core_model import SpinSystem, transition_data
from ..numerical_oracle import OracleConfig, evolve, fit_initial_slope, golden_rule_entropy_slope
from ..spectra import exact_splitting
from .output import emit
from .presets import ConfigError, load_preset
from .sweep import OUTPUT_COLUMNS, VARIABLES, GridRange, SweepSpec, SweepTable, run_sweep

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_COMPUTE = 3

ORACLE_DEFAULTS = {"s": Fraction(1), "A": 1e-24, "B": 1e-26}


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _half_integer(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number like 10 or 3/2, got {text!r}") from None
    if (2 * value).denominator != 1:
        raise argparse.ArgumentTypeError(f"{text!r} is not a half-integer")
    return value


def _shared(parser: argparse.ArgumentParser, default_T: str) -> None:
    group = parser.add_argument_group("model parameters")
    group.add_argument("--preset", help="mn12 (default), spm, or a key=value config file")
    group.add_argument("--s", type=_half_integer, help="spin quantum number, e.g. 10 or 3/2")
    group.add_argument("--A", type=float, help="easy-axis anisotropy (J)")
    group.add_argument("--B", type=float, help="transverse anisotropy (J)")
    group.add_argument("--Bint", type=float, help="spin-phonon coupling (J)")
    group.add_argument("--rho", type=float, help="mass density (kg/m^3)")
    group.add_argument("--c", type=float, help="sound velocity (m/s)")
    group.add_argument("--T", type=_float_list, default=_float_list(default_T),
                       help=f"temperature(s) in K, comma separated (default {default_T})")
    group.add_argument("--m", type=_half_integer, help="initial level m (default s)")
    group.add_argument("--t-max", type=float, help="final time (s)")
    group.add_argument("--steps", type=int, default=100, help="time steps (default 100)")
    group.add_argument("--form", choices=("exponential", "bracket"), default="exponential")
    out = parser.add_argument_group("output")
    out.add_argument("--out", default="-", help="output path (default stdout)")
    out.add_argument("--format", choices=("csv", "json"), default="csv")
    out.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                     help="worker processes for sweeps (default: all processors)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spintunnel",
        description="Spin tunneling and phonon-induced decoherence of giant-spin particles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("splitting", help="exact and instanton ground-doublet splitting")
    _shared(p, "4")

    p = sub.add_parser("tunnel-prob", help="probability of |-s> versus time")
    _shared(p, "4")

    p = sub.add_parser("entropy-rate", help="linear-entropy rate and decoherence time")
    _shared(p, "4")

    p = sub.add_parser("sweep", help="parameter sweep (default: rate vs m at 2, 4, 8 K)")
    _shared(p, "2,4,8")
    p.add_argument("--variable", choices=tuple(VARIABLES), default="initial_m")
    p.add_argument("--grid", type=_float_list, help="explicit grid values, comma separated")
    p.add_argument("--range", nargs=3, metavar=("MIN", "MAX", "COUNT"), help="grid range")
    p.add_argument("--scale", choices=("linear", "log"), default="linear")
    p.add_argument("--outputs", default="entropy_rate",
                   help=f"comma separated, from: {', '.join(OUTPUT_COLUMNS)}")
    p.add_argument("--t", type=float, default=0.0, help="time for p_minus_s when not swept (s)")

    p = sub.add_parser("oracle", help="exact single-mode evolution and entropy-slope check")
    _shared(p, "0")
    p.add_argument("--g", type=float, default=1e-28, help="spin-mode coupling (J)")
    p.add_argument("--mode-freq", type=float,
                   help="mode angular frequency (rad/s); default |omega_{m,m-2}|")
    p.add_argument("--n-max", type=int, default=10, help="phonon truncation")
    p.add_argument("--window", type=float, default=0.5, help="slope-fit window fraction")
    p.add_argument("--initial-phonons", choices=("vacuum", "thermal"), default="vacuum")
    p.add_argument("--seed", type=int, default=0)
    return parser


def _preset(args, oracle: bool = False):
    preset = load_preset(args.preset or "mn12")
    if oracle and args.preset is None:
        # the oracle needs s <= 3, so it starts from a small spin
        preset = preset.with_overrides(**ORACLE_DEFAULTS)
    return preset.with_overrides(s=args.s, A=args.A, B=args.B, B_int=args.Bint, rho=args.rho, c=args.c)


def _single_temperature(args) -> float:
    if len(args.T) != 1:
        raise UsageError(f"--T takes a single value for {args.command}")
    return args.T[0]


def _cmd_splitting(args) -> SweepTable:
    preset = _preset(args)
    result = exact_splitting(preset.sys)
    inst = result.delta_e_instanton
    sys_ = preset.sys
    row = {
        "s": sys_.s,
        "A_J": sys_.A,
        "B_J": sys_.B,
        "delta_e_exact_J": result.delta_e_exact,
        "delta_e_resolution_J": result.resolution,
        "e0_J": result.e0,
        "e1_J": result.e1,
        "delta_e_instanton_J": float(inst),
        "delta_e_instanton_log10_abs": inst.log10_abs,
        "delta_omega_inst_rad_s": result.delta_omega_inst,
        "precision_digits": result.precision_digits,
    }
    return SweepTable(list(row), [row])


def _cmd_entropy_rate(args) -> SweepTable:
    preset = _preset(args)
    m = preset.sys.s if args.m is None else args.m
    spec = SweepSpec(preset, "initial_m", [m], ("entropy_rate",), tuple(args.T))
    return run_sweep(spec, jobs=1)


def _cmd_tunnel_prob(args) -> SweepTable:
    preset = _preset(args)
    T = _single_temperature(args)
    if args.t_max is None:
        raise UsageError("tunnel-prob needs --t-max")
    grid = GridRange(0.0, args.t_max, args.steps + 1)
    spec = SweepSpec(preset, "time", grid, ("p_minus_s", "gamma"), (T,), form=args.form)
    return run_sweep(spec, jobs=args.jobs)


def _cmd_sweep(args) -> SweepTable:
    preset = _preset(args)
    if args.grid is not None and args.range is not None:
        raise UsageError("give either --grid or --range, not both")
    grid = args.grid
    if args.range is not None:
        lo, hi, count = args.range
        try:
            grid = GridRange(float(lo), float(hi), int(count), args.scale)
        except ValueError:
            raise UsageError(f"--range expects MIN MAX COUNT, got {' '.join(args.range)}") from None
    outputs = tuple(o.strip() for o in args.outputs.split(",") if o.strip())
    spec = SweepSpec(preset, args.variable, grid, outputs, tuple(args.T), m=args.m, t=args.t, form=args.form)
    return run_sweep(spec, jobs=args.jobs)


def _cmd_oracle(args) -> SweepTable:
    preset = _preset(args, oracle=True)
    sys_: SpinSystem = preset.sys
    m = sys_.s if args.m is None else args.m
    T = _single_temperature(args)
    mode_freq = args.mode_freq
    if mode_freq is None:
        data = transition_data(sys_, m)
        omega = data.omega_down if data.omega_down is not None else data.omega_up
        mode_freq = abs(omega or 0.0)
    if args.t_max is None:
        raise UsageError("oracle needs --t-max")
    cfg = OracleConfig(
        sys=sys_, mode_freq=mode_freq, coupling=args.g, n_max=args.n_max, t_max=args.t_max,
        steps=args.steps, initial_m=m, initial_phonons=args.initial_phonons,
        temperature=T, seed=args.seed,
    )
    traj = evolve(cfg)
    fit = fit_initial_slope(traj, args.window)
    predicted = golden_rule_entropy_slope(cfg, args.window)
    print(
        f"fitted entropy slope {fit.slope:.6e} 1/s (R^2 {fit.r_squared:.6f}); "
        f"golden-rule slope {predicted:.6e} 1/s; norm drift {traj.norm_drift:.3e}",
        file=sys.stderr,
    )
    columns = ["t_s", "purity", "entropy", "p_minus_s"]
    rows = [
        dict(zip(columns, map(float, values)))
        for values in zip(traj.times, traj.purity, traj.entropy, traj.p_minus_s)
    ]
    return SweepTable(columns, rows)


COMMANDS = {
    "splitting": _cmd_splitting,
    "tunnel-prob": _cmd_tunnel_prob,
    "entropy-rate": _cmd_entropy_rate,
    "sweep": _cmd_sweep,
    "oracle": _cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on bad usage
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            table = COMMANDS[args.command](args)
    except np.linalg.LinAlgError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (UsageError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # any numerical failure
        print(f"computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    try:
        emit(table, args.format, args.out)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if table.failed:
        print(f"{table.failed} sweep point(s) failed; see the error column", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
