"""Command-line interface.

Subcommands:
  solve <config>       run a transient sweep and write CSVs + figures
  oracle-rod <config>  emit the analytic fixed-free rod histories on the
                       same time grid (config must be a zero-Poisson rod)
  gibbs-demo           1-D demonstration of frequency-window Gibbs
                       suppression on an ideal square-wave spectrum
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, parse_config
from .driver import SweepError, analytic_rod_oracle, emit_outputs, run_sweep
from .transform import conjugate_fill, inverse_mft

logger = logging.getLogger(__name__)


def _cmd_solve(args) -> int:
    cfg = parse_config(args.config)
    result = run_sweep(cfg)
    written = emit_outputs(result, cfg)
    for name, path in sorted(written.items()):
        print(f"{name}: {path}")
    print(f"total iterations: {result.total_iterations}")
    if result.failed_frequencies:
        print(f"FAILED frequencies (histories poisoned): "
              f"{result.failed_frequencies}", file=sys.stderr)
        return 1
    return 0


def _cmd_oracle_rod(args) -> int:
    cfg = parse_config(args.config)
    if abs(cfg.material.nu) > 1e-12:
        print("oracle-rod requires a zero-Poisson material", file=sys.stderr)
        return 1
    length = float(cfg.mesh.vertices[:, 0].max() - cfg.mesh.vertices[:, 0].min())
    amplitudes = [s.amplitude for s in cfg.signals if s.kind == "heaviside"]
    if not amplitudes:
        print("oracle-rod requires a heaviside load signal", file=sys.stderr)
        return 1
    p0 = amplitudes[0]
    t = np.arange(cfg.n_omega) * (cfg.period / cfg.n_omega)
    u_free, sigma_fixed = analytic_rod_oracle(length, cfg.material.E,
                                              cfg.material.rho, p0, t)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, series in (("u_free", u_free), ("sigma_fixed", sigma_fixed)):
        path = out / f"oracle_{name}.csv"
        with path.open("w", encoding="ascii") as fh:
            fh.write("t,value\n")
            for ti, vi in zip(t, series):
                fh.write(f"{float(ti)!r},{float(vi)!r}\n")
        print(f"oracle_{name}: {path}")
    if cfg.figures:
        from . import report

        path = report.render_comparison(
            t, {"u_free": u_free / np.abs(u_free).max(),
                "sigma_fixed": sigma_fixed / np.abs(sigma_fixed).max()},
            "normalised analytic rod response", out / "oracle_rod.png")
        print(f"figure: {path}")
    return 0


def _cmd_gibbs_demo(args) -> int:
    n = args.samples
    half = np.zeros(n // 2 + 1, dtype=complex)
    odd = np.arange(1, n // 2 + 1, 2)
    half[odd] = -2j / (np.pi * odd)  # ideal square-wave line spectrum
    spec = conjugate_fill(half, 1.0, 0.0)
    truth = np.where(np.arange(n) < n // 2, 1.0, -1.0)
    t = np.arange(n) / n

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    series = {"exact": truth}
    overshoot = {}
    for window in ("rectangular", "hanning", "blackman"):
        rec = inverse_mft(spec, window, 0.0)
        series[window] = rec
        overshoot[window] = float((np.abs(rec) - 1.0).max())

    path = out / "gibbs_demo.csv"
    with path.open("w", encoding="ascii") as fh:
        fh.write("t,exact,rectangular,hanning,blackman\n")
        for i in range(n):
            row = (t[i], truth[i], series["rectangular"][i],
                   series["hanning"][i], series["blackman"][i])
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    print(f"gibbs_demo: {path}")
    for window, value in overshoot.items():
        print(f"overshoot {window}: {value:.6f}")
    ratio = overshoot["rectangular"] / max(overshoot["hanning"], 1e-300)
    print(f"suppression ratio (hanning): {ratio:.1f}x")

    from . import report

    fig_path = report.render_comparison(t, series, "square wave reconstruction",
                                        out / "gibbs_demo.png")
    print(f"figure: {fig_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ewbem",
        description="Transient elastodynamic BEM with exponentially "
                    "windowed frequency sweeps",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="enable info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run a sweep from a config file")
    p_solve.add_argument("config", type=Path)
    p_solve.set_defaults(func=_cmd_solve)

    p_oracle = sub.add_parser("oracle-rod",
                              help="emit analytic rod benchmark histories")
    p_oracle.add_argument("config", type=Path)
    p_oracle.set_defaults(func=_cmd_oracle_rod)

    p_gibbs = sub.add_parser("gibbs-demo",
                             help="frequency-window Gibbs suppression demo")
    p_gibbs.add_argument("--samples", type=int, default=512)
    p_gibbs.add_argument("--out", type=Path, default=Path("gibbs-demo"))
    p_gibbs.set_defaults(func=_cmd_gibbs_demo)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, SweepError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
