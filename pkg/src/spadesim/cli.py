"""Command-line surface.

Subcommands:
  fisher    information bounds for one PSF model
  modes     export projection-mode samples
  simulate  one acquisition, raw outcome dump
  sweep     full Monte Carlo sweep from a config file
  hologram  synthesize masks / read out a masked field

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from .errors import NumericalError, SpadesimError
from .fisher import (classical_fisher_exact, classical_fisher_smalld,
                     pixelated_classical_fisher, qcrlb, quantum_fisher)
from .hologram import (GridSpec, first_order_readout, mode_bandwidth,
                       read_field_samples, read_mask_text, synthesize,
                       write_mask_pgm, write_mask_text)
from .modes import (ProbabilityCurves, binary_outcome_fisher, optimal_mode,
                    psf_mode, sample_mode)
from .numerics import RngStream
from .psf import load_tabulated, make_gaussian, make_sinc
from .simulate import (EmccdParams, SceneConfig, default_ccd_edges,
                       simulate_ccd, simulate_projection)
from .sweep import (load_config, run_sweep, write_provenance, write_sweep_csv,
                    write_trials_csv)

USAGE_EXIT = 2
NUMERICAL_EXIT = 3


def _add_psf_arguments(parser):
    parser.add_argument("--psf", required=True,
                        choices=("gaussian", "sinc", "tabulated"),
                        help="PSF model kind")
    parser.add_argument("--width", type=float,
                        help="PSF width (sigma for gaussian, w for sinc)")
    parser.add_argument("--psf-file",
                        help="two-column (x, amplitude) samples for --psf tabulated")


def _build_psf(args):
    if args.psf == "tabulated":
        if not args.psf_file:
            raise SpadesimError("--psf tabulated requires --psf-file")
        return load_tabulated(args.psf_file)
    if args.width is None:
        raise SpadesimError(f"--psf {args.psf} requires --width")
    if args.psf == "gaussian":
        return make_gaussian(args.width)
    return make_sinc(args.width)


def _cmd_fisher(args):
    psf = _build_psf(args)
    fq = quantum_fisher(psf)
    law = classical_fisher_smalld(psf)
    print(f"psf: {args.psf}, width = {psf.width!r}")
    print(f"quantum_fisher_per_photon = {fq!r}")
    print(f"qcrlb_per_photon = {1.0 / fq!r}")
    print(f"qcrlb(N={args.photons}) = {qcrlb(psf, args.photons)!r}")
    flag = "  (divergent: truncated-domain value)" if law.divergent else ""
    print(f"classical_smalld_coefficient = {law.coefficient!r}{flag}")
    print("delta/width,classical_fisher_exact,qcrlb_over_classical_crlb")
    start, stop, step = args.delta_grid
    d = start
    while d <= stop + 1e-9:
        fcl = classical_fisher_exact(psf, d * psf.width)
        ratio = fq / fcl if fcl > 0 else float("inf")
        print(f"{d!r},{fcl!r},{ratio!r}")
        d += step
    return 0


def _cmd_modes(args):
    psf = _build_psf(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for mode in (psf_mode(psf), optimal_mode(psf)):
        x, amp = sample_mode(mode, args.points)
        path = out / f"{mode.label}_mode.txt"
        with open(path, "w", newline="\n") as fh:
            fh.write(f"# {mode.label} mode, psf={args.psf}, width={psf.width!r}\n")
            fh.write(f"# norm_check = {mode.norm_check!r}\n")
            for xi, ai in zip(x, amp):
                fh.write(f"{float(xi)!r} {float(ai)!r}\n")
        print(f"wrote {path}")
    return 0


def _cmd_simulate(args):
    psf = _build_psf(args)
    scene = SceneConfig(delta_true=args.delta, psf=psf,
                        photon_budget=args.photons,
                        photon_model=args.photon_model)
    rng = RngStream(args.seed)
    if args.method == "projection":
        emccd = None
        if args.gain is not None:
            emccd = EmccdParams(gain=args.gain,
                                readout_sigma=args.readout_sigma,
                                pixel_capacity=args.pixel_capacity)
        probs = ProbabilityCurves(psf).probabilities(args.delta)
        outcome = simulate_projection(scene, probs, emccd, rng)
        print(f"p_0 = {probs.p_0!r}, p_a = {probs.p_a!r}, p_lost = {probs.p_lost!r}")
        print(f"n_0 = {outcome.n_0}, n_a = {outcome.n_a}, n_lost = {outcome.n_lost}")
        print(f"recovered_0 = {outcome.recovered_0}, recovered_a = {outcome.recovered_a}")
        if outcome.analog_0 is not None:
            print(f"analog_0 = {outcome.analog_0!r}, analog_a = {outcome.analog_a!r}")
    else:
        edges = default_ccd_edges(psf, args.ccd_pixels, args.ccd_halfwidth)
        frame = simulate_ccd(scene, edges, rng)
        counts = frame.counts
        centers = 0.5 * (edges[1:] + edges[:-1])
        total = int(counts.sum())
        print(f"pixels = {len(counts)}, span = [{edges[0]!r}, {edges[-1]!r}]")
        print(f"total_counts = {total}")
        if total:
            mean = float(np.sum(centers * counts) / total)
            print(f"mean_position = {mean!r}")
        occupied = np.nonzero(counts)[0]
        if occupied.size:
            lo, hi = occupied[0], occupied[-1] + 1
            print(f"occupied_pixels = {lo}..{hi - 1}")
    return 0


def _cmd_sweep(args):
    config = load_config(args.config)
    if args.dump_trials:
        config = type(config)(**{**config.__dict__, "dump_trials": True})
    result = run_sweep(config, workers=args.workers)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    csv_path = prefix.with_suffix(".csv")
    json_path = prefix.with_suffix(".json")
    write_sweep_csv(result, csv_path)
    write_provenance(result, json_path)
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    if result.trials is not None:
        trials_path = prefix.parent / (prefix.stem + "_trials.csv")
        write_trials_csv(result, trials_path)
        print(f"wrote {trials_path}")
    return 0


def _cmd_hologram_synth(args):
    psf = _build_psf(args)
    mode = optimal_mode(psf) if args.mode == "optimal" else psf_mode(psf)
    carrier = args.carrier
    if carrier is None:
        carrier = args.carrier_mult * mode_bandwidth(mode)
    half = args.grid_halfwidth or psf.truncation_radius
    grid = GridSpec(start=-half, stop=half, n_samples=args.samples)
    mask = synthesize(mode, carrier, grid)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    txt = prefix.with_suffix(".txt")
    pgm = prefix.with_suffix(".pgm")
    write_mask_text(mask, txt)
    write_mask_pgm(mask, pgm, rows=args.pgm_rows)
    print(f"carrier_frequency = {mask.carrier_frequency!r}")
    print(f"mode_bandwidth = {mask.mode_bandwidth!r}")
    print(f"wrote {txt}")
    print(f"wrote {pgm}")
    return 0


def _cmd_hologram_readout(args):
    mask = read_mask_text(args.mask)
    field = read_field_samples(args.input, mask)
    value = first_order_readout(mask, field)
    print(f"first_order_readout = {value!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spadesim",
        description="Two-point separation estimation by mode projection "
                    "versus direct imaging.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fisher", help="print information bounds for a PSF")
    _add_psf_arguments(p)
    p.add_argument("--photons", type=int, default=100_000,
                   help="photon budget used for the qCRLB line")
    p.add_argument("--delta-grid", type=_parse_grid, default=(0.2, 2.0, 0.2),
                   metavar="START,STOP,STEP",
                   help="classical-FI table grid in width units")
    p.set_defaults(func=_cmd_fisher)

    p = sub.add_parser("modes", help="export projection-mode samples")
    sub_modes = p.add_subparsers(dest="modes_command", required=True)
    pe = sub_modes.add_parser("export", help="write mode samples as text")
    _add_psf_arguments(pe)
    pe.add_argument("--out-dir", default=".", help="output directory")
    pe.add_argument("--points", type=int, default=2048)
    pe.set_defaults(func=_cmd_modes)

    p = sub.add_parser("simulate", help="run one acquisition")
    _add_psf_arguments(p)
    p.add_argument("--delta", type=float, required=True,
                   help="true separation (absolute units)")
    p.add_argument("--photons", type=int, default=100_000)
    p.add_argument("--photon-model", choices=("fixed", "poisson"),
                   default="poisson")
    p.add_argument("--method", choices=("projection", "ccd"),
                   default="projection")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gain", type=float, help="enable the EMCCD model")
    p.add_argument("--readout-sigma", type=float, default=0.0)
    p.add_argument("--pixel-capacity", type=float, default=1e12)
    p.add_argument("--ccd-pixels", type=int)
    p.add_argument("--ccd-halfwidth", type=float,
                   help="camera halfwidth in width units")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="run a Monte Carlo separation sweep")
    p.add_argument("--config", required=True, help="flat key = value file")
    p.add_argument("--out", required=True,
                   help="output prefix (.csv and .json are appended)")
    p.add_argument("--workers", type=int,
                   help=f"process count (default: min(4, cores); env {'SPADESIM_WORKERS'})")
    p.add_argument("--dump-trials", action="store_true",
                   help="also write per-trial estimates")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("hologram", help="amplitude-mask synthesis and readout")
    sub_holo = p.add_subparsers(dest="hologram_command", required=True)
    ps = sub_holo.add_parser("synth", help="write a mask as text and graymap")
    _add_psf_arguments(ps)
    ps.add_argument("--mode", choices=("optimal", "psf"), default="optimal")
    ps.add_argument("--carrier", type=float,
                    help="carrier frequency (cycles per length unit)")
    ps.add_argument("--carrier-mult", type=float, default=10.0,
                    help="carrier as a multiple of the mode bandwidth "
                         "(used when --carrier is absent)")
    ps.add_argument("--grid-halfwidth", type=float,
                    help="mask halfwidth (default: mode support)")
    ps.add_argument("--samples", type=int, default=4096)
    ps.add_argument("--pgm-rows", type=int, default=64)
    ps.add_argument("--out", required=True, help="output prefix")
    ps.set_defaults(func=_cmd_hologram_synth)
    pr = sub_holo.add_parser("readout", help="first-order readout of a field")
    pr.add_argument("--mask", required=True, help="mask text file from synth")
    pr.add_argument("--input", required=True,
                    help="two-column (x, field) samples on the mask grid")
    pr.set_defaults(func=_cmd_hologram_readout)

    return parser


def _parse_grid(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected START,STOP,STEP")
    start, stop, step = (float(p) for p in parts)
    if step <= 0 or start <= 0 or stop < start:
        raise argparse.ArgumentTypeError("grid must be positive and increasing")
    return start, stop, step


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_EXIT
    except SpadesimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
