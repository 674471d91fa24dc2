"""Command-line front end.

Subcommands: gen, dstft, synth, roundtrip, parseval, window-compare,
wavefront. Every run writes a manifest echoing the fully resolved
configuration; JSON reports embed the same manifest. Exit codes: 0 ok,
2 configuration error, 3 I/O error, 4 degenerate math (window pairing).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import fileio, signals
from .directions import build_frame, canonical_frame, parse_directions
from .errors import DirstftError, PairingDegenerate, UnknownKind
from .lattice import Lattice, make_lattice
from .transform import dstft_forward, invert, parseval_check
from .wavefront import (
    WavefrontParams,
    default_directions,
    planar_directions,
    wavefront_map,
)
from .windowchange import verify_window_change
from .windows import WindowBank, pairing, parse_window_list

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DEGENERATE = 4


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"bad numeric list {text!r}") from None


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"bad integer list {text!r}") from None


def _parse_points(text: str) -> np.ndarray:
    rows = []
    for tok in text.split(";"):
        tok = tok.strip()
        if tok:
            rows.append(_csv_floats(tok))
    if not rows:
        raise ValueError("no points given")
    return np.asarray(rows, float)


def _lattice_from_flags(args, prefix: str = "") -> Lattice:
    origin = _csv_floats(getattr(args, prefix + "origin"))
    step = _csv_floats(getattr(args, prefix + "step"))
    count = _csv_ints(getattr(args, prefix + "count"))
    return make_lattice(origin, step, count)


def _write_json(path: str, obj: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, allow_nan=False)
        fh.write("\n")


def _write_csv(path: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        csv.writer(fh).writerows(rows)


def _manifest(args, command: str, config: dict, outputs: list[str]) -> dict:
    man = {
        "command": command,
        "config": config,
        "threads": args.threads,
        "deterministic": not args.fast_reduce,
        "outputs": outputs,
    }
    _write_json(os.path.join(args.out_dir, "manifest.json"), man)
    return man


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


# ---------------------------------------------------------------- commands

def cmd_gen(args) -> int:
    with open(args.recipe, "r", encoding="utf-8") as fh:
        recipe = signals.recipe_from_json(json.load(fh))
    if args.dirs:
        if recipe.kind not in ("jump_ridge", "ridge_spike"):
            raise ValueError("--dirs only applies to ridge recipes")
        u = parse_directions(args.dirs, len(_csv_floats(args.step)))
        recipe = signals.SignalRecipe(
            recipe.kind, u=tuple(u[0]), c=recipe.c, width=recipe.width,
            sigma=recipe.sigma, label=recipe.label,
        )
    lat = _lattice_from_flags(args)
    field = signals.render(recipe, lat)
    if args.label:
        field.label = args.label
    out = os.path.join(args.out_dir, args.out)
    fileio.write_sfld(field, out)
    _manifest(args, "gen", {
        "recipe": recipe.to_json(),
        "lattice": lat.to_json(),
    }, [out])
    return EXIT_OK


def _frame_bank_shift(args, n: int):
    analysis = parse_window_list(args.windows)
    synthesis = parse_window_list(args.synthesis) if args.synthesis else None
    bank = WindowBank.of(analysis, synthesis)
    if args.dirs:
        frame = build_frame(parse_directions(args.dirs, n), n)
    else:
        frame = canonical_frame(bank.k, n)
    shift = make_lattice(
        _csv_floats(args.shift_origin),
        _csv_floats(args.shift_step),
        _csv_ints(args.shift_count),
    )
    return frame, bank, shift


def cmd_dstft(args) -> int:
    field = fileio.read_sfld(args.infile)
    frame, bank, shift = _frame_bank_shift(args, field.lattice.dim)
    coeffs = dstft_forward(field, frame, bank, shift, threads=args.threads)
    out = os.path.join(args.out_dir, args.out)
    fileio.write_dstc(coeffs, out)
    _manifest(args, "dstft", {
        "in": args.infile,
        "windows": [w.grammar for w in bank.analysis],
        "synthesis": [w.grammar for w in bank.synthesis],
        "frame": frame.to_json(),
        "shift_lattice": shift.to_json(),
    }, [out])
    return EXIT_OK


def cmd_synth(args) -> int:
    coeffs = fileio.read_dstc(args.infile)
    out_lat = coeffs.signal_lattice
    rec = invert(coeffs, coeffs.bank, out_lat, threads=args.threads,
                 fast_reduce=args.fast_reduce)
    out = os.path.join(args.out_dir, args.out)
    fileio.write_sfld(rec, out)
    _manifest(args, "synth", {
        "in": args.infile,
        "out_lattice": out_lat.to_json(),
        "pairing": _clean(pairing(coeffs.bank)),
    }, [out])
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    field = fileio.read_sfld(args.infile)
    frame, bank, shift = _frame_bank_shift(args, field.lattice.dim)
    pair = pairing(bank)
    coeffs = dstft_forward(field, frame, bank, shift, threads=args.threads)
    rec = invert(coeffs, bank, field.lattice, threads=args.threads,
                 fast_reduce=args.fast_reduce)
    num = np.sqrt(np.sum(np.abs(rec.values - field.values) ** 2))
    den = np.sqrt(np.sum(np.abs(field.values) ** 2))
    rel = float(num / den) if den > 0 else 0.0
    rec_path = os.path.join(args.out_dir, args.out_prefix + ".sfld.json")
    metrics_path = os.path.join(args.out_dir, args.out_prefix + ".metrics.json")
    fileio.write_sfld(rec, rec_path)
    man = _manifest(args, "roundtrip", {
        "in": args.infile,
        "windows": [w.grammar for w in bank.analysis],
        "synthesis": [w.grammar for w in bank.synthesis],
        "frame": frame.to_json(),
        "shift_lattice": shift.to_json(),
    }, [rec_path, metrics_path])
    _write_json(metrics_path, {
        "rel_l2_error": rel,
        "pairing": _clean(pair),
        "grids": {
            "signal": field.lattice.to_json(),
            "shift": shift.to_json(),
        },
        "manifest": man,
    })
    return EXIT_OK


def cmd_parseval(args) -> int:
    f1 = fileio.read_sfld(args.in1)
    f2 = fileio.read_sfld(args.in2)
    g = parse_window_list(args.g_windows)
    psi = parse_window_list(args.psi_windows)
    frame = canonical_frame(len(g), f1.lattice.dim)
    shift = make_lattice(
        _csv_floats(args.shift_origin),
        _csv_floats(args.shift_step),
        _csv_ints(args.shift_count),
    )
    rep = parseval_check(f1, f2, g, psi, frame, shift, threads=args.threads)
    path = os.path.join(args.out_dir, args.out)
    man = _manifest(args, "parseval", {
        "in1": args.in1, "in2": args.in2,
        "g_windows": [w.grammar for w in g],
        "psi_windows": [w.grammar for w in psi],
        "shift_lattice": shift.to_json(),
    }, [path])
    _write_json(path, {
        "lhs": _clean(rep.lhs),
        "rhs": _clean(rep.rhs),
        "rel_err": _clean(rep.rel_err),
        "abs_err": rep.abs_err,
        "rhs_degenerate": rep.rhs_degenerate,
        "manifest": man,
    })
    return EXIT_OK


def cmd_window_compare(args) -> int:
    field = fileio.read_sfld(args.infile)
    g = parse_window_list(args.g_windows)
    gamma = parse_window_list(args.gamma_windows)
    h = parse_window_list(args.h_windows)
    frame = canonical_frame(len(g), field.lattice.dim)
    base_shift = make_lattice(
        _csv_floats(args.shift_origin),
        _csv_floats(args.shift_step),
        _csv_ints(args.shift_count),
    )
    rows = [["row", "shift_step", "rel_err", "order"]]
    reports = []
    prev = None
    for i in range(args.refine + 1):
        shift = make_lattice(base_shift.origin,
                             base_shift.step / 2**i,
                             base_shift.count * 2**i)
        rep = verify_window_change(field, g, gamma, h, frame, shift,
                                   threads=args.threads)
        order = "" if prev is None else f"{np.log2(prev / rep.rel_err):.3f}"
        rows.append([i, float(shift.step[0]), f"{rep.rel_err:.6e}", order])
        reports.append(rep)
        prev = rep.rel_err
    json_path = os.path.join(args.out_dir, args.out_prefix + ".json")
    csv_path = os.path.join(args.out_dir, args.out_prefix + ".csv")
    man = _manifest(args, "window-compare", {
        "in": args.infile,
        "g_windows": [w.grammar for w in g],
        "gamma_windows": [w.grammar for w in gamma],
        "h_windows": [w.grammar for w in h],
        "shift_lattice": base_shift.to_json(),
        "refine": args.refine,
    }, [json_path, csv_path])
    _write_json(json_path, {"rows": [r.to_json() for r in reports], "manifest": man})
    _write_csv(csv_path, rows)
    return EXIT_OK


def cmd_wavefront(args) -> int:
    field = fileio.read_sfld(args.infile)
    analysis = parse_window_list(args.windows)
    frame = canonical_frame(len(analysis), field.lattice.dim)
    bank = WindowBank.of(analysis)
    centers = _parse_points(args.centers)
    if args.dirs:
        directions = _parse_points(args.dirs)
    elif args.ndirs:
        directions = planar_directions(args.ndirs)
    else:
        directions = default_directions(args.half_angle)
    params = WavefrontParams(
        r=args.r, half_angle=args.half_angle, r_min=args.rmin, r_max=args.rmax,
        shells=args.shells, floor=args.floor, n_threshold=args.threshold,
        shift_step=args.shift_step, allow_noncompact=args.allow_noncompact,
        threads=args.threads,
    )
    wf = wavefront_map(field, frame, bank, centers, directions, params)
    csv_path = os.path.join(args.out_dir, args.out_prefix + ".csv")
    json_path = os.path.join(args.out_dir, args.out_prefix + ".json")
    man = _manifest(args, "wavefront", {
        "in": args.infile,
        "windows": [w.grammar for w in analysis],
        "centers": [[float(v) for v in c] for c in centers],
        "directions": [[float(v) for v in d] for d in directions],
        "r": args.r, "half_angle": args.half_angle,
        "r_min": args.rmin, "r_max": args.rmax, "shells": args.shells,
        "threshold": args.threshold, "floor": args.floor,
    }, [csv_path, json_path])
    _write_csv(csv_path, wf.csv_rows())
    body = wf.to_json()
    body["manifest"] = man
    _write_json(json_path, body)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dirstft", description=__doc__)
    p.add_argument("--out-dir", default=".", help="directory for outputs")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--deterministic", action="store_true", default=True,
                   help="ordered reductions (default)")
    p.add_argument("--fast-reduce", action="store_true", default=False,
                   help="allow completion-order reductions")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="render a signal recipe to SFLD")
    g.add_argument("--recipe", required=True)
    g.add_argument("--origin", required=True)
    g.add_argument("--step", required=True)
    g.add_argument("--count", required=True)
    g.add_argument("--dirs", default="")
    g.add_argument("--label", default="")
    g.add_argument("--out", required=True)
    g.set_defaults(fn=cmd_gen)

    def add_transform_flags(sp, synthesis=True):
        sp.add_argument("--in", dest="infile", required=True)
        sp.add_argument("--windows", required=True)
        if synthesis:
            sp.add_argument("--synthesis", default="")
        sp.add_argument("--dirs", default="")
        sp.add_argument("--shift-origin", required=True)
        sp.add_argument("--shift-step", required=True)
        sp.add_argument("--shift-count", required=True)

    d = sub.add_parser("dstft", help="forward transform to DSTC")
    add_transform_flags(d)
    d.add_argument("--out", required=True)
    d.set_defaults(fn=cmd_dstft)

    s = sub.add_parser("synth", help="reconstruct a signal from DSTC")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_synth)

    r = sub.add_parser("roundtrip", help="forward + inverse, report the error")
    add_transform_flags(r)
    r.add_argument("--out-prefix", default="roundtrip")
    r.set_defaults(fn=cmd_roundtrip)

    pv = sub.add_parser("parseval", help="Parseval identity diagnostic")
    pv.add_argument("--in1", required=True)
    pv.add_argument("--in2", required=True)
    pv.add_argument("--g-windows", required=True)
    pv.add_argument("--psi-windows", required=True)
    pv.add_argument("--shift-origin", required=True)
    pv.add_argument("--shift-step", required=True)
    pv.add_argument("--shift-count", required=True)
    pv.add_argument("--out", default="parseval.json")
    pv.set_defaults(fn=cmd_parseval)

    wc = sub.add_parser("window-compare", help="window-change identity check")
    wc.add_argument("--in", dest="infile", required=True)
    wc.add_argument("--g-windows", required=True)
    wc.add_argument("--gamma-windows", required=True)
    wc.add_argument("--h-windows", required=True)
    wc.add_argument("--shift-origin", required=True)
    wc.add_argument("--shift-step", required=True)
    wc.add_argument("--shift-count", required=True)
    wc.add_argument("--refine", type=int, default=2,
                    help="extra rows with halved shift step")
    wc.add_argument("--out-prefix", default="window-compare")
    wc.set_defaults(fn=cmd_window_compare)

    wf = sub.add_parser("wavefront", help="directional singularity map")
    wf.add_argument("--in", dest="infile", required=True)
    wf.add_argument("--windows", required=True)
    wf.add_argument("--centers", required=True)
    wf.add_argument("--dirs", default="")
    wf.add_argument("--ndirs", type=int, default=0)
    wf.add_argument("--r", type=float, default=0.5)
    wf.add_argument("--half-angle", type=float, default=0.6)
    wf.add_argument("--rmin", type=float, default=0.35)
    wf.add_argument("--rmax", type=float, default=4.0)
    wf.add_argument("--shells", type=int, default=8)
    wf.add_argument("--threshold", type=float, default=8.0)
    wf.add_argument("--floor", type=float, default=1e-12)
    wf.add_argument("--shift-step", type=float, default=None)
    wf.add_argument("--allow-noncompact", action="store_true")
    wf.add_argument("--out-prefix", default="wavefront")
    wf.set_defaults(fn=cmd_wavefront)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        os.makedirs(args.out_dir, exist_ok=True)
        return args.fn(args)
    except PairingDegenerate as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, UnknownKind, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DirstftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
