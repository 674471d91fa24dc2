"""SFLD v1 and DSTC v1 file formats.

Both formats are a JSON header naming a raw little-endian sidecar array
in row-major order (last axis fastest). Real fields may be stored as f64
and are promoted to complex on load; round-trips are bit-exact.
"""
from __future__ import annotations

import json
import os

import numpy as np

from .directions import DirectionFrame
from .lattice import FrequencyLattice, Lattice, SampledField
from .transform import CoefficientField
from .windows import WindowBank, parse_window

__all__ = ["write_sfld", "read_sfld", "write_dstc", "read_dstc"]

SFLD_VERSION = "SFLD v1"
DSTC_VERSION = "DSTC v1"


def _sidecar_name(header_path: str) -> str:
    base = os.path.basename(header_path)
    if base.endswith(".json"):
        base = base[: -len(".json")]
    return base + ".bin"


def _write_payload(header_path: str, header: dict, payload: np.ndarray) -> None:
    binname = header["data"]
    binpath = os.path.join(os.path.dirname(header_path) or ".", binname)
    with open(header_path, "w", encoding="utf-8") as fh:
        json.dump(header, fh, indent=2)
        fh.write("\n")
    payload.tofile(binpath)


def _read_payload(header_path: str, header: dict, dtype_map: dict) -> np.ndarray:
    binpath = os.path.join(os.path.dirname(header_path) or ".", header["data"])
    dtype = dtype_map[header["dtype"]]
    return np.fromfile(binpath, dtype=dtype)


def write_sfld(field: SampledField, path: str, dtype: str = "auto") -> None:
    """Write a sampled field; dtype "auto" stores purely real data as f64."""
    if dtype == "auto":
        dtype = "f64" if field.is_real() else "c128"
    if dtype not in ("f64", "c128"):
        raise ValueError(f"unsupported dtype {dtype!r}")
    lat = field.lattice
    header = {
        "version": SFLD_VERSION,
        "dim": lat.dim,
        "origin": [float(v) for v in lat.origin],
        "step": [float(v) for v in lat.step],
        "count": [int(v) for v in lat.count],
        "dtype": dtype,
        "label": field.label,
        "data": _sidecar_name(path),
    }
    payload = field.values if dtype == "c128" else field.values.real
    payload = np.ascontiguousarray(payload, dtype="<c16" if dtype == "c128" else "<f8")
    _write_payload(path, header, payload)


def read_sfld(path: str) -> SampledField:
    with open(path, "r", encoding="utf-8") as fh:
        header = json.load(fh)
    if header.get("version") != SFLD_VERSION:
        raise ValueError(f"not an {SFLD_VERSION} file: {path}")
    lat = Lattice.from_json(header)
    raw = _read_payload(path, header, {"f64": "<f8", "c128": "<c16"})
    if raw.size != lat.size:
        raise ValueError(f"payload holds {raw.size} values, lattice wants {lat.size}")
    values = raw.astype(np.complex128).reshape(tuple(lat.count))
    return SampledField(lat, values, label=header.get("label", ""))


def write_dstc(coeffs: CoefficientField, path: str) -> None:
    header = {
        "version": DSTC_VERSION,
        "frame": coeffs.frame.to_json(),
        "windows": {
            "analysis": [w.grammar for w in coeffs.bank.analysis],
            "synthesis": [w.grammar for w in coeffs.bank.synthesis],
        },
        "shift_lattice": coeffs.shift_lattice.to_json(),
        "freq_lattice": coeffs.freq_lattice.to_json(),
        "signal_lattice": coeffs.signal_lattice.to_json(),
        "provenance": coeffs.provenance,
        "dtype": "c128",
        "data": _sidecar_name(path),
    }
    payload = np.ascontiguousarray(coeffs.values, dtype="<c16")
    _write_payload(path, header, payload)


def read_dstc(path: str) -> CoefficientField:
    with open(path, "r", encoding="utf-8") as fh:
        header = json.load(fh)
    if header.get("version") != DSTC_VERSION:
        raise ValueError(f"not a {DSTC_VERSION} file: {path}")
    frame = DirectionFrame.from_json(header["frame"])
    analysis = [parse_window(tok) for tok in header["windows"]["analysis"]]
    synthesis = [parse_window(tok) for tok in header["windows"]["synthesis"]]
    shift = Lattice.from_json(header["shift_lattice"])
    freq = FrequencyLattice.from_json(header["freq_lattice"])
    signal = Lattice.from_json(header["signal_lattice"])
    raw = _read_payload(path, header, {"c128": "<c16"})
    values = raw.astype(np.complex128).reshape(shift.size, freq.size)
    return CoefficientField(
        frame=frame, bank=WindowBank.of(analysis, synthesis),
        shift_lattice=shift, freq_lattice=freq, signal_lattice=signal,
        values=values, provenance=header.get("provenance", "fast_fft"),
    )
