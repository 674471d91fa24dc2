"""Directional regularity analysis over frequency cones.

Coefficient magnitudes are scanned over ball x cone queries, reduced to
per-shell suprema, and fitted with log sup ~ intercept + slope * log
sqrt(1 + r^2); the fitted exponent -slope plays the role of the polynomial
decay order. Discrete data cannot certify decay of every order, so the
classifier certifies decay up to a configurable threshold order and
reports the fitted exponent; that threshold is the central approximation
of the whole detector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .directions import DirectionFrame
from .errors import EmptyCone
from .lattice import Lattice, SampledField, make_lattice
from .transform import CoefficientField, dstft_forward
from .windows import WindowBank

__all__ = [
    "ConeQuery",
    "DecayReport",
    "WaveFrontMap",
    "MapCell",
    "WavefrontParams",
    "RobustnessRow",
    "cone_supremum",
    "fit_decay",
    "classify",
    "analyze_query",
    "wavefront_map",
    "window_robustness",
    "REGULAR",
    "SINGULAR",
    "BELOW_FLOOR",
    "INCONCLUSIVE",
]

REGULAR = "Regular"
SINGULAR = "Singular"
BELOW_FLOOR = "BelowFloor"
INCONCLUSIVE = "Inconclusive"

DEFAULT_FLOOR = 1e-12
DEFAULT_N_THRESHOLD = 8.0
MIN_SHELL_BINS = 8
MIN_FIT_SHELLS = 4


@dataclass(frozen=True)
class ConeQuery:
    """Ball of radius r around x0 times a frequency cone around xi0."""

    x0: np.ndarray
    r: float
    xi0: np.ndarray
    half_angle: float
    r_min: float
    r_max: float
    shells: int

    def __post_init__(self):
        x0 = np.atleast_1d(np.asarray(self.x0, float))
        xi0 = np.atleast_1d(np.asarray(self.xi0, float))
        nrm = np.linalg.norm(xi0)
        if nrm == 0:
            raise ValueError("cone axis must be nonzero")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "xi0", xi0 / nrm)
        if not (0.0 < self.half_angle < np.pi / 2):
            raise ValueError("half_angle must lie in (0, pi/2)")
        if not (0.0 < self.r_min < self.r_max):
            raise ValueError("need 0 < r_min < r_max")
        if self.shells < 4:
            raise ValueError("need at least 4 shells")
        if self.r <= 0:
            raise ValueError("ball radius must be positive")

    def shell_edges(self) -> np.ndarray:
        return np.geomspace(self.r_min, self.r_max, self.shells + 1)

    def shrunken(self) -> "ConeQuery":
        """Half ball, half cone: the window-robustness protocol for alternates."""
        return replace(self, r=self.r / 2.0, half_angle=self.half_angle / 2.0)


@dataclass
class DecayReport:
    query: ConeQuery
    shell_radii: np.ndarray
    shell_sup: np.ndarray          # NaN marks shells without enough cone bins
    shell_bins: np.ndarray
    slope: float
    intercept: float
    quality: float
    n_above_floor: int
    verdict: str = INCONCLUSIVE
    notes: tuple = ()

    @property
    def n_hat(self) -> float:
        return -self.slope

    @property
    def is_regular(self) -> bool:
        return self.verdict in (REGULAR, BELOW_FLOOR)

    def to_json(self) -> dict:
        def clean(v):
            return None if (isinstance(v, float) and not math.isfinite(v)) else v

        return {
            "center": [float(v) for v in self.query.x0],
            "direction": [float(v) for v in self.query.xi0],
            "r": self.query.r,
            "half_angle": self.query.half_angle,
            "shell_radii": [float(v) for v in self.shell_radii],
            "shell_sup": [clean(float(v)) for v in self.shell_sup],
            "shell_bins": [int(v) for v in self.shell_bins],
            "slope": clean(self.slope),
            "intercept": clean(self.intercept),
            "n_hat": clean(self.n_hat),
            "r_squared": clean(self.quality),
            "n_above_floor": self.n_above_floor,
            "verdict": self.verdict,
            "notes": list(self.notes),
        }


class _ConeScanner:
    """Shared freq-lattice geometry for scanning many queries of one field."""

    def __init__(self, coeffs: CoefficientField, edges: np.ndarray,
                 min_shell_bins: int = MIN_SHELL_BINS):
        freq = coeffs.freq_lattice
        nyq = float(np.min(freq.nyquist))
        if edges[-1] > nyq / 2 + 1e-12:
            raise ValueError(
                f"r_max {edges[-1]:.4g} exceeds the Nyquist/2 guard {nyq / 2:.4g}"
            )
        if edges[0] < 2.0 * float(np.max(freq.step)) - 1e-12:
            raise ValueError(
                f"r_min {edges[0]:.4g} below 2*max frequency step "
                f"{2 * float(np.max(freq.step)):.4g}"
            )
        self.coeffs = coeffs
        self.edges = edges
        self.min_shell_bins = min_shell_bins
        grids = freq.grids()
        rho2 = np.zeros(tuple(freq.count))
        for g in grids:
            rho2 = rho2 + g**2
        self.rho = np.sqrt(rho2).ravel()
        self.axes = np.stack([np.broadcast_to(g, tuple(freq.count)).ravel()
                              for g in grids])          # (n, nbins)
        self.shell_idx = np.searchsorted(edges, self.rho, side="right") - 1
        self.in_band = (self.rho >= edges[0]) & (self.rho < edges[-1])
        self._dir_cache: dict = {}

    def direction_bins(self, xi0: np.ndarray, half_angle: float):
        """Bin indices and shell ids inside the cone, plus per-shell counts."""
        key = (tuple(np.round(xi0, 15)), round(half_angle, 15))
        hit = self._dir_cache.get(key)
        if hit is not None:
            return hit
        with np.errstate(invalid="ignore", divide="ignore"):
            cosang = (xi0 @ self.axes) / self.rho
        mask = self.in_band & (cosang >= np.cos(half_angle))
        idx = np.nonzero(mask)[0]
        sid = self.shell_idx[idx]
        counts = np.bincount(sid, minlength=len(self.edges) - 1)
        out = (idx, sid, counts)
        self._dir_cache[key] = out
        return out

    def ball_rows(self, x0: np.ndarray, r: float) -> np.ndarray:
        pts = self.coeffs.shift_points()
        keep = np.all(np.abs(pts - x0) <= r + 1e-12, axis=1)
        return np.nonzero(keep)[0]

    def shell_sups(self, row_max: np.ndarray, xi0: np.ndarray, half_angle: float):
        idx, sid, counts = self.direction_bins(xi0, half_angle)
        j = len(self.edges) - 1
        sups = np.zeros(j)
        np.maximum.at(sups, sid, row_max[idx])
        sups = np.where(counts >= self.min_shell_bins, sups, np.nan)
        return sups, counts


def cone_supremum(coeffs: CoefficientField, query: ConeQuery,
                  min_shell_bins: int = MIN_SHELL_BINS):
    """Per-shell suprema of |coefficients| over ball x cone.

    shell_sup[j] is the max over shift points within the (closed lattice
    intersection of the) ball and frequency bins with |xi| in
    [edges[j], edges[j+1]) inside the cone; shells with fewer than
    `min_shell_bins` qualifying bins are NaN (recorded, skipped).
    Raises EmptyCone when the ball misses the shift lattice entirely.
    """
    scanner = _ConeScanner(coeffs, query.shell_edges(), min_shell_bins)
    rows = scanner.ball_rows(query.x0, query.r)
    if len(rows) == 0:
        raise EmptyCone("ball does not intersect the shift lattice")
    row_max = np.abs(coeffs.values[rows]).max(axis=0)
    sups, _ = scanner.shell_sups(row_max, query.xi0, query.half_angle)
    return query.shell_edges()[:-1], sups


def fit_decay(shell_radii, shell_sup, floor: float = DEFAULT_FLOOR):
    """Least-squares fit of log sup against log sqrt(1 + r^2).

    Only finite suprema above `floor` enter the fit. Returns
    (slope, intercept, quality): slope estimates minus the decay order,
    quality is the fit R^2. With no shells above the floor the slope is
    -inf (decay beyond measurement); with fewer than MIN_FIT_SHELLS the
    fit is undefined (NaN slope).
    """
    r = np.asarray(shell_radii, float)
    s = np.asarray(shell_sup, float)
    valid = np.isfinite(s)
    above = valid & (s > floor)
    if not np.any(above):
        return -math.inf, -math.inf, 1.0
    if int(above.sum()) < MIN_FIT_SHELLS:
        return math.nan, math.nan, 0.0
    x = np.log(np.sqrt(1.0 + r[above] ** 2))
    y = np.log(s[above])
    design = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    quality = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), float(coef[1]), quality


def classify(report: DecayReport, n_threshold: float = DEFAULT_N_THRESHOLD,
             floor: float = DEFAULT_FLOOR) -> str:
    """Verdict from the fitted exponent: Regular iff n_hat >= threshold or
    everything sits below the floor; Singular iff n_hat < threshold with
    R^2 >= 0.9; otherwise Inconclusive."""
    s = report.shell_sup
    valid = np.isfinite(s)
    if not np.any(valid):
        return INCONCLUSIVE
    above = valid & (s > floor)
    if not np.any(above):
        return BELOW_FLOOR
    if int(above.sum()) < MIN_FIT_SHELLS:
        return INCONCLUSIVE
    if report.n_hat >= n_threshold:
        return REGULAR
    if report.quality >= 0.9:
        return SINGULAR
    return INCONCLUSIVE


def _report_from_sups(query, radii, sups, counts, floor, n_threshold, notes=()):
    slope, intercept, quality = fit_decay(radii, sups, floor)
    finite = np.isfinite(sups)
    n_above = int(np.sum(finite & (sups > floor)))
    rep = DecayReport(query=query, shell_radii=radii, shell_sup=sups,
                      shell_bins=counts, slope=slope, intercept=intercept,
                      quality=quality, n_above_floor=n_above, notes=tuple(notes))
    rep.verdict = classify(rep, n_threshold=n_threshold, floor=floor)
    return rep


def analyze_query(coeffs: CoefficientField, query: ConeQuery,
                  floor: float = DEFAULT_FLOOR,
                  n_threshold: float = DEFAULT_N_THRESHOLD,
                  min_shell_bins: int = MIN_SHELL_BINS) -> DecayReport:
    """cone_supremum + fit_decay + classify for a single query."""
    edges = query.shell_edges()
    scanner = _ConeScanner(coeffs, edges, min_shell_bins)
    rows = scanner.ball_rows(query.x0, query.r)
    radii = edges[:-1]
    if len(rows) == 0:
        nan = np.full(query.shells, np.nan)
        rep = DecayReport(query=query, shell_radii=radii, shell_sup=nan,
                          shell_bins=np.zeros(query.shells, int),
                          slope=math.nan, intercept=math.nan, quality=0.0,
                          n_above_floor=0, notes=("empty ball",))
        rep.verdict = INCONCLUSIVE
        return rep
    row_max = np.abs(coeffs.values[rows]).max(axis=0)
    sups, counts = scanner.shell_sups(row_max, query.xi0, query.half_angle)
    notes = []
    if np.any(~np.isfinite(sups)):
        notes.append("shells below bin minimum skipped")
    return _report_from_sups(query, radii, sups, counts, floor, n_threshold, notes)


@dataclass(frozen=True)
class WavefrontParams:
    r: float = 0.5
    half_angle: float = 0.6
    r_min: float = 0.35
    r_max: float = 4.0
    shells: int = 8
    floor: float = DEFAULT_FLOOR
    n_threshold: float = DEFAULT_N_THRESHOLD
    shift_step: Optional[float] = None     # default r / 2
    min_shell_bins: int = MIN_SHELL_BINS
    allow_noncompact: bool = False
    exploit_symmetry: bool = True
    threads: int = 1


@dataclass
class MapCell:
    center: np.ndarray
    direction: np.ndarray
    report: DecayReport

    @property
    def verdict(self) -> str:
        return self.report.verdict


@dataclass
class WaveFrontMap:
    cells: list
    centers: np.ndarray
    directions: np.ndarray
    params: WavefrontParams
    bank_grammar: list
    noncompact: bool = False

    def cell(self, ci: int, di: int) -> MapCell:
        return self.cells[ci * len(self.directions) + di]

    def verdicts(self) -> np.ndarray:
        out = np.empty((len(self.centers), len(self.directions)), dtype=object)
        for c in range(len(self.centers)):
            for d in range(len(self.directions)):
                out[c, d] = self.cell(c, d).verdict
        return out

    def singular_mask(self) -> np.ndarray:
        return self.verdicts() == SINGULAR

    def regular_mask(self) -> np.ndarray:
        v = self.verdicts()
        return (v == REGULAR) | (v == BELOW_FLOOR)

    def to_json(self) -> dict:
        return {
            "centers": [[float(v) for v in c] for c in self.centers],
            "directions": [[float(v) for v in d] for d in self.directions],
            "n_threshold": self.params.n_threshold,
            "floor": self.params.floor,
            "half_angle": self.params.half_angle,
            "r": self.params.r,
            "windows": self.bank_grammar,
            "outside_compact_hypothesis": self.noncompact,
            "cells": [c.report.to_json() for c in self.cells],
        }

    def csv_rows(self) -> list[list]:
        rows = [["center", "direction", "n_hat", "r_squared", "verdict"]]
        for c in self.cells:
            rep = c.report
            rows.append([
                " ".join(f"{v:.6g}" for v in c.center),
                " ".join(f"{v:.6g}" for v in c.direction),
                f"{rep.n_hat:.6g}" if math.isfinite(rep.n_hat) else "",
                f"{rep.quality:.6g}" if math.isfinite(rep.quality) else "",
                rep.verdict,
            ])
        return rows


def default_directions(half_angle: float) -> np.ndarray:
    """Uniform planar grid with angular spacing <= half_angle (n = 2)."""
    m = max(4, int(np.ceil(2 * np.pi / half_angle)))
    return planar_directions(m)


def planar_directions(m: int) -> np.ndarray:
    """m unit vectors at uniform angles, trig residue snapped to exact zeros."""
    ang = 2 * np.pi * np.arange(m) / m
    d = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    d[np.abs(d) < 1e-15] = 0.0
    d[np.abs(d - 1) < 1e-15] = 1.0
    d[np.abs(d + 1) < 1e-15] = -1.0
    return d


def _build_shift_lattice(centers: np.ndarray, r: float, step: float) -> Lattice:
    lo = np.floor((centers.min(axis=0) - r) / step) * step
    hi = centers.max(axis=0) + r
    count = np.maximum(np.ceil((hi - lo) / step - 1e-9).astype(int) + 1, 2)
    return make_lattice(lo, np.full(len(lo), step), count)


def _validate_bank(bank: WindowBank, allow_noncompact: bool) -> bool:
    noncompact = False
    for w in bank.analysis:
        if abs(w.center_value) == 0.0:
            raise ValueError("analysis windows must not vanish at 0")
        if not w.is_compact:
            noncompact = True
    if noncompact and not allow_noncompact:
        raise ValueError(
            "non-compact analysis windows are outside the detector's "
            "hypothesis; pass allow_noncompact=True to override"
        )
    return noncompact


def wavefront_map(f: SampledField, frame: DirectionFrame, bank: WindowBank,
                  ball_centers, directions=None,
                  params: WavefrontParams = WavefrontParams()) -> WaveFrontMap:
    """Decay verdicts over a product grid of ball centers and cone axes.

    Coefficients are computed once on a shift lattice covering all balls;
    each (center, direction) cell then gets a cone scan, decay fit and
    verdict. For real signals with real windows, antipodal directions
    share |coefficients| and their reports are mirrored.
    """
    if frame.k != bank.k:
        raise ValueError("bank k must match frame k")
    if not frame.is_canonical:
        raise ValueError("wavefront analysis operates on the canonical axis frame")
    noncompact = _validate_bank(bank, params.allow_noncompact)

    centers = np.atleast_2d(np.asarray(ball_centers, float))
    if directions is None:
        if frame.n != 2:
            raise ValueError("automatic direction grids are planar; pass directions")
        directions = default_directions(params.half_angle)
    directions = np.atleast_2d(np.asarray(directions, float))
    directions = directions / np.linalg.norm(directions, axis=1)[:, None]

    step = params.shift_step if params.shift_step is not None else params.r / 2
    shift_lat = _build_shift_lattice(centers, params.r, step)
    coeffs = dstft_forward(f, frame, bank, shift_lat, threads=params.threads)

    edges = np.geomspace(params.r_min, params.r_max, params.shells + 1)
    scanner = _ConeScanner(coeffs, edges, params.min_shell_bins)

    mirror_ok = params.exploit_symmetry and f.is_real() and all(
        w.kind != "custom" or w.samples.is_real() for w in bank.analysis
    )

    cells: list = []
    for center in centers:
        rows = scanner.ball_rows(center, params.r)
        row_max = None
        if len(rows):
            row_max = np.abs(coeffs.values[rows]).max(axis=0)
        seen: dict = {}
        for direction in directions:
            query = ConeQuery(x0=center, r=params.r, xi0=direction,
                              half_angle=params.half_angle,
                              r_min=params.r_min, r_max=params.r_max,
                              shells=params.shells)
            if row_max is None:
                nan = np.full(params.shells, np.nan)
                rep = DecayReport(query=query, shell_radii=edges[:-1],
                                  shell_sup=nan,
                                  shell_bins=np.zeros(params.shells, int),
                                  slope=math.nan, intercept=math.nan,
                                  quality=0.0, n_above_floor=0,
                                  notes=("empty ball",))
                rep.verdict = INCONCLUSIVE
            else:
                antipode = seen.get(tuple(np.round(-direction, 12))) if mirror_ok else None
                if antipode is not None:
                    rep = replace(antipode, query=query)
                else:
                    sups, counts = scanner.shell_sups(row_max, query.xi0,
                                                      query.half_angle)
                    notes = ["shells below bin minimum skipped"] if np.any(
                        ~np.isfinite(sups)) else []
                    rep = _report_from_sups(query, edges[:-1], sups, counts,
                                            params.floor, params.n_threshold,
                                            notes)
                    if mirror_ok:
                        seen[tuple(np.round(direction, 12))] = rep
            cells.append(MapCell(center=center, direction=direction, report=rep))
    grammar = [w.grammar for w in bank.analysis]
    return WaveFrontMap(cells=cells, centers=centers, directions=directions,
                        params=params, bank_grammar=grammar, noncompact=noncompact)


@dataclass
class RobustnessRow:
    bank_grammar: list
    r: float
    half_angle: float
    report: DecayReport

    @property
    def verdict(self) -> str:
        return self.report.verdict


def window_robustness(f: SampledField, frame: DirectionFrame,
                      banks: Sequence[WindowBank], query: ConeQuery,
                      floor: float = DEFAULT_FLOOR,
                      n_threshold: float = DEFAULT_N_THRESHOLD,
                      shift_step: Optional[float] = None,
                      min_shell_bins: int = MIN_SHELL_BINS,
                      threads: int = 1) -> list[RobustnessRow]:
    """Per-bank decay reports for one query; banks[0] is the reference.

    Alternates run on the shrunken ball/cone (r/2, half_angle/2) and must
    be compactly supported with radius at most the reference radius.
    """
    if not banks:
        raise ValueError("need at least one window bank")
    ref_radius = max(w.support_radius for w in banks[0].analysis)
    for bank in banks:
        _validate_bank(bank, allow_noncompact=False)
        if max(w.support_radius for w in bank.analysis) > ref_radius + 1e-12:
            raise ValueError(
                "alternate bank support radius exceeds the reference radius"
            )
    step = shift_step if shift_step is not None else query.r / 2
    centers = np.atleast_2d(query.x0)
    rows = []
    for i, bank in enumerate(banks):
        q = query if i == 0 else query.shrunken()
        shift_lat = _build_shift_lattice(centers, q.r, step)
        coeffs = dstft_forward(f, frame, bank, shift_lat, threads=threads)
        rep = analyze_query(coeffs, q, floor=floor, n_threshold=n_threshold,
                            min_shell_bins=min_shell_bins)
        rows.append(RobustnessRow(bank_grammar=[w.grammar for w in bank.analysis],
                                  r=q.r, half_angle=q.half_angle, report=rep))
    return rows
