"""One-dimensional analysis/synthesis windows and ridge atoms.

Compactly supported kinds (hann, bump) evaluate to exactly 0 outside
their support radius; there is no underflow tail to leak past it. The
bump is exp(1 - a^2/(a^2 - s^2)) on (-a, a), normalized so bump(0) = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import PairingDegenerate
from .lattice import Lattice, SampledField, inner_product, make_lattice

__all__ = [
    "WindowSpec",
    "WindowBank",
    "gaussian_window",
    "hann_window",
    "bump_window",
    "custom_window",
    "eval_window",
    "pairing",
    "eval_ridge_atom",
    "parse_window",
    "parse_window_list",
    "default_quad_lattice",
    "PAIRING_FLOOR",
]

PAIRING_FLOOR = 1e-8

_KINDS = ("gaussian", "hann", "bump", "custom")


@dataclass(frozen=True, eq=False)
class WindowSpec:
    kind: str
    param: float = 0.0                      # sigma for gaussian, radius a otherwise
    samples: Optional[SampledField] = None  # custom only, 1-D
    grammar: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown window kind {self.kind!r}")
        if self.kind == "custom":
            if self.samples is None or self.samples.lattice.dim != 1:
                raise ValueError("custom window needs a 1-D sampled field")
        elif self.param <= 0:
            raise ValueError(f"{self.kind} window parameter must be positive")
        if not self.grammar:
            object.__setattr__(self, "grammar", self._default_grammar())

    def _default_grammar(self) -> str:
        if self.kind == "gaussian":
            return f"gaussian:sigma={self.param!r}"
        if self.kind == "custom":
            return "custom:<inline>"
        return f"{self.kind}:a={self.param!r}"

    @property
    def support_radius(self) -> float:
        """Radius outside which the window is exactly zero (inf for gaussian)."""
        if self.kind == "gaussian":
            return math.inf
        if self.kind == "custom":
            lat = self.samples.lattice
            return float(max(abs(lat.origin[0]), abs(lat.upper()[0])))
        return self.param

    @property
    def is_compact(self) -> bool:
        return math.isfinite(self.support_radius)

    @property
    def center_value(self) -> complex:
        return complex(eval_window(self, 0.0))


def gaussian_window(sigma: float) -> WindowSpec:
    return WindowSpec("gaussian", float(sigma))


def hann_window(a: float) -> WindowSpec:
    return WindowSpec("hann", float(a))


def bump_window(a: float) -> WindowSpec:
    return WindowSpec("bump", float(a))


def custom_window(samples: SampledField, grammar: str = "") -> WindowSpec:
    return WindowSpec("custom", 0.0, samples, grammar or "custom:<inline>")


def eval_window(w: WindowSpec, s):
    """Pointwise window value; array arguments are evaluated elementwise.

    Compact kinds return exact zeros outside [-a, a]; custom windows
    interpolate linearly between samples and vanish outside their lattice.
    """
    s = np.asarray(s, dtype=float)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    if w.kind == "gaussian":
        out = np.exp(-(s**2) / (2.0 * w.param**2))
    elif w.kind == "hann":
        out = np.zeros_like(s)
        m = np.abs(s) <= w.param
        out[m] = np.cos(np.pi * s[m] / (2.0 * w.param)) ** 2
    elif w.kind == "bump":
        out = np.zeros_like(s)
        a2 = w.param * w.param
        m = np.abs(s) < w.param
        out[m] = np.exp(1.0 - a2 / (a2 - s[m] ** 2))
    else:
        lat = w.samples.lattice
        xs = lat.axis_points(0)
        vals = w.samples.values
        re = np.interp(s, xs, vals.real, left=0.0, right=0.0)
        im = np.interp(s, xs, vals.imag, left=0.0, right=0.0)
        out = re + 1j * im if np.any(vals.imag) else re
        # np.interp keeps the edge value outside the range; zero it explicitly
        outside = (s < xs[0]) | (s > xs[-1])
        out = np.where(outside, 0.0, out)
    return out[0] if scalar else out


@dataclass(frozen=True, eq=False)
class WindowBank:
    """k analysis windows g_1..g_k paired with synthesis windows psi_1..psi_k."""

    analysis: tuple
    synthesis: tuple

    def __post_init__(self):
        if len(self.analysis) != len(self.synthesis):
            raise ValueError("analysis and synthesis window counts differ")
        if len(self.analysis) == 0:
            raise ValueError("window bank cannot be empty")

    @property
    def k(self) -> int:
        return len(self.analysis)

    @staticmethod
    def of(analysis: Sequence[WindowSpec], synthesis: Optional[Sequence[WindowSpec]] = None) -> "WindowBank":
        analysis = tuple(analysis)
        synthesis = tuple(synthesis) if synthesis is not None else analysis
        return WindowBank(analysis, synthesis)


def default_quad_lattice(specs: Sequence[WindowSpec], step: float = 1.0 / 256) -> Lattice:
    """1-D quadrature lattice covering the joint support (8 sigma for gaussians).

    When custom windows are present the lattice aligns with the finest one's
    sample nodes (same step, origin shifted by whole steps), so sampled
    windows are quadratured at their own nodes rather than interpolated.
    """
    radius = 0.0
    anchor = None
    for w in specs:
        r = w.support_radius if w.is_compact else 8.0 * w.param
        radius = max(radius, r)
        if w.kind == "custom":
            lat = w.samples.lattice
            if anchor is None or lat.step[0] < anchor.step[0]:
                anchor = lat
    if anchor is not None:
        step = float(anchor.step[0])
        o = float(anchor.origin[0])
        lo = o - np.ceil((o + radius) / step) * step
        n = int(np.ceil((radius - lo) / step)) + 1
        return make_lattice([lo], [step], [max(n, 2)])
    n = int(np.ceil(2 * radius / step))
    return make_lattice([-radius], [step], [max(n, 2)])


def pairing(bank: WindowBank, quad_lattice: Optional[Lattice] = None,
            floor: float = PAIRING_FLOOR) -> complex:
    """Product of (g_i, psi_i) inner products under library quadrature.

    Raises PairingDegenerate when the magnitude falls below `floor`;
    inversion refuses to divide by such pairings.
    """
    if quad_lattice is None:
        quad_lattice = default_quad_lattice(tuple(bank.analysis) + tuple(bank.synthesis))
    if quad_lattice.dim != 1:
        raise ValueError("pairing quadrature lattice must be 1-D")
    xs = quad_lattice.axis_points(0)
    total = 1.0 + 0.0j
    for g, psi in zip(bank.analysis, bank.synthesis):
        gf = SampledField(quad_lattice, np.asarray(eval_window(g, xs), complex))
        pf = SampledField(quad_lattice, np.asarray(eval_window(psi, xs), complex))
        total *= inner_product(gf, pf)
    if abs(total) <= floor:
        raise PairingDegenerate(
            f"window pairing {total:.3e} below floor {floor:.1e}"
        )
    return total


def eval_ridge_atom(windows: Sequence[WindowSpec], frame, x, xi, t) -> complex:
    """Ridge atom value prod_i w_i(u_i . t - x_i) * exp(2 pi i t . xi)."""
    t = np.asarray(t, float)
    xi = np.asarray(xi, float)
    x = np.atleast_1d(np.asarray(x, float))
    if len(windows) != frame.k:
        raise ValueError("window count must equal frame direction count")
    val = complex(np.exp(2j * np.pi * float(t @ xi)))
    for i, w in enumerate(windows):
        val *= complex(eval_window(w, float(frame.u[i] @ t) - x[i]))
    return val


def parse_window(token: str) -> WindowSpec:
    """Parse one grammar token: gaussian:sigma=1.0, hann:a=2.0, bump:a=1.5,
    custom:path.json. The Greek spelling gaussian:σ=1.0 is accepted."""
    token = token.strip()
    kind, sep, rest = token.partition(":")
    kind = kind.strip().lower()
    if not sep or kind not in _KINDS:
        raise ValueError(f"bad window token {token!r}")
    if kind == "custom":
        from .fileio import read_sfld  # local import; fileio depends on lattice only

        fld = read_sfld(rest.strip())
        return custom_window(fld, grammar=f"custom:{rest.strip()}")
    key, sep2, val = rest.partition("=")
    key = key.strip().lower()
    aliases = {"gaussian": ("sigma", "σ", "s"), "hann": ("a",), "bump": ("a",)}
    if not sep2 or key not in aliases[kind]:
        raise ValueError(f"bad window token {token!r}")
    try:
        p = float(val)
    except ValueError:
        raise ValueError(f"bad window token {token!r}") from None
    return WindowSpec(kind, p, grammar=token)


def parse_window_list(text: str) -> list[WindowSpec]:
    """Semicolon-separated window tokens."""
    return [parse_window(tok) for tok in text.split(";") if tok.strip()]
