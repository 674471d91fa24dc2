"""Synthetic signals with known singularity structure.

Each recipe renders deterministically from its JSON form and declares its
own singular hyperplanes, so detector runs can be scored against an
analytically known answer. Convention: sign(0) = 0 for jump ridges, fixed
for bit-reproducibility.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import UnknownKind
from .lattice import Lattice, SampledField

__all__ = ["SignalRecipe", "render", "ground_truth", "recipe_from_json"]

_CATALOGUE = ("gaussian", "jump_ridge", "plane_wave", "ridge_spike", "sum")


@dataclass(frozen=True)
class SignalRecipe:
    """Declarative signal description (SIG v1).

    kinds:
      gaussian(center, sigma)            peak-normalized envelope
      jump_ridge(u, c, sigma)            sign(u.t - c) * gaussian envelope
      plane_wave(xi0, sigma)             exp(2 pi i t.xi0) * gaussian envelope
      ridge_spike(u, c, width, sigma)    normalized gaussian of `width` in the
                                         u.t coordinate (width None -> 2*step
                                         at render time) * gaussian envelope
      sum(terms, weights)
    """

    kind: str
    center: Optional[tuple] = None
    sigma: float = 1.0
    u: Optional[tuple] = None
    c: float = 0.0
    xi0: Optional[tuple] = None
    width: Optional[float] = None
    terms: tuple = ()
    weights: tuple = ()
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in _CATALOGUE:
            raise UnknownKind(f"unknown recipe kind {self.kind!r}")
        if self.kind == "sum" and len(self.terms) != len(self.weights):
            raise ValueError("sum recipe needs one weight per term")
        if self.kind in ("jump_ridge", "ridge_spike"):
            if self.u is None:
                raise ValueError(f"{self.kind} needs a direction u")
            u = np.asarray(self.u, float)
            object.__setattr__(self, "u", tuple(u / np.linalg.norm(u)))

    def to_json(self) -> dict:
        obj: dict = {"version": "SIG v1", "kind": self.kind}
        if self.kind == "gaussian":
            obj.update(center=list(self.center or ()), sigma=self.sigma)
        elif self.kind == "jump_ridge":
            obj.update(u=list(self.u), c=self.c, sigma=self.sigma)
        elif self.kind == "plane_wave":
            obj.update(xi0=list(self.xi0), sigma=self.sigma)
        elif self.kind == "ridge_spike":
            obj.update(u=list(self.u), c=self.c, width=self.width, sigma=self.sigma)
        else:
            obj.update(terms=[t.to_json() for t in self.terms],
                       weights=list(self.weights))
        if self.label:
            obj["label"] = self.label
        return obj


def recipe_from_json(obj: dict) -> SignalRecipe:
    kind = obj.get("kind")
    if kind not in _CATALOGUE:
        raise UnknownKind(f"unknown recipe kind {kind!r}")
    label = obj.get("label", "")
    if kind == "gaussian":
        return SignalRecipe("gaussian", center=tuple(obj.get("center") or ()),
                            sigma=float(obj.get("sigma", 1.0)), label=label)
    if kind == "jump_ridge":
        return SignalRecipe("jump_ridge", u=tuple(obj["u"]), c=float(obj.get("c", 0.0)),
                            sigma=float(obj.get("sigma", 1.0)), label=label)
    if kind == "plane_wave":
        return SignalRecipe("plane_wave", xi0=tuple(obj["xi0"]),
                            sigma=float(obj.get("sigma", 1.0)), label=label)
    if kind == "ridge_spike":
        w = obj.get("width")
        return SignalRecipe("ridge_spike", u=tuple(obj["u"]), c=float(obj.get("c", 0.0)),
                            width=None if w is None else float(w),
                            sigma=float(obj.get("sigma", 1.0)), label=label)
    terms = tuple(recipe_from_json(t) for t in obj["terms"])
    return SignalRecipe("sum", terms=terms, weights=tuple(float(w) for w in obj["weights"]),
                        label=label)


def _envelope(pts: np.ndarray, center, sigma: float) -> np.ndarray:
    if center is None or len(center) == 0:
        d2 = np.sum(pts**2, axis=-1)
    else:
        d2 = np.sum((pts - np.asarray(center, float)) ** 2, axis=-1)
    return np.exp(-d2 / (2.0 * sigma**2))


def render(recipe: SignalRecipe, lat: Lattice) -> SampledField:
    """Evaluate the recipe pointwise on `lat`. Deterministic."""
    pts = lat.points()
    vals = _render_values(recipe, pts, lat)
    return SampledField(lat, vals, label=recipe.label or recipe.kind)


def _render_values(recipe: SignalRecipe, pts: np.ndarray, lat: Lattice) -> np.ndarray:
    if recipe.kind == "gaussian":
        return _envelope(pts, recipe.center, recipe.sigma).astype(complex)
    if recipe.kind == "jump_ridge":
        proj = pts @ np.asarray(recipe.u, float)
        return (np.sign(proj - recipe.c) * _envelope(pts, None, recipe.sigma)).astype(complex)
    if recipe.kind == "plane_wave":
        phase = pts @ np.asarray(recipe.xi0, float)
        return _envelope(pts, None, recipe.sigma) * np.exp(2j * np.pi * phase)
    if recipe.kind == "ridge_spike":
        w = recipe.width if recipe.width is not None else 2.0 * float(np.min(lat.step))
        proj = pts @ np.asarray(recipe.u, float)
        spike = np.exp(-((proj - recipe.c) ** 2) / (2.0 * w**2)) / (w * np.sqrt(2 * np.pi))
        return (spike * _envelope(pts, None, recipe.sigma)).astype(complex)
    out = np.zeros(pts.shape[:-1], dtype=complex)
    for term, wt in zip(recipe.terms, recipe.weights):
        out += wt * _render_values(term, pts, lat)
    return out


def singular_hyperplanes(recipe: SignalRecipe) -> list[tuple[np.ndarray, float]]:
    """(unit normal, offset) pairs with singular set {t : u.t = c}."""
    if recipe.kind in ("gaussian", "plane_wave"):
        return []
    if recipe.kind in ("jump_ridge", "ridge_spike"):
        return [(np.asarray(recipe.u, float), recipe.c)]
    if recipe.kind == "sum":
        out = []
        for term in recipe.terms:
            out.extend(singular_hyperplanes(term))
        return out
    raise UnknownKind(f"no ground truth for recipe kind {recipe.kind!r}")


def ground_truth(recipe: SignalRecipe, centers, directions,
                 r: float, window_radius: float, half_angle: float,
                 frame_k: int = 1) -> np.ndarray:
    """Expected verdict skeleton over centers x directions.

    A cell is singular iff some declared hyperplane passes within
    r + window_radius of the cell center and the sampled direction lies
    within half_angle of a hyperplane normal (either sign). The distance
    rule mirrors the localization radius a + r of compactly windowed
    coefficients. Returns a boolean array (len(centers), len(directions)),
    True = singular.

    Hyperplane normals must align with analyzed axes (the detector works
    on the axis frame); others raise UnknownKind.
    """
    centers = np.atleast_2d(np.asarray(centers, float))
    directions = np.atleast_2d(np.asarray(directions, float))
    directions = directions / np.linalg.norm(directions, axis=1)[:, None]
    out = np.zeros((len(centers), len(directions)), dtype=bool)
    for normal, offset in singular_hyperplanes(recipe):
        axes = np.nonzero(np.abs(normal) > 1e-12)[0]
        if len(axes) != 1 or axes[0] >= frame_k:
            raise UnknownKind(
                "ground truth requires hyperplane normals aligned with an "
                "analyzed axis direction"
            )
        a = axes[0]
        sgn = np.sign(normal[a])
        near = np.abs(centers[:, a] - sgn * offset) < (r + window_radius)
        cosang = directions @ normal
        aligned = np.abs(cosang) >= np.cos(half_angle)
        out |= near[:, None] & aligned[None, :]
    return out
