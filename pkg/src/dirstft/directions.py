"""Direction frames and the coordinate change reducing u-directional
transforms to axis-directional ones.

The change-of-variables matrix B has rows u_1..u_k followed by identity
rows e_{k+1}..e_n. That completion can be singular even for independent
directions (k=1, u=e_2, n=2), in which case the remaining rows are an
orthonormal basis of the orthogonal complement of span(u) instead; the
frame records which completion was used.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import map_coordinates

from .errors import DependentDirections, SingularB
from .lattice import Lattice, SampledField

__all__ = [
    "DirectionFrame",
    "build_frame",
    "canonical_frame",
    "pushforward",
    "pullback_frequency",
    "parse_directions",
]

_RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DirectionFrame:
    n: int
    k: int
    u: np.ndarray          # (k, n), unit rows
    B: np.ndarray          # (n, n)
    C: np.ndarray          # (n, n), B^{-1}
    detC: float
    completion: str        # "identity" or "orthocomplement"

    @property
    def is_canonical(self) -> bool:
        """True when u_i = e_i for all i (the axis frame)."""
        expected = np.eye(self.n)[: self.k]
        return np.array_equal(self.u, expected)

    def axis_of(self, i: int):
        """Axis index a and sign when u_i = ±e_a exactly, else None."""
        row = self.u[i]
        nz = np.nonzero(row)[0]
        if len(nz) == 1 and abs(row[nz[0]]) == 1.0:
            return int(nz[0]), float(row[nz[0]])
        return None

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "u": [[float(x) for x in row] for row in self.u],
            "completion": self.completion,
        }

    @staticmethod
    def from_json(obj: dict) -> "DirectionFrame":
        return build_frame(obj["u"], obj["n"])


def build_frame(u, n: int) -> DirectionFrame:
    """Frame from k direction vectors in R^n; vectors are normalized here.

    Raises DependentDirections when the (row-normalized) direction matrix
    has rank below k.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    k = u.shape[0]
    if u.shape[1] != n:
        raise ValueError(f"direction vectors must have length {n}")
    if not (1 <= k <= n):
        raise ValueError("need 1 <= k <= n directions")
    norms = np.linalg.norm(u, axis=1)
    if np.any(norms == 0):
        raise ValueError("direction vectors must be nonzero")
    u = u / norms[:, None]

    svals = np.linalg.svd(u, compute_uv=False)
    if svals[-1] <= _RANK_TOL:
        raise DependentDirections(
            f"smallest singular value {svals[-1]:.2e} <= {_RANK_TOL:.0e}"
        )

    B = np.eye(n)
    B[:k] = u
    completion = "identity"
    if abs(np.linalg.det(B)) <= _RANK_TOL:
        # complete with an orthonormal basis of span(u)^perp
        _, _, vt = np.linalg.svd(u)
        B = np.vstack([u, vt[k:]])
        completion = "orthocomplement"
        if abs(np.linalg.det(B)) <= _RANK_TOL:
            raise SingularB("could not complete directions to an invertible matrix")
    C = np.linalg.inv(B)
    return DirectionFrame(n=n, k=k, u=u, B=B, C=C,
                          detC=float(1.0 / np.linalg.det(B)),
                          completion=completion)


def canonical_frame(k: int, n: int) -> DirectionFrame:
    """The axis frame e^k = (e_1, ..., e_k) in R^n."""
    return build_frame(np.eye(n)[:k], n)


def pullback_frequency(frame: DirectionFrame, xi) -> np.ndarray:
    """eta = C^T xi, the frequency matching the coordinate change t = C s."""
    return frame.C.T @ np.asarray(xi, dtype=float)


def pushforward(field: SampledField, frame: DirectionFrame, target: Lattice) -> SampledField:
    """Resampled field |detC| * f(C s) on `target`, multilinear interpolation.

    Points mapping outside the source box read 0; the operation is total.
    This is a validation path for the frame-reduction identity, not part
    of the forward transform (which never resamples).
    """
    src = field.lattice
    pts = target.points()                     # (*count, n)
    t = pts @ frame.C.T                       # t = C s row-wise
    coords = (t - src.origin) / src.step
    coords = np.moveaxis(coords, -1, 0)
    scale = abs(frame.detC)
    re = map_coordinates(field.values.real, coords, order=1, cval=0.0)
    im = map_coordinates(field.values.imag, coords, order=1, cval=0.0)
    return SampledField(target, scale * (re + 1j * im), label=field.label)


def parse_directions(text: str, n: int) -> np.ndarray:
    """CLI grammar: semicolon-separated vectors, comma-separated entries,
    normalized on input. Example: "0.7071,0.7071;1,0"."""
    rows = []
    for tok in text.split(";"):
        tok = tok.strip()
        if not tok:
            continue
        try:
            vec = [float(v) for v in tok.split(",")]
        except ValueError:
            raise ValueError(f"bad direction token {tok!r}") from None
        if len(vec) != n:
            raise ValueError(f"bad direction token {tok!r}: expected {n} entries")
        rows.append(vec)
    if not rows:
        raise ValueError("no directions given")
    u = np.asarray(rows, float)
    return u / np.linalg.norm(u, axis=1)[:, None]
