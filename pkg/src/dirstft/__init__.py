"""Multi-directional short-time Fourier analysis.

Windowed Fourier transforms taken along a set of unit directions, with
exact-quadrature fast paths, reconstruction, window-change machinery and
a frequency-cone decay detector for directional singularities.
"""

from .directions import (
    DirectionFrame,
    build_frame,
    canonical_frame,
    pullback_frequency,
    pushforward,
)
from .errors import (
    DependentDirections,
    DirstftError,
    EmptyCone,
    EtaTooLarge,
    LatticeMismatch,
    PairingDegenerate,
    SingularB,
    UnknownKind,
)
from .lattice import (
    FrequencyLattice,
    Lattice,
    SampledField,
    dual_lattice,
    inner_product,
    make_lattice,
    riemann_integral,
)
from .signals import SignalRecipe, ground_truth, recipe_from_json, render
from .transform import (
    CoefficientField,
    ComplexFrequencyPoint,
    dstft_at,
    dstft_forward,
    invert,
    parseval_check,
    synthesis,
)
from .wavefront import (
    ConeQuery,
    DecayReport,
    WaveFrontMap,
    WavefrontParams,
    classify,
    cone_supremum,
    fit_decay,
    wavefront_map,
    window_robustness,
)
from .windowchange import cross_kernel, verify_window_change, window_change
from .windows import (
    WindowBank,
    WindowSpec,
    bump_window,
    custom_window,
    eval_ridge_atom,
    eval_window,
    gaussian_window,
    hann_window,
    pairing,
    parse_window,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
