"""Christoffel functions on convex polygons.

Evaluation of the degree-n Christoffel function, certified two-sided
geometric bounds, and optimal polynomial meshes via quadrature compression.

The functional core lives in the geometry, bounds, christoffel and quadmesh
modules. ChristoffelFunction and OptimalMesh wrap it in an estimator API and
are imported lazily to keep `import christoffel2d` light.
"""

import os as _os

# CHRISTOFFEL_THREADS caps BLAS parallelism; it only works if translated
# before numpy first loads in this process, hence before the imports below.
if "CHRISTOFFEL_THREADS" in _os.environ:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["CHRISTOFFEL_THREADS"])

from .errors import (
    AtOrigin,
    ChartFailure,
    ChristoffelError,
    CompressionFailed,
    ComputeError,
    DegenerateInput,
    DegenerateTangency,
    DegreeTooLarge,
    GridTooLarge,
    IllConditioned,
    InputError,
    InvalidPolygon,
    NotCase3,
    NumericalFailure,
    Outside,
    OutOfRegime,
    TooCloseToBoundary,
)
from .geometry import (
    AffineMap2,
    ConvexPolygon,
    Ellipse,
    LocalChart,
    NormalizedBody,
    ellipse_polygon,
    john_normalize,
    load_polygon,
    local_chart,
    minimum_enclosing_ellipse,
    random_convex_polygon,
    ray_boundary_gap,
    regular_polygon,
    save_polygon,
    superellipse_polygon,
    tau_retract,
)

__version__ = "0.1.0"

_LAZY = {
    "ChristoffelFunction": "christoffel2d.estimators",
    "OptimalMesh": "christoffel2d.estimators",
    "ChristoffelEvaluator": "christoffel2d.christoffel",
    "christoffel_eval": "christoffel2d.christoffel",
    "christoffel_values": "christoffel2d.christoffel",
    "christoffel_two_sided": "christoffel2d.christoffel",
    "christoffel_field": "christoffel2d.christoffel",
    "polygon_moments": "christoffel2d.christoffel",
    "BoundCertificate": "christoffel2d.bounds",
    "ParabolaFit": "christoffel2d.bounds",
    "fit_parabola": "christoffel2d.bounds",
    "lower_certificate": "christoffel2d.bounds",
    "upper_certificate": "christoffel2d.bounds",
    "Quadrature": "christoffel2d.quadmesh",
    "PolynomialMesh": "christoffel2d.quadmesh",
    "fine_quadrature": "christoffel2d.quadmesh",
    "tchakaloff_compress": "christoffel2d.quadmesh",
    "norming_ratio": "christoffel2d.quadmesh",
    "build_mesh": "christoffel2d.quadmesh",
    "verify_mesh": "christoffel2d.quadmesh",
}


def __getattr__(name):
    module = _LAZY.get(name)
    if module is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    import importlib

    return getattr(importlib.import_module(module), name)


def __dir__():
    return sorted(set(globals()) | set(_LAZY))
