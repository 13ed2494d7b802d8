"""End-to-end verification of the solid-mean vs boundary-mean inequality
for subharmonic test functions on convex bodies.

A test function carries two machine-checkable certificates against a given
body: a nonnegative-Laplacian check on interior probes (exact symbolic
Laplacians for polynomial kinds, (n-1)/|x-a| for shifted norms) and a
boundary-nonnegativity check on sampled boundary points.  Functions may be
negative inside the body; only the boundary sign matters.

verify_theorem1 checks   int_Omega f  <=  (sqrt(2)/pi) vol^{1/n} int_dOmega f
and hh_via_torsion checks the sharper intermediate inequality with the
sampled maximum of the torsion function's inward normal derivative.

JSON schema for functions:

    {"kind": "affine", "constant": c, "linear": [...]}
    {"kind": "quadratic", "center": [...], "constant": c, "linear": [...]}
    {"kind": "harmonic_polynomial", "terms": [{"powers": [..], "coeff": c}]}
    {"kind": "shifted_norm", "anchor": [...]}
    {"kind": "positive_combination",
     "terms": [{"weight": w, "fn": {...}}, ...]}
"""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np
from scipy.special import gammaln

from . import convex_geometry as cg
from . import rng
from . import wos_engine as wos
from .analytic_library import GRADIENT_CONSTANT, BoundReport, make_report
from .estimates import Estimate, WosConfig

_TAG_VOLUME_INT = 301
_TAG_BOUNDARY_INT = 302
_TAG_CERT = 303

BOUNDARY_TOL = 1e-9
LAPLACIAN_TOL = 1e-9


class CertificateError(ValueError):
    """A subharmonicity or boundary-sign certificate failed; carries the
    witness point."""

    def __init__(self, message: str, witness):
        super().__init__(message)
        self.witness = np.asarray(witness, dtype=float)


# ---------------------------------------------------------------------------
# polynomial helpers (terms: {powers tuple: coefficient})


def _poly_eval(terms: dict, X: np.ndarray) -> np.ndarray:
    out = np.zeros(len(X))
    for powers, coeff in terms.items():
        out += coeff * np.prod(X ** np.asarray(powers), axis=1)
    return out


def _poly_laplacian(terms: dict, n: int) -> dict:
    out: dict = defaultdict(float)
    for powers, coeff in terms.items():
        for i in range(n):
            p = powers[i]
            if p >= 2:
                reduced = list(powers)
                reduced[i] = p - 2
                out[tuple(reduced)] += coeff * p * (p - 1)
    return {k: v for k, v in out.items() if v != 0.0}


def _poly_affine_sub(terms: dict, center: np.ndarray, scale: float) -> dict:
    """Rewrite a polynomial in x as one in y, where x = center + scale * y."""
    out: dict = defaultdict(float)
    for powers, coeff in terms.items():
        partial = {(): coeff}
        for i, p in enumerate(powers):
            grown: dict = defaultdict(float)
            for mono, cf in partial.items():
                for k in range(p + 1):
                    grown[mono + (k,)] += (cf * math.comb(p, k)
                                           * scale**k * center[i] ** (p - k))
            partial = grown
        for mono, cf in partial.items():
            out[mono] += cf
    return dict(out)


def _unit_ball_monomial(n: int, powers) -> float:
    """Integral of prod x_i^{p_i} over the unit ball; zero for odd powers."""
    if any(p % 2 for p in powers):
        return 0.0
    total = sum(powers)
    log_val = (sum(gammaln((p + 1) / 2.0) for p in powers)
               - gammaln((n + total) / 2.0 + 1.0))
    return math.exp(log_val)


# ---------------------------------------------------------------------------
# test-function kinds


class SubharmonicFn:
    kind: str

    def value(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def laplacian(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def as_polynomial(self, n: int) -> dict | None:
        """Term dict when the function is polynomial, else None."""
        return None

    def to_json(self) -> dict:
        raise NotImplementedError

    def __call__(self, x):
        return float(self.value(np.asarray(x, dtype=float)[None, :])[0])


class Affine(SubharmonicFn):
    """constant + linear . x; harmonic, hence admissible."""

    kind = "affine"

    def __init__(self, constant: float, linear):
        self.constant = float(constant)
        self.linear = np.asarray(linear, dtype=float)

    def value(self, X):
        return self.constant + X @ self.linear

    def laplacian(self, X):
        return np.zeros(len(X))

    def as_polynomial(self, n):
        terms = {tuple([0] * n): self.constant}
        for i, a in enumerate(self.linear):
            if a != 0.0:
                p = [0] * n
                p[i] = 1
                terms[tuple(p)] = float(a)
        return terms

    def to_json(self):
        return {"kind": "affine", "constant": self.constant,
                "linear": self.linear.tolist()}


class Quadratic(SubharmonicFn):
    """|x - center|^2 + linear . x + constant; Laplacian 2n everywhere."""

    kind = "quadratic"

    def __init__(self, center, constant: float = 0.0, linear=None):
        self.center = np.asarray(center, dtype=float)
        self.constant = float(constant)
        self.linear = (np.zeros_like(self.center) if linear is None
                       else np.asarray(linear, dtype=float))

    def value(self, X):
        d = X - self.center
        return (np.einsum("ij,ij->i", d, d) + X @ self.linear + self.constant)

    def laplacian(self, X):
        return np.full(len(X), 2.0 * self.center.size)

    def as_polynomial(self, n):
        terms: dict = defaultdict(float)
        terms[tuple([0] * n)] += self.constant + float(self.center @ self.center)
        for i in range(n):
            sq = [0] * n
            sq[i] = 2
            terms[tuple(sq)] += 1.0
            lin = [0] * n
            lin[i] = 1
            terms[tuple(lin)] += self.linear[i] - 2.0 * self.center[i]
        return dict(terms)

    def to_json(self):
        return {"kind": "quadratic", "center": self.center.tolist(),
                "constant": self.constant, "linear": self.linear.tolist()}


class HarmonicPolynomial(SubharmonicFn):
    """Polynomial given by a term dict; the Laplacian is computed
    symbolically, so harmonicity (or subharmonicity) is checked exactly
    at the certificate probes."""

    kind = "harmonic_polynomial"

    def __init__(self, terms: dict, dimension: int):
        self.dimension = int(dimension)
        self.terms = {tuple(int(p) for p in k): float(v)
                      for k, v in terms.items()}
        for powers in self.terms:
            if len(powers) != self.dimension:
                raise ValueError("term powers must match the dimension")
        self._laplacian_terms = _poly_laplacian(self.terms, self.dimension)

    def value(self, X):
        return _poly_eval(self.terms, X)

    def laplacian(self, X):
        if not self._laplacian_terms:
            return np.zeros(len(X))
        return _poly_eval(self._laplacian_terms, X)

    def as_polynomial(self, n):
        return dict(self.terms)

    def to_json(self):
        return {"kind": "harmonic_polynomial",
                "terms": [{"powers": list(p), "coeff": c}
                          for p, c in sorted(self.terms.items())]}


class ShiftedNorm(SubharmonicFn):
    """f(x) = |x - anchor| with the anchor outside the closed body;
    lap f = (n - 1)/|x - anchor| > 0 for n >= 2."""

    kind = "shifted_norm"

    def __init__(self, anchor):
        self.anchor = np.asarray(anchor, dtype=float)

    def value(self, X):
        return np.linalg.norm(X - self.anchor, axis=1)

    def laplacian(self, X):
        return (self.anchor.size - 1) / np.linalg.norm(X - self.anchor, axis=1)

    def to_json(self):
        return {"kind": "shifted_norm", "anchor": self.anchor.tolist()}


class PositiveCombination(SubharmonicFn):
    kind = "positive_combination"

    def __init__(self, parts):
        parts = [(float(w), fn) for w, fn in parts]
        if any(w < 0 for w, _ in parts):
            raise ValueError("combination weights must be nonnegative")
        self.parts = parts

    def value(self, X):
        out = np.zeros(len(X))
        for w, fn in self.parts:
            out += w * fn.value(X)
        return out

    def laplacian(self, X):
        out = np.zeros(len(X))
        for w, fn in self.parts:
            out += w * fn.laplacian(X)
        return out

    def as_polynomial(self, n):
        total: dict = defaultdict(float)
        for w, fn in self.parts:
            terms = fn.as_polynomial(n)
            if terms is None:
                return None
            for p, c in terms.items():
                total[p] += w * c
        return dict(total)

    def to_json(self):
        return {"kind": "positive_combination",
                "terms": [{"weight": w, "fn": fn.to_json()}
                          for w, fn in self.parts]}


def fn_from_json(doc: dict, dimension: int) -> SubharmonicFn:
    kind = doc.get("kind")
    if kind == "affine":
        return Affine(doc["constant"], doc["linear"])
    if kind == "quadratic":
        return Quadratic(doc["center"], doc.get("constant", 0.0),
                         doc.get("linear"))
    if kind == "harmonic_polynomial":
        terms = {tuple(t["powers"]): t["coeff"] for t in doc["terms"]}
        return HarmonicPolynomial(terms, dimension)
    if kind == "shifted_norm":
        return ShiftedNorm(doc["anchor"])
    if kind == "positive_combination":
        return PositiveCombination(
            [(t["weight"], fn_from_json(t["fn"], dimension))
             for t in doc["terms"]])
    raise ValueError(f"unknown function kind {kind!r}")


# ---------------------------------------------------------------------------
# certificates


def certify_subharmonic(body: cg.ConvexBody, fn: SubharmonicFn,
                        seed: int = 0, probes: int = 512) -> None:
    """Check lap f >= -tol on interior probe points (exact for polynomial
    kinds whose symbolic Laplacian is constant-sign); raises
    CertificateError with a witness on failure."""
    if isinstance(fn, ShiftedNorm) and cg.contains(body, fn.anchor):
        raise CertificateError("shifted-norm anchor lies inside the body",
                               fn.anchor)
    if isinstance(fn, PositiveCombination):
        for _w, part in fn.parts:
            if isinstance(part, ShiftedNorm) and cg.contains(body, part.anchor):
                raise CertificateError(
                    "shifted-norm anchor lies inside the body", part.anchor)
    pts = cg.interior_points(body, probes, rng.derive(seed, _TAG_CERT, 1))
    lap = fn.laplacian(pts)
    worst = int(np.argmin(lap))
    if lap[worst] < -LAPLACIAN_TOL:
        raise CertificateError(
            f"laplacian {lap[worst]:.3e} < 0 at an interior probe",
            pts[worst])


def certify_boundary_nonnegative(body: cg.ConvexBody, fn: SubharmonicFn,
                                 seed: int = 0, probes: int = 512) -> None:
    pos, _nrm, _w = body.boundary_arrays(probes, rng.derive(seed, _TAG_CERT, 2))
    vals = fn.value(pos)
    worst = int(np.argmin(vals))
    if vals[worst] < -BOUNDARY_TOL:
        raise CertificateError(
            f"boundary value {vals[worst]:.3e} < 0 at a sampled point",
            pos[worst])


# ---------------------------------------------------------------------------
# integrals


def volume_integral(body: cg.ConvexBody, fn: SubharmonicFn,
                    cfg: WosConfig) -> Estimate:
    """Mean of f over uniform interior samples times the body volume."""
    pts = cg.interior_points(body, cfg.samples,
                             rng.derive(cfg.seed, _TAG_VOLUME_INT))
    vals = fn.value(pts)
    mean = Estimate.from_values(vals)
    vol = cg.volume(body, cfg)
    from .estimates import product_estimate

    return product_estimate(mean, vol)


def boundary_integral(body: cg.ConvexBody, fn: SubharmonicFn,
                      cfg: WosConfig) -> Estimate:
    """Importance-weighted mean of f over boundary samples times the
    surface area; the stderr includes the weight variance (delta method
    on the self-normalized ratio)."""
    pos, _nrm, wgt = body.boundary_arrays(cfg.samples,
                                          rng.derive(cfg.seed, _TAG_BOUNDARY_INT))
    vals = fn.value(pos)
    wsum = wgt.sum()
    mean = float(np.sum(wgt * vals) / wsum)
    m = len(vals)
    resid = wgt * (vals - mean) / (wsum / m)
    se_mean = float(np.std(resid, ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    area = cg.surface_area(body, cfg)
    var = (mean * area.stderr) ** 2 + (area.mean * se_mean) ** 2
    return Estimate(mean=mean * area.mean, stderr=math.sqrt(var), samples=m)


def exact_volume_integral(body: cg.ConvexBody, fn: SubharmonicFn) -> float:
    """Closed-form integral of a polynomial test function over a ball or
    box (radial/tensor quadrature); the independent cross-check used by
    the tests."""
    n = body.dimension
    terms = fn.as_polynomial(n)
    if terms is None:
        raise ValueError("exact integration requires a polynomial kind")
    if isinstance(body, cg.Ball):
        shifted = _poly_affine_sub(terms, body.center, body.radius)
        return body.radius**n * sum(
            c * _unit_ball_monomial(n, p) for p, c in shifted.items())
    if isinstance(body, cg.Box):
        total = 0.0
        for powers, coeff in terms.items():
            piece = coeff
            for i, p in enumerate(powers):
                piece *= ((body.upper[i] ** (p + 1) - body.lower[i] ** (p + 1))
                          / (p + 1))
            total += piece
        return total
    raise ValueError("exact integration supports balls and boxes only")


# ---------------------------------------------------------------------------
# the two verification operations


def verify_theorem1(body: cg.ConvexBody, fn: SubharmonicFn,
                    cfg: WosConfig) -> BoundReport:
    """Check int_Omega f <= (sqrt(2)/pi) vol^{1/n} int_dOmega f after both
    certificates pass; the report carries the achieved ratio
    lhs / (vol^{1/n} rhs) for sharpness tracking."""
    certify_subharmonic(body, fn, seed=cfg.seed)
    certify_boundary_nonnegative(body, fn, seed=cfg.seed)
    n = body.dimension
    lhs = volume_integral(body, fn, cfg)
    rhs = boundary_integral(body, fn, cfg)
    vol = cg.volume(body, cfg)
    root = vol.mean ** (1.0 / n)
    bound = GRADIENT_CONSTANT * root * rhs.mean
    bound_se = math.hypot(
        GRADIENT_CONSTANT * root * rhs.stderr,
        GRADIENT_CONSTANT * rhs.mean * root * vol.stderr / (n * vol.mean)
        if vol.stderr else 0.0)
    ratio = lhs.mean / (root * rhs.mean) if rhs.mean != 0 else math.inf
    return make_report(
        "hermite_hadamard", lhs, bound,
        provenance="solid integral <= (sqrt(2)/pi) vol^(1/n) boundary integral "
                   "for subharmonic f, f >= 0 on the boundary",
        bound_stderr=bound_se,
        details={"ratio": ratio, "boundary_integral": rhs.mean,
                 "volume_root": root, "fn": fn.to_json()})


def hh_via_torsion(body: cg.ConvexBody, fn: SubharmonicFn, cfg: WosConfig,
                   boundary_samples: int = 64,
                   workers: int | None = None) -> BoundReport:
    """Check the sharper intermediate inequality
    int_Omega f <= (max du/dnu) int_dOmega f with the sampled gradient
    maximum; numerically implies the theorem whenever the gradient bound
    also holds."""
    certify_subharmonic(body, fn, seed=cfg.seed)
    certify_boundary_nonnegative(body, fn, seed=cfg.seed)
    lhs = volume_integral(body, fn, cfg)
    rhs = boundary_integral(body, fn, cfg)
    grad = wos.max_normal_derivative(body, cfg, boundary_samples,
                                     workers=workers)
    bound = grad.estimate.mean * rhs.mean
    bound_se = math.hypot(grad.estimate.stderr * rhs.mean,
                          grad.estimate.mean * rhs.stderr)
    return make_report(
        "hh_via_torsion_gradient", lhs, bound,
        provenance="solid integral <= (max inward normal derivative of the "
                   "torsion function) x boundary integral",
        bound_stderr=bound_se,
        details={"max_gradient": grad.estimate.mean,
                 "max_location": grad.location.tolist(),
                 "boundary_integral": rhs.mean, "fn": fn.to_json()})
