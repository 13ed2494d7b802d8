"""Deterministic, splittable random streams for all Monte Carlo sampling.

Every draw in the library is a pure function of a 64-bit key plus integer
coordinates, so results do not depend on batch sizes, worker counts, or
call order:

* ``uniforms(key, units, counter, nslots)`` hashes ``(key, unit, counter,
  slot)`` to a double in (0, 1) with a splitmix64-style finalizer.  A
  "unit" is a walk index, candidate index, or path index; any partition
  of the units across workers reproduces the same values bit for bit.
* ``path_generator(key, index)`` builds a counter-based Philox generator
  keyed by ``(key, index)`` for sequential 1-D path simulation, where a
  single unit needs a long private stream.

``derive`` folds operation tags and sub-indices into fresh keys so that
distinct operations sharing one user seed consume disjoint streams.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_STEP_MULT = 0xD1342543DE82EF95

# Maximum slots addressable per counter value; sampling code never needs
# more than the ambient dimension plus a selector.
MAX_SLOTS = 64


def _mix_int(z: int) -> int:
    """splitmix64 finalizer on a Python int (masked to 64 bits)."""
    z &= _MASK
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK
    z ^= z >> 31
    return z


def _mix_array(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, vectorized over a uint64 array."""
    z = z.copy()
    z ^= z >> np.uint64(30)
    z *= np.uint64(0xBF58476D1CE4E5B9)
    z ^= z >> np.uint64(27)
    z *= np.uint64(0x94D049BB133111EB)
    z ^= z >> np.uint64(31)
    return z


def derive(key: int, *words: int) -> int:
    """Fold integer words into ``key``, returning a new 64-bit key.

    Used to split one user seed into independent sub-streams per
    operation, probe point, or member index.
    """
    z = _mix_int((int(key) ^ 0xA076_1D64_78BD_642F) & _MASK)
    for w in words:
        z = _mix_int((z + (int(w) & _MASK) * _GOLDEN) & _MASK)
    return z


def derive_from_floats(key: int, values) -> int:
    """Fold float64 bit patterns into ``key`` (stable across runs)."""
    bits = np.asarray(values, dtype=np.float64).ravel().view(np.uint64)
    return derive(key, *(int(b) for b in bits))


def _unit_keys(key: int, units: np.ndarray) -> np.ndarray:
    u = np.ascontiguousarray(units, dtype=np.uint64)
    return _mix_array((u + np.uint64(derive(key))) * np.uint64(_GOLDEN))


def uniforms(key: int, units: np.ndarray, counter: int, nslots: int) -> np.ndarray:
    """Draws in (0, 1), shape ``(len(units), nslots)``.

    ``counter`` advances per use site (e.g. per walk step or rejection
    round); ``nslots`` must stay below MAX_SLOTS.
    """
    if nslots > MAX_SLOTS:
        raise ValueError(f"nslots {nslots} exceeds MAX_SLOTS {MAX_SLOTS}")
    base = _unit_keys(key, units)
    out = np.empty((base.size, nslots))
    for j in range(nslots):
        word = ((int(counter) * MAX_SLOTS + j) * _STEP_MULT) & _MASK
        v = _mix_array(base + np.uint64(word))
        # 53-bit mantissa, offset keeps draws strictly inside (0, 1)
        out[:, j] = (v >> np.uint64(11)) * 2.0**-53 + 2.0**-54
    return out


def standard_normals(key: int, units: np.ndarray, counter: int, nslots: int) -> np.ndarray:
    """Standard normal deviates via the inverse CDF of ``uniforms``."""
    return ndtri(uniforms(key, units, counter, nslots))


def unit_vectors(key: int, units: np.ndarray, counter: int, dim: int) -> np.ndarray:
    """Uniform directions on the unit sphere S^{dim-1}, one per unit.

    Dimensions 2 and 3 use exact angle maps (1 and 2 uniforms); higher
    dimensions normalize a Gaussian vector.
    """
    if dim == 2:
        theta = 2.0 * np.pi * uniforms(key, units, counter, 1)[:, 0]
        return np.column_stack((np.cos(theta), np.sin(theta)))
    if dim == 3:
        u = uniforms(key, units, counter, 2)
        z = 2.0 * u[:, 0] - 1.0
        phi = 2.0 * np.pi * u[:, 1]
        s = np.sqrt(np.maximum(1.0 - z * z, 0.0))
        return np.column_stack((s * np.cos(phi), s * np.sin(phi), z))
    g = standard_normals(key, units, counter, dim)
    norm = np.linalg.norm(g, axis=1)
    norm[norm < 1e-300] = 1.0
    return g / norm[:, None]


def path_generator(key: int, index: int) -> np.random.Generator:
    """Philox generator for path ``index``; independent across indices."""
    k = np.array([int(key) & _MASK, int(index) & _MASK], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=k))
