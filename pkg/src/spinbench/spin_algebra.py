"""Angular-momentum operators, rotations, coherent states, and total-spin projectors.

Conventions used throughout the package:

* spin quantum numbers are carried as :class:`HalfInteger` (doubled-integer
  storage, so no float equality on j, k, m),
* every matrix is dense, complex, and written in the basis m = j, j-1, ..., -j
  (descending),
* hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

# Matrices are never exponentiated beyond this dimension (2j+1 <= DIM_CAP).
DIM_CAP = 2001


class HalfInteger:
    """An exact half-integer, stored as twice its value.

    HalfInteger(3) is 3/2; HalfInteger.from_value(1.5) is the same thing.
    """

    __slots__ = ("doubled",)

    def __init__(self, doubled):
        if not isinstance(doubled, (int, np.integer)):
            raise TypeError("doubled must be an integer, got %r" % (doubled,))
        self.doubled = int(doubled)

    @classmethod
    def from_value(cls, value):
        doubled = 2 * value
        if doubled != round(doubled):
            raise ValueError("%r is not a half-integer" % (value,))
        return cls(int(round(doubled)))

    @property
    def value(self):
        return self.doubled / 2

    @property
    def is_integer(self):
        return self.doubled % 2 == 0

    def __float__(self):
        return self.doubled / 2

    def __eq__(self, other):
        if isinstance(other, HalfInteger):
            return self.doubled == other.doubled
        return self.value == other

    def __lt__(self, other):
        return self.value < _as_number(other)

    def __le__(self, other):
        return self.value <= _as_number(other)

    def __gt__(self, other):
        return self.value > _as_number(other)

    def __ge__(self, other):
        return self.value >= _as_number(other)

    def __hash__(self):
        return hash(self.doubled)

    def __repr__(self):
        if self.doubled % 2 == 0:
            return "HalfInteger(%d)" % (self.doubled // 2)
        return "HalfInteger(%d/2)" % self.doubled

    def __str__(self):
        if self.doubled % 2 == 0:
            return str(self.doubled // 2)
        return "%d/2" % self.doubled


def _as_number(x):
    return x.value if isinstance(x, HalfInteger) else x


def as_half_integer(x) -> HalfInteger:
    """Coerce an int, exact half-integral float, or HalfInteger to HalfInteger."""
    if isinstance(x, HalfInteger):
        return x
    return HalfInteger.from_value(x)


@dataclass(frozen=True)
class Direction:
    """A unit vector on the Bloch sphere (rotation axis)."""

    nx: float
    ny: float
    nz: float

    def __post_init__(self):
        norm2 = self.nx * self.nx + self.ny * self.ny + self.nz * self.nz
        if abs(norm2 - 1.0) > 1e-14:
            raise ValueError(
                "direction (%g, %g, %g) is not unit length (|n|^2 - 1 = %g)"
                % (self.nx, self.ny, self.nz, norm2 - 1.0)
            )

    @classmethod
    def normalized(cls, nx, ny, nz):
        r = np.sqrt(nx * nx + ny * ny + nz * nz)
        if r == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(nx / r, ny / r, nz / r)

    @classmethod
    def from_polar(cls, polar, azimuth):
        s = np.sin(polar)
        return cls.normalized(s * np.cos(azimuth), s * np.sin(azimuth), np.cos(polar))

    def as_array(self):
        return np.array([self.nx, self.ny, self.nz])


Z_AXIS = Direction(0.0, 0.0, 1.0)
X_AXIS = Direction(1.0, 0.0, 0.0)


class SpinOperators(NamedTuple):
    j: HalfInteger
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    @property
    def dim(self):
        return self.j.doubled + 1


@lru_cache(maxsize=None)
def _spin_matrices(doubled_j):
    j = doubled_j / 2
    dim = doubled_j + 1
    if dim > DIM_CAP:
        raise ValueError("dimension %d exceeds cap %d" % (dim, DIM_CAP))
    m = j - np.arange(dim)  # descending j .. -j
    # ladder elements <m+1| J_+ |m> = sqrt(j(j+1) - m(m+1))
    raise_elems = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    jp = np.zeros((dim, dim), dtype=complex)
    jp[np.arange(dim - 1), np.arange(1, dim)] = raise_elems
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    jz = np.diag(m).astype(complex)
    for a in (jx, jy, jz):
        a.setflags(write=False)
    return jx, jy, jz


def make_spin_operators(j) -> SpinOperators:
    """Build (J_x, J_y, J_z) for spin j via the standard ladder construction."""
    j = as_half_integer(j)
    if j.doubled < 0:
        raise ValueError("spin must be non-negative, got %s" % j)
    jx, jy, jz = _spin_matrices(j.doubled)
    return SpinOperators(j, jx, jy, jz)


def rotation_unitary(ops: SpinOperators, n: Direction, angle: float) -> np.ndarray:
    """exp(-i * angle * n.J) through the spectral decomposition of n.J.

    The generator is Hermitian, so the eigendecomposition route keeps the
    result unitary to machine precision for any angle.
    """
    if not isinstance(n, Direction):
        n = Direction(*n)
    h = n.nx * ops.jx + n.ny * ops.jy + n.nz * ops.jz
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * angle * w)) @ v.conj().T


def spin_coherent_state(j, n: Direction) -> np.ndarray:
    """The state |j, j> rotated so that its spin points along n.

    The rotation taking z to n is fixed once and for all as the rotation about
    z x n (normalized) by the polar angle arccos(n_z); for n = -z the rotation
    is about x by pi, and for n = +z it is the identity.  Any smooth section
    would give the same fidelities, this one makes outputs reproducible.
    """
    j = as_half_integer(j)
    if j.doubled < 1:
        raise ValueError("spin_coherent_state needs j >= 1/2")
    ops = make_spin_operators(j)
    highest = np.zeros(ops.dim, dtype=complex)
    highest[0] = 1.0
    if not isinstance(n, Direction):
        n = Direction(*n)
    s2 = n.nx * n.nx + n.ny * n.ny
    if s2 < 1e-30:
        if n.nz > 0:
            return highest
        return rotation_unitary(ops, X_AXIS, np.pi) @ highest
    axis = Direction.normalized(-n.ny, n.nx, 0.0)  # z x n
    polar = np.arccos(np.clip(n.nz, -1.0, 1.0))
    return rotation_unitary(ops, axis, polar) @ highest


def _lowering(ops: SpinOperators) -> np.ndarray:
    return ops.jx - 1j * ops.jy


@lru_cache(maxsize=64)
def _projectors_cached(doubled_j1, doubled_j2):
    j1, j2 = doubled_j1 / 2, doubled_j2 / 2
    d1, d2 = doubled_j1 + 1, doubled_j2 + 1
    dim = d1 * d2
    if dim > DIM_CAP * 2:
        raise ValueError("coupled dimension %d too large" % dim)
    ops1 = make_spin_operators(HalfInteger(doubled_j1))
    ops2 = make_spin_operators(HalfInteger(doubled_j2))
    jz_tot = np.kron(np.diag(ops1.jz), np.ones(d2)) + np.kron(
        np.ones(d1), np.diag(ops2.jz)
    )
    jz_tot = jz_tot.real
    jminus = np.kron(_lowering(ops1), np.eye(d2)) + np.kron(np.eye(d1), _lowering(ops2))

    # Clebsch-Gordan construction: walk l from j1+j2 down to |j1-j2|.  The
    # highest-weight vector of each l-sector is the unique direction in the
    # M = l magnetic subspace orthogonal to everything lowered from above;
    # the rest of the multiplet follows by applying J_-.
    projectors = []
    built = {}  # M -> list of vectors |l, M> already constructed
    two_l_values = range(doubled_j1 + doubled_j2, abs(doubled_j1 - doubled_j2) - 2, -2)
    for two_l in two_l_values:
        l = two_l / 2
        sector = np.flatnonzero(np.abs(jz_tot - l) < 0.25)
        vec = None
        if len(sector) == 1 and not built.get(l):
            vec = np.zeros(dim, dtype=complex)
            vec[sector[0]] = 1.0
        else:
            # orthogonalize a sector basis vector against the known |l', l>
            others = built.get(l, [])
            basis = np.zeros((dim, len(sector)), dtype=complex)
            basis[sector, np.arange(len(sector))] = 1.0
            proj = basis.copy()
            for u in others:
                proj -= np.outer(u, u.conj() @ basis)
            norms = np.linalg.norm(proj, axis=0)
            pick = int(np.argmax(norms))
            assert norms[pick] > 1e-8, "degenerate Clebsch-Gordan sector"
            vec = proj[:, pick] / norms[pick]
            # Condon-Shortley-like sign fix: first sizable entry real positive
            lead = np.flatnonzero(np.abs(vec) > 1e-10)[0]
            vec = vec * (abs(vec[lead]) / vec[lead])
        # lower through the multiplet and accumulate the projector
        p = np.outer(vec, vec.conj())
        built.setdefault(l, []).append(vec)
        mval = l
        current = vec
        ltot = l * (l + 1)
        while mval > -l + 0.5:
            current = jminus @ current
            nrm = np.sqrt(ltot - mval * (mval - 1))
            current = current / nrm
            mval -= 1
            built.setdefault(mval, []).append(current)
            p = p + np.outer(current, current.conj())
        p.setflags(write=False)
        projectors.append((HalfInteger(two_l), p))
    return tuple(projectors)


def total_spin_projectors(j1, j2):
    """Projectors onto the total-spin-l blocks of j1 (x) j2, l = j1+j2 .. |j1-j2|.

    Returns a list of (l, P_l) pairs, l descending.
    """
    j1 = as_half_integer(j1)
    j2 = as_half_integer(j2)
    if j1.doubled < 0 or j2.doubled < 0:
        raise ValueError("spins must be non-negative")
    return list(_projectors_cached(j1.doubled, j2.doubled))
