"""Phased n-qubit Pauli operators and GF(2) linear algebra.

Operators are stored as packed bit masks (one Python int each for the X and
Z parts) together with a power-of-i phase.  The phase convention is relative
to the Hermitian single-qubit basis {I, X, Y, Z}: an operator is

    P = i^phase * (sigma_1 x ... x sigma_n),

so phase in {0, 2} always means Hermitian.  Internally multiplication
converts to the raw X^x Z^z ordering and back.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 63


class PauliError(Exception):
    """Base class for errors raised by this module."""


class DimensionMismatchError(PauliError):
    pass


class PauliParseError(PauliError):
    pass


class NotInSpanError(PauliError):
    pass


class PhaseConsistencyError(PauliError):
    """A decomposition produced a phase of +/-i where a sign was expected."""


def _popcount(x: int) -> int:
    return x.bit_count()


@dataclass(frozen=True)
class PauliOp:
    """Immutable phased Pauli operator on ``n`` qubits."""

    n: int
    x: int  # X-part bit mask, bit j set means X acts on qubit j
    z: int  # Z-part bit mask
    phase: int  # power of i relative to the Hermitian base operator

    def __post_init__(self):
        if not 1 <= self.n <= MAX_QUBITS:
            raise PauliError(f"qubit count {self.n} outside supported range 1..{MAX_QUBITS}")
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask:
            raise PauliError("bit mask exceeds qubit count")
        if self.phase not in (0, 1, 2, 3):
            raise PauliError(f"phase must be in 0..3, got {self.phase}")

    @classmethod
    def identity(cls, n: int) -> "PauliOp":
        return cls(n, 0, 0, 0)

    @classmethod
    def single(cls, n: int, letter: str, qubit: int) -> "PauliOp":
        """Single-qubit X, Y or Z on ``qubit`` (0-based)."""
        if not 0 <= qubit < n:
            raise PauliError(f"qubit {qubit} out of range for n={n}")
        bit = 1 << qubit
        if letter == "X":
            return cls(n, bit, 0, 0)
        if letter == "Z":
            return cls(n, 0, bit, 0)
        if letter == "Y":
            return cls(n, bit, bit, 0)
        raise PauliError(f"unknown Pauli letter {letter!r}")

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0 and self.phase == 0

    @property
    def is_hermitian(self) -> bool:
        return self.phase in (0, 2)

    @property
    def sign(self) -> int:
        """+1 or -1 for Hermitian operators."""
        if not self.is_hermitian:
            raise PhaseConsistencyError(f"operator has phase i^{self.phase}, no real sign")
        return 1 if self.phase == 0 else -1

    def _raw_phase(self) -> int:
        # exponent of i in the X^x Z^z ordering
        return (self.phase + _popcount(self.x & self.z)) % 4

    def __mul__(self, other: "PauliOp") -> "PauliOp":
        if self.n != other.n:
            raise DimensionMismatchError(f"qubit counts differ: {self.n} vs {other.n}")
        raw = self._raw_phase() + other._raw_phase() + 2 * _popcount(self.z & other.x)
        x = self.x ^ other.x
        z = self.z ^ other.z
        phase = (raw - _popcount(x & z)) % 4
        return PauliOp(self.n, x, z, phase)

    def commutes(self, other: "PauliOp") -> bool:
        if self.n != other.n:
            raise DimensionMismatchError(f"qubit counts differ: {self.n} vs {other.n}")
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def symplectic(self) -> np.ndarray:
        """Length-2n binary vector (x-part then z-part)."""
        out = np.zeros(2 * self.n, dtype=np.uint8)
        for j in range(self.n):
            out[j] = (self.x >> j) & 1
            out[self.n + j] = (self.z >> j) & 1
        return out

    def to_string(self, labels: list[str] | None = None) -> str:
        """Render in the operator text syntax, e.g. ``- X[1,1] X[1,2]``."""
        prefix = {0: "", 1: "i ", 2: "- ", 3: "-i "}[self.phase]
        factors = []
        for j in range(self.n):
            xb = (self.x >> j) & 1
            zb = (self.z >> j) & 1
            if not (xb or zb):
                continue
            letter = {(1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(xb, zb)]
            label = labels[j] if labels is not None else str(j + 1)
            factors.append(f"{letter}{label}")
        if not factors:
            return (prefix + "I").strip()
        return (prefix + " ".join(factors)).strip()

    def __str__(self) -> str:
        return self.to_string()


_TOKEN_RE = re.compile(r"^([XYZ])(?:\[(\d+)\s*,\s*(\d+)\]|(\d+))$")


def pauli_from_string(s: str, n: int, coord_map: dict[tuple[int, int], int] | None = None) -> PauliOp:
    """Parse operator text like ``"X[1,1] X[1,2]"`` or ``"-Z3 Z5"``.

    Grid coordinates require ``coord_map`` mapping 1-based (row, col) to
    qubit index; linear labels are 1-based qubit indices.
    """
    tokens = s.split()
    result = PauliOp.identity(n)
    start = 0
    if tokens and tokens[0] in ("+", "-"):
        if tokens[0] == "-":
            result = PauliOp(n, 0, 0, 2)
        start = 1
    for pos, tok in enumerate(tokens[start:], start=start):
        t = tok
        if pos == start and t[:1] in "+-" and len(t) > 1:
            if t[0] == "-":
                result = result * PauliOp(n, 0, 0, 2)
            t = t[1:]
        if t == "I":
            continue
        m = _TOKEN_RE.match(t)
        if m is None:
            raise PauliParseError(f"malformed token {tok!r} at position {pos}")
        letter = m.group(1)
        if m.group(4) is not None:
            idx = int(m.group(4)) - 1
            if not 0 <= idx < n:
                raise PauliParseError(f"qubit index out of range in token {tok!r} at position {pos}")
        else:
            if coord_map is None:
                raise PauliParseError(f"grid coordinates in token {tok!r} but no coordinate map given")
            rc = (int(m.group(2)), int(m.group(3)))
            if rc not in coord_map:
                raise PauliParseError(f"coordinate {rc} in token {tok!r} does not host a qubit")
            idx = coord_map[rc]
        result = result * PauliOp.single(n, letter, idx)
    return result


# ---------------------------------------------------------------------------
# GF(2) linear algebra on numpy uint8 matrices
# ---------------------------------------------------------------------------

def as_gf2(M) -> np.ndarray:
    A = np.asarray(M, dtype=np.uint8) % 2
    if A.ndim != 2:
        raise PauliError("expected a 2D binary matrix")
    return A


def gf2_row_reduce(M) -> tuple[np.ndarray, list[int]]:
    """Row-echelon form over GF(2); returns (R, pivot column list)."""
    R = as_gf2(M).copy()
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        hit = np.nonzero(R[r:, c])[0]
        if hit.size == 0:
            continue
        p = r + hit[0]
        if p != r:
            R[[r, p]] = R[[p, r]]
        others = np.nonzero(R[:, c])[0]
        for o in others:
            if o != r:
                R[o] ^= R[r]
        pivots.append(c)
        r += 1
    return R, pivots


def gf2_rank(M) -> int:
    A = as_gf2(M)
    if A.size == 0:
        return 0
    return len(gf2_row_reduce(A)[1])


def gf2_solve(A, b) -> np.ndarray | None:
    """One solution x of A x = b over GF(2) (free variables zero), or None."""
    A = as_gf2(A)
    b = np.asarray(b, dtype=np.uint8) % 2
    aug = np.hstack([A, b.reshape(-1, 1)])
    R, pivots = gf2_row_reduce(aug)
    ncols = A.shape[1]
    if ncols in pivots:
        return None  # pivot in the RHS column: inconsistent
    x = np.zeros(ncols, dtype=np.uint8)
    for r, c in enumerate(pivots):
        x[c] = R[r, ncols]
    return x


def gf2_nullspace(M) -> np.ndarray:
    """Basis of {x : M x = 0}, one vector per row (echelon-canonical)."""
    A = as_gf2(M)
    rows, cols = A.shape
    R, pivots = gf2_row_reduce(A)
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, c in enumerate(pivots):
            basis[i, c] = R[r, f]
    return basis


def in_span(vectors, target) -> bool:
    V = as_gf2(vectors)
    t = np.asarray(target, dtype=np.uint8) % 2
    if V.shape[0] == 0:
        return not t.any()
    return gf2_solve(V.T, t) is not None


def minimal_dependent_cover(target, candidates) -> tuple[int, ...]:
    """Smallest index set S with sum_{i in S} candidates[i] = target (GF(2)).

    Ties are broken by lexicographically smallest index set.  Raises
    NotInSpanError when the target is outside the candidates' span.
    """
    cands = [np.asarray(c, dtype=np.uint8) % 2 for c in candidates]
    t = np.asarray(target, dtype=np.uint8) % 2
    if cands and not in_span(np.array(cands), t):
        raise NotInSpanError("target not in span of candidates")
    if not cands:
        if t.any():
            raise NotInSpanError("target not in span of candidates")
        return ()
    for size in range(0 if not t.any() else 1, len(cands) + 1):
        for combo in itertools.combinations(range(len(cands)), size):
            acc = np.zeros_like(t)
            for i in combo:
                acc ^= cands[i]
            if np.array_equal(acc, t):
                return combo
    raise NotInSpanError("target not in span of candidates")  # pragma: no cover


def express_in_basis(target: PauliOp, basis: list[PauliOp]) -> tuple[tuple[int, ...], int]:
    """Write ``target = sign * prod basis[i]^(e_i)`` (factors in basis order).

    Returns (exponent tuple over GF(2), sign in {+1, -1}).  The sign comes
    from explicit Pauli multiplication, never from the bit solve alone.
    """
    if not basis:
        raise NotInSpanError("empty basis")
    n = target.n
    B = np.array([p.symplectic() for p in basis], dtype=np.uint8)
    e = gf2_solve(B.T, target.symplectic())
    if e is None:
        raise NotInSpanError("target not in the GF(2) span of the basis")
    prod = PauliOp.identity(n)
    for i, bit in enumerate(e):
        if bit:
            prod = prod * basis[i]
    diff = (target.phase - prod.phase) % 4
    if diff == 0:
        sign = 1
    elif diff == 2:
        sign = -1
    else:
        raise PhaseConsistencyError("decomposition differs from target by a factor of +/-i")
    return tuple(int(v) for v in e), sign
