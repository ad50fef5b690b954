"""Generalized-Bacon-Shor subsystem codes defined by binary matrices.

A code is specified by a binary matrix: one physical qubit per nonzero
entry (row-major numbering), weight-2 XX gauge generators along rows and
ZZ generators along columns.  Stabilizers come from linearly dependent
row/column sets, logical operators from the symplectic centralizer of the
gauge group.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import (
    PauliOp,
    as_gf2,
    express_in_basis,
    gf2_nullspace,
    gf2_rank,
    gf2_row_reduce,
    gf2_solve,
    pauli_from_string,
)


class CodeError(Exception):
    pass


class CodeFormatError(CodeError):
    pass


class DistanceSizeError(CodeError):
    pass


@dataclass(frozen=True)
class CodeMatrix:
    """Binary defining matrix plus the row-major qubit numbering."""

    matrix: np.ndarray  # uint8, shape (m_r, m_c)
    coords: tuple[tuple[int, int], ...]  # qubit index -> (row, col), 0-based

    def __post_init__(self):
        M = self.matrix
        if M.size == 0:
            raise CodeFormatError("empty matrix")
        if (M.sum(axis=1) == 0).any():
            raise CodeFormatError("matrix has an all-zero row")
        if (M.sum(axis=0) == 0).any():
            raise CodeFormatError("matrix has an all-zero column")

    @classmethod
    def from_matrix(cls, M) -> "CodeMatrix":
        M = as_gf2(M)
        M.setflags(write=False)
        coords = tuple((i, j) for i in range(M.shape[0]) for j in range(M.shape[1]) if M[i, j])
        return cls(M, coords)

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def index(self) -> dict[tuple[int, int], int]:
        return {rc: q for q, rc in enumerate(self.coords)}

    @property
    def coord_map(self) -> dict[tuple[int, int], int]:
        """1-based (row, col) -> qubit index, for the operator text syntax."""
        return {(i + 1, j + 1): q for q, (i, j) in enumerate(self.coords)}

    def qubit_labels(self) -> list[str]:
        return [f"[{i + 1},{j + 1}]" for (i, j) in self.coords]

    def row_qubits(self, i: int) -> list[int]:
        return [q for q, (r, _) in enumerate(self.coords) if r == i]

    def col_qubits(self, j: int) -> list[int]:
        return [q for q, (_, c) in enumerate(self.coords) if c == j]

    def parse(self, s: str) -> PauliOp:
        return pauli_from_string(s, self.n, self.coord_map)


def load_code_matrix(text: str) -> CodeMatrix:
    """Parse lines of 0/1 characters (whitespace optional, ``#`` comments)."""
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        data = line.split("#", 1)[0].strip()
        if not data:
            continue
        bits = data.split() if " " in data or "\t" in data else list(data)
        try:
            row = [int(b) for b in bits]
        except ValueError:
            raise CodeFormatError(f"line {lineno}: non-binary character in {data!r}")
        if any(b not in (0, 1) for b in row):
            raise CodeFormatError(f"line {lineno}: entries must be 0 or 1")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise CodeFormatError(f"line {lineno}: ragged row (expected {width} entries)")
        rows.append(row)
    if not rows:
        raise CodeFormatError("no data lines found")
    return CodeMatrix.from_matrix(rows)


def _pauli_on(cm: CodeMatrix, letter: str, qubits) -> PauliOp:
    op = PauliOp.identity(cm.n)
    for q in qubits:
        op = op * PauliOp.single(cm.n, letter, q)
    return op


def distance(cm: CodeMatrix, max_dim: int = 20) -> int:
    """Minimum distance: least Hamming weight over all nonzero GF(2)
    combinations of rows and of columns, by exhaustive enumeration."""
    m_r, m_c = cm.shape
    if m_r > max_dim or m_c > max_dim:
        raise DistanceSizeError(
            f"matrix {m_r}x{m_c} too large for exhaustive distance; pass the value manually"
        )
    best = cm.n
    for vectors in (cm.matrix, cm.matrix.T):
        masks = [int("".join(map(str, row[::-1])), 2) for row in vectors]
        acc = 0
        prev = 0
        # Gray-code enumeration: one XOR per combination
        for g in range(1, 1 << len(masks)):
            gray = g ^ (g >> 1)
            acc ^= masks[(prev ^ gray).bit_length() - 1]
            prev = gray
            if acc:
                best = min(best, acc.bit_count())
    return best


@dataclass(frozen=True)
class SubsystemCode:
    matrix: CodeMatrix
    n: int
    k: int
    d: int
    x_gauge: tuple[PauliOp, ...]  # nearest-neighbor XX within rows
    z_gauge: tuple[PauliOp, ...]  # nearest-neighbor ZZ within columns
    x_stabilizers: tuple[PauliOp, ...]
    z_stabilizers: tuple[PauliOp, ...]
    logical_pairs: tuple[tuple[PauliOp, PauliOp], ...]
    all_pairs: bool = False

    @property
    def gauge_generators(self) -> tuple[PauliOp, ...]:
        return self.x_gauge + self.z_gauge

    @property
    def stabilizer_generators(self) -> tuple[PauliOp, ...]:
        return self.x_stabilizers + self.z_stabilizers

    @property
    def num_stabilizers(self) -> int:
        return len(self.x_stabilizers) + len(self.z_stabilizers)

    def to_report(self) -> dict:
        labels = self.matrix.qubit_labels()
        return {
            "n": self.n,
            "k": self.k,
            "d": self.d,
            "gauge_generators": [g.to_string(labels) for g in self.gauge_generators],
            "stabilizers": [s.to_string(labels) for s in self.stabilizer_generators],
            "logicals": [[x.to_string(labels), z.to_string(labels)] for x, z in self.logical_pairs],
        }


def _gauge_masks(cm: CodeMatrix, all_pairs: bool) -> tuple[list[PauliOp], list[PauliOp]]:
    x_gauge = []
    for i in range(cm.shape[0]):
        qs = cm.row_qubits(i)
        pairs = (
            [(a, b) for ai, a in enumerate(qs) for b in qs[ai + 1:]]
            if all_pairs
            else list(zip(qs, qs[1:]))
        )
        for a, b in pairs:
            x_gauge.append(_pauli_on(cm, "X", (a, b)))
    z_gauge = []
    for j in range(cm.shape[1]):
        qs = cm.col_qubits(j)
        pairs = (
            [(a, b) for ai, a in enumerate(qs) for b in qs[ai + 1:]]
            if all_pairs
            else list(zip(qs, qs[1:]))
        )
        for a, b in pairs:
            z_gauge.append(_pauli_on(cm, "Z", (a, b)))
    return x_gauge, z_gauge


def _bits_to_mask(bits: np.ndarray) -> int:
    mask = 0
    for j, b in enumerate(bits):
        if b:
            mask |= 1 << j
    return mask


def _mask_matrix(ops: list[PauliOp], part: str, n: int) -> np.ndarray:
    out = np.zeros((len(ops), n), dtype=np.uint8)
    for i, op in enumerate(ops):
        bits = op.x if part == "x" else op.z
        for j in range(n):
            out[i, j] = (bits >> j) & 1
    return out


def _quotient_basis(space: np.ndarray, subspace: np.ndarray) -> np.ndarray:
    """Vectors of ``space`` extending a basis of ``subspace`` (row vectors)."""
    acc = list(subspace)
    rank = gf2_rank(subspace) if len(subspace) else 0
    out = []
    for v in space:
        trial = np.array(acc + [v], dtype=np.uint8)
        r = gf2_rank(trial)
        if r > rank:
            acc.append(v)
            rank = r
            out.append(v)
    return np.array(out, dtype=np.uint8).reshape(len(out), -1)


def _gf2_inverse(A: np.ndarray) -> np.ndarray:
    k = A.shape[0]
    aug = np.hstack([A, np.eye(k, dtype=np.uint8)])
    R, pivots = gf2_row_reduce(aug)
    if pivots[:k] != list(range(k)):
        raise CodeError("pairing matrix is singular over GF(2)")
    return R[:, k:]


def build_code(cm: CodeMatrix, all_pairs: bool = False) -> SubsystemCode:
    """Construct gauge generators, stabilizers and canonical logical pairs."""
    n = cm.n
    k = gf2_rank(cm.matrix)
    x_gauge, z_gauge = _gauge_masks(cm, all_pairs)

    # Z-type stabilizers: Z on every qubit of a dependent row set.
    z_stabs = []
    for v in gf2_nullspace(cm.matrix.T):
        qubits = [q for q, (r, _) in enumerate(cm.coords) if v[r]]
        z_stabs.append(_pauli_on(cm, "Z", qubits))
    # X-type stabilizers: X on every qubit of a dependent column set.
    x_stabs = []
    for u in gf2_nullspace(cm.matrix):
        qubits = [q for q, (_, c) in enumerate(cm.coords) if u[c]]
        x_stabs.append(_pauli_on(cm, "X", qubits))

    logical_pairs = _logical_operators(cm, k, x_gauge, z_gauge)
    d = distance(cm)
    return SubsystemCode(
        matrix=cm,
        n=n,
        k=k,
        d=d,
        x_gauge=tuple(x_gauge),
        z_gauge=tuple(z_gauge),
        x_stabilizers=tuple(x_stabs),
        z_stabilizers=tuple(z_stabs),
        logical_pairs=logical_pairs,
        all_pairs=all_pairs,
    )


def _logical_operators(cm, k, x_gauge, z_gauge):
    """Canonical logical pairs via the CSS symplectic centralizer."""
    n = cm.n
    Gx = _mask_matrix(x_gauge, "x", n)
    Gz = _mask_matrix(z_gauge, "z", n)

    # X-type centralizer vectors: orthogonal to every ZZ gauge generator.
    Cx = gf2_nullspace(Gz) if len(Gz) else np.eye(n, dtype=np.uint8)
    Cz = gf2_nullspace(Gx) if len(Gx) else np.eye(n, dtype=np.uint8)
    lx = _quotient_basis(Cx, Gx)
    lz = _quotient_basis(Cz, Gz)
    if len(lx) != k or len(lz) != k:
        raise CodeError(
            f"logical operator count mismatch: got {len(lx)} X / {len(lz)} Z, expected k={k}"
        )
    if k == 0:
        return ()
    # Enforce the canonical pairing <X_i, Z_j> = delta_ij.
    P = (lx @ lz.T) % 2
    lz = (_gf2_inverse(P).T @ lz) % 2
    pairs = []
    for i in range(k):
        xop = PauliOp(n, _bits_to_mask(lx[i]), 0, 0)
        zop = PauliOp(n, 0, _bits_to_mask(lz[i]), 0)
        pairs.append((xop, zop))
    return tuple(pairs)


def gauge_span_matrix(code: SubsystemCode) -> np.ndarray:
    """Symplectic vectors (rows) of the gauge generating set."""
    gens = code.gauge_generators
    return np.array([g.symplectic() for g in gens], dtype=np.uint8).reshape(
        len(gens), 2 * code.n
    )


def in_gauge_group(code: SubsystemCode, op: PauliOp) -> bool:
    """Membership of the gauge group up to sign (GF(2) span test)."""
    G = gauge_span_matrix(code)
    return gf2_solve(G.T, op.symplectic()) is not None


# ---------------------------------------------------------------------------
# Logical-operator encoding across blocks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockLayout:
    """Several code blocks laid out on one physical register."""

    blocks: tuple[SubsystemCode, ...]
    offsets: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.offsets:
            offs = []
            total = 0
            for b in self.blocks:
                offs.append(total)
                total += b.n
            object.__setattr__(self, "offsets", tuple(offs))

    @property
    def n(self) -> int:
        return self.offsets[-1] + self.blocks[-1].n

    def embed(self, block_index: int, op: PauliOp) -> PauliOp:
        off = self.offsets[block_index]
        return PauliOp(self.n, op.x << off, op.z << off, op.phase)

    def stabilizer_group(self) -> list[PauliOp]:
        """All products of block stabilizer generators (small codes only)."""
        gens = [
            self.embed(bi, s)
            for bi, b in enumerate(self.blocks)
            for s in b.stabilizer_generators
        ]
        group = [PauliOp.identity(self.n)]
        for g in gens:
            group += [h * g for h in group]
        return group


def combined_matrix(matrices: list[CodeMatrix]) -> CodeMatrix:
    """Block-diagonal code matrix hosting several independent blocks."""
    rows = sum(m.shape[0] for m in matrices)
    cols = sum(m.shape[1] for m in matrices)
    M = np.zeros((rows, cols), dtype=np.uint8)
    r = c = 0
    for m in matrices:
        M[r:r + m.shape[0], c:c + m.shape[1]] = m.matrix
        r += m.shape[0]
        c += m.shape[1]
    return CodeMatrix.from_matrix(M)


def _logical_factor(code: SubsystemCode, slot: int, letter: str) -> PauliOp:
    if not 0 <= slot < code.k:
        raise CodeError(f"slot {slot} out of range for block with k={code.k}")
    xop, zop = code.logical_pairs[slot]
    if letter == "X":
        return xop
    if letter == "Z":
        return zop
    # Y = i X Z, Hermitian since the pair anticommutes
    prod = xop * zop
    return PauliOp(prod.n, prod.x, prod.z, (prod.phase + 1) % 4)


def encode_operator(
    logical_term: str,
    assignment: dict[int, tuple[int, int]],
    layout: BlockLayout,
) -> tuple[PauliOp, int]:
    """Encode a Pauli word on logical qubits into a physical operator.

    ``logical_term`` uses linear labels over the logical qubits ("Z1 Z2");
    ``assignment`` maps logical qubit (0-based) to (block index, slot).
    The result is reduced to minimum weight by stabilizer multiplication,
    ties broken by smallest (x, z) bit pattern.
    """
    n_logical = len(assignment)
    word = pauli_from_string(logical_term, max(n_logical, 1))
    phys = PauliOp.identity(layout.n)
    for q in range(word.n):
        xb = (word.x >> q) & 1
        zb = (word.z >> q) & 1
        if not (xb or zb):
            continue
        if q not in assignment:
            raise CodeError(f"logical qubit {q + 1} not covered by the assignment")
        block, slot = assignment[q]
        letter = {(1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(xb, zb)]
        phys = phys * layout.embed(block, _logical_factor(layout.blocks[block], slot, letter))
    if word.phase:
        phys = phys * PauliOp(layout.n, 0, 0, word.phase)
    best = min(
        (s * phys for s in layout.stabilizer_group()),
        key=lambda p: (p.weight, p.x, p.z),
    )
    return best, best.weight


def encode_ising(
    h: dict[int, float],
    J: dict[tuple[int, int], float],
    assignment: dict[int, tuple[int, int]],
    layout: BlockLayout,
    transverse: bool = True,
) -> tuple[list[dict], dict[int, int]]:
    """Encode a logical Ising + transverse-field Hamiltonian term by term.

    Returns the encoded term list and a histogram of physical weights.
    """
    terms = []
    logical = []
    if transverse:
        for q in sorted(assignment):
            logical.append((1.0, f"X{q + 1}", f"X{q + 1}"))
    for q, hq in sorted(h.items()):
        if hq:
            logical.append((hq, f"Z{q + 1}", f"Z{q + 1}"))
    for (a, b), j in sorted(J.items()):
        if j:
            logical.append((j, f"Z{a + 1} Z{b + 1}", f"Z{a + 1} Z{b + 1}"))
    counts: dict[int, int] = {}
    for coeff, term, label in logical:
        op, w = encode_operator(term, assignment, layout)
        counts[w] = counts.get(w, 0) + 1
        terms.append({"logical": label, "coefficient": coeff, "physical": op, "weight": w})
    return terms, counts
