"""Orthonormal Hermitian operator bases and bipartite state families.

A density matrix on an n-dimensional Hilbert space is written as

    rho = I_n / n + sum_i  s_i * a_i * G_i

where the G_i are fixed Hermitian tensor-product generators, the s_i are
the per-generator prefactors of the family's defining expansion and the
a_i are real coordinates.  For every supported family the scaled set
{s_i G_i} is orthonormal in the Hilbert-Schmidt inner product, so the
coordinate space carries the Euclidean geometry of the state set directly:
HS distance between two states equals the Euclidean distance between their
coordinate vectors.
"""

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidDimensionError,
    InvalidInputError,
    OutOfSubspaceError,
    UnknownFamilyError,
)

__all__ = [
    "OperatorBasis",
    "StateFamily",
    "FAMILY_NAMES",
    "pauli_basis",
    "gell_mann_basis",
    "generalized_gell_mann_basis",
    "make_family",
    "coords_to_matrix",
    "matrix_to_coords",
]

_CONSTRUCTION_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

I3 = np.eye(3, dtype=complex)


def _gamma_matrices():
    g = np.zeros((8, 3, 3), dtype=complex)
    g[0] = [[0, 1, 0], [1, 0, 0], [0, 0, 0]]
    g[1] = [[0, -1j, 0], [1j, 0, 0], [0, 0, 0]]
    g[2] = [[1, 0, 0], [0, -1, 0], [0, 0, 0]]
    g[3] = [[0, 0, 1], [0, 0, 0], [1, 0, 0]]
    g[4] = [[0, 0, -1j], [0, 0, 0], [1j, 0, 0]]
    g[5] = [[0, 0, 0], [0, 0, 1], [0, 1, 0]]
    g[6] = [[0, 0, 0], [0, 0, -1j], [0, 1j, 0]]
    g[7] = np.diag([1, 1, -2]) / np.sqrt(3)
    return g


GAMMAS = _gamma_matrices()


@dataclass(frozen=True)
class OperatorBasis:
    """Orthonormal self-adjoint basis: I_n/sqrt(n) plus n^2-1 traceless generators."""

    dim: int
    generators: tuple
    identity_element: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.dim
        if len(self.generators) != n * n - 1:
            raise InvalidDimensionError(
                f"expected {n * n - 1} generators, got {len(self.generators)}"
            )
        for g in self.generators:
            if abs(np.trace(g)) > _CONSTRUCTION_TOL:
                raise InvalidInputError("generator is not traceless")
        gram = _gram(np.asarray(self.generators))
        if not np.allclose(gram, np.eye(n * n - 1), atol=_CONSTRUCTION_TOL):
            raise InvalidInputError("generators are not HS-orthonormal")


def _gram(mats):
    flat = mats.reshape(mats.shape[0], -1)
    return (flat.conj() @ flat.T).real


def pauli_basis() -> OperatorBasis:
    """Normalized Pauli basis for n=2: {sigma_x, sigma_y, sigma_z}/sqrt(2)."""
    gens = tuple(s / np.sqrt(2) for s in PAULIS)
    return OperatorBasis(dim=2, generators=gens, identity_element=I2 / np.sqrt(2))


def gell_mann_basis() -> OperatorBasis:
    """Normalized Gell-Mann basis for n=3: gamma_1..gamma_8 divided by sqrt(2)."""
    gens = tuple(g / np.sqrt(2) for g in GAMMAS)
    return OperatorBasis(dim=3, generators=gens, identity_element=I3 / np.sqrt(3))


def generalized_gell_mann_basis(n: int) -> OperatorBasis:
    """Orthonormal traceless Hermitian generator set for SU(n), n >= 2.

    Ordering is fixed: symmetric off-diagonal pairs (lexicographic j < k),
    then antisymmetric pairs in the same order, then diagonal generators
    diag(1, ..., 1, -l, 0, ...) / sqrt(l(l+1)) for l = 1..n-1.
    """
    if n < 2:
        raise InvalidDimensionError(f"basis dimension must be >= 2, got {n}")
    gens = []
    for j in range(n):
        for k in range(j + 1, n):
            m = np.zeros((n, n), dtype=complex)
            m[j, k] = m[k, j] = 1 / np.sqrt(2)
            gens.append(m)
    for j in range(n):
        for k in range(j + 1, n):
            m = np.zeros((n, n), dtype=complex)
            m[j, k] = -1j / np.sqrt(2)
            m[k, j] = 1j / np.sqrt(2)
            gens.append(m)
    for l in range(1, n):
        diag = np.zeros(n)
        diag[:l] = 1
        diag[l] = -l
        gens.append(np.diag(diag).astype(complex) / np.sqrt(l * (l + 1)))
    return OperatorBasis(dim=n, generators=tuple(gens),
                         identity_element=np.eye(n, dtype=complex) / np.sqrt(n))


FAMILY_NAMES = (
    "bell_diagonal",
    "x_states",
    "rebit_rebit",
    "two_qubit",
    "qbqt_i",
    "qbqt_ii",
    "qbqt_iii",
    "qubit_qutrit",
    "qubit_ququart",
    "qutrit_qutrit",
)


@dataclass(eq=False)
class StateFamily:
    """A named affine subspace of unit-trace Hermitian matrices.

    ``generators`` holds the raw tensor-product operators of the defining
    expansion; ``scales`` the per-generator prefactors.  ``corr_index``,
    ``tau_a_index`` and ``tau_b_index`` map Bloch-picture labels to
    coordinate positions for two-qubit families (entries -1 where the
    family has no such coordinate); they are None for n > 4 families.
    """

    name: str
    n: int
    n_a: int
    n_b: int
    d: int
    generators: np.ndarray = field(repr=False)   # (d, n, n) complex
    scales: np.ndarray = field(repr=False)       # (d,)
    corr_index: np.ndarray = field(repr=False, default=None)    # (3, 3) int
    tau_a_index: np.ndarray = field(repr=False, default=None)   # (3,) int
    tau_b_index: np.ndarray = field(repr=False, default=None)   # (3,) int

    def __post_init__(self):
        if self.n_a * self.n_b != self.n:
            raise InvalidDimensionError("subsystem dimensions do not factor n")
        if self.generators.shape != (self.d, self.n, self.n):
            raise DimensionMismatchError("generator array has wrong shape")
        scaled = self.scaled_generators
        gram = _gram(scaled)
        if not np.allclose(gram, np.eye(self.d), atol=1e-10):
            raise InvalidInputError(
                f"family {self.name}: scaled generators are not orthonormal"
            )

    @cached_property
    def scaled_generators(self) -> np.ndarray:
        """Unit-HS-norm generator set s_i * G_i, shape (d, n, n)."""
        return self.scales[:, None, None] * self.generators

    @cached_property
    def pt_generators(self) -> np.ndarray:
        """Partial transpose (subsystem A) of each scaled generator."""
        from .ptrans import partial_transpose

        scaled = self.scaled_generators
        out = np.empty_like(scaled)
        for i in range(self.d):
            out[i] = partial_transpose(scaled[i], self.n_a, self.n_b,
                                       require_unit_trace=False)
        return out

    @property
    def outer_radius_coord(self) -> float:
        """Radius of the coordinate-space ball containing every state."""
        return np.sqrt((self.n - 1) / self.n)

    @property
    def mehta_radius_coord(self) -> float:
        """Radius of the coordinate-space ball containing only (separable) states."""
        return 1 / np.sqrt(self.n * (self.n - 1))

    def is_two_qubit(self) -> bool:
        return self.corr_index is not None


def _tensor(a, b):
    return np.kron(a, b)


def _two_qubit_parts():
    """The 15 raw generators of the general two-qubit expansion, in order
    tau_A(x,y,z), tau_B(x,y,z), nu_{ij} row-major."""
    gens = [_tensor(s, I2) for s in PAULIS]
    gens += [_tensor(I2, s) for s in PAULIS]
    gens += [_tensor(si, sj) for si in PAULIS for sj in PAULIS]
    return gens


def _neg3():
    return -np.ones(3, dtype=np.intp)


@lru_cache(maxsize=None)
def make_family(name: str) -> StateFamily:
    """Construct one of the ten supported state families by name."""
    if name not in FAMILY_NAMES:
        raise UnknownFamilyError(
            f"unknown family {name!r}; choose one of {', '.join(FAMILY_NAMES)}"
        )

    corr = -np.ones((3, 3), dtype=np.intp)
    tau_a = _neg3()
    tau_b = _neg3()

    if name == "bell_diagonal":
        gens = [_tensor(s, s) for s in PAULIS]
        scales = np.full(3, 0.5)
        corr[0, 0], corr[1, 1], corr[2, 2] = 0, 1, 2
        return StateFamily(name, 4, 2, 2, 3, np.array(gens), scales,
                           corr, tau_a, tau_b)

    if name == "x_states":
        gens = [
            _tensor(SIGMA_Z, I2), _tensor(I2, SIGMA_Z),
            _tensor(SIGMA_X, SIGMA_X), _tensor(SIGMA_X, SIGMA_Y),
            _tensor(SIGMA_Y, SIGMA_X), _tensor(SIGMA_Y, SIGMA_Y),
            _tensor(SIGMA_Z, SIGMA_Z),
        ]
        scales = np.full(7, 0.5)
        tau_a[2] = 0
        tau_b[2] = 1
        corr[0, 0], corr[0, 1] = 2, 3
        corr[1, 0], corr[1, 1] = 4, 5
        corr[2, 2] = 6
        return StateFamily(name, 4, 2, 2, 7, np.array(gens), scales,
                           corr, tau_a, tau_b)

    if name == "rebit_rebit":
        gens = [
            _tensor(I2, SIGMA_X), _tensor(I2, SIGMA_Z),
            _tensor(SIGMA_X, I2), _tensor(SIGMA_Z, I2),
            _tensor(SIGMA_X, SIGMA_X), _tensor(SIGMA_X, SIGMA_Z),
            _tensor(SIGMA_Y, SIGMA_Y), _tensor(SIGMA_Z, SIGMA_X),
            _tensor(SIGMA_Z, SIGMA_Z),
        ]
        scales = np.full(9, 0.5)
        tau_b[0], tau_b[2] = 0, 1
        tau_a[0], tau_a[2] = 2, 3
        corr[0, 0], corr[0, 2] = 4, 5
        corr[1, 1] = 6
        corr[2, 0], corr[2, 2] = 7, 8
        return StateFamily(name, 4, 2, 2, 9, np.array(gens), scales,
                           corr, tau_a, tau_b)

    if name == "two_qubit":
        gens = _two_qubit_parts()
        scales = np.full(15, 0.5)
        tau_a = np.arange(3, dtype=np.intp)
        tau_b = np.arange(3, 6, dtype=np.intp)
        corr = np.arange(6, 15, dtype=np.intp).reshape(3, 3)
        return StateFamily(name, 4, 2, 2, 15, np.array(gens), scales,
                           corr, tau_a, tau_b)

    if name == "qbqt_i":
        gens = [_tensor(SIGMA_Y, g) for g in GAMMAS]
        return StateFamily(name, 6, 2, 3, 8, np.array(gens), np.full(8, 0.5))

    if name == "qbqt_ii":
        gens = [_tensor(s, g) for s in PAULIS for g in GAMMAS[:4]]
        return StateFamily(name, 6, 2, 3, 12, np.array(gens), np.full(12, 0.5))

    if name == "qbqt_iii":
        gens = [_tensor(s, g) for s in PAULIS for g in GAMMAS]
        return StateFamily(name, 6, 2, 3, 24, np.array(gens), np.full(24, 0.5))

    if name == "qubit_qutrit":
        gens = [_tensor(s, I3) for s in PAULIS]
        gens += [_tensor(I2, g) for g in GAMMAS]
        gens += [_tensor(s, g) for s in PAULIS for g in GAMMAS]
        scales = np.concatenate([
            np.full(3, 1 / np.sqrt(6)), np.full(8, 0.5), np.full(24, 0.5),
        ])
        return StateFamily(name, 6, 2, 3, 35, np.array(gens), scales)

    if name == "qubit_ququart":
        # Four-level basis M_j taken as the 15 two-qubit generators.
        m_ops = _two_qubit_parts()
        i4 = np.eye(4, dtype=complex)
        gens = [_tensor(s, i4) for s in PAULIS]
        gens += [_tensor(I2, m) for m in m_ops]
        gens += [_tensor(s, m) for s in PAULIS for m in m_ops]
        scales = np.full(63, 1 / (2 * np.sqrt(2)))
        return StateFamily(name, 8, 2, 4, 63, np.array(gens), scales)

    if name == "qutrit_qutrit":
        gens = [_tensor(g, I3) for g in GAMMAS]
        gens += [_tensor(I3, g) for g in GAMMAS]
        gens += [_tensor(ga, gb) for ga in GAMMAS for gb in GAMMAS]
        scales = np.concatenate([
            np.full(16, 1 / np.sqrt(6)), np.full(64, 0.5),
        ])
        return StateFamily(name, 9, 3, 3, 80, np.array(gens), scales)

    raise UnknownFamilyError(name)


def coords_to_matrix(family: StateFamily, coords) -> np.ndarray:
    """Embed a coordinate vector as a unit-trace Hermitian matrix."""
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (family.d,):
        raise DimensionMismatchError(
            f"family {family.name} expects {family.d} coordinates, "
            f"got shape {coords.shape}"
        )
    rho = np.eye(family.n, dtype=complex) / family.n
    rho += np.tensordot(coords * family.scales, family.generators, axes=1)
    return rho


def matrix_to_coords(family: StateFamily, a: np.ndarray,
                     residual_tol: float = 1e-9) -> np.ndarray:
    """Project a unit-trace Hermitian matrix onto family coordinates.

    Raises if the trace is off by more than 1e-9 or the matrix lies
    outside the family subspace (reconstruction residual above
    ``residual_tol`` in HS norm).
    """
    a = np.asarray(a, dtype=complex)
    if a.shape != (family.n, family.n):
        raise DimensionMismatchError(
            f"expected {family.n}x{family.n} matrix, got {a.shape}"
        )
    if abs(np.trace(a).real - 1) > 1e-9 or abs(np.trace(a).imag) > 1e-9:
        raise InvalidInputError("input matrix does not have unit trace")
    # Tr(s_i G_i A) against the orthonormal scaled generators.
    coords = np.einsum("ijk,kj->i", family.scaled_generators, a,
                       optimize=True).real
    residual = np.linalg.norm(coords_to_matrix(family, coords) - a)
    if residual > residual_tol:
        raise OutOfSubspaceError(
            f"matrix lies {residual:.2e} outside the {family.name} subspace"
        )
    return coords
