"""Dense complex linear algebra for few-qubit states.

Kets are column vectors over a labeled computational basis; the leftmost
label character is the most significant bit, so ``basis_ket("01")`` puts
amplitude 1 at index 1 of 4. No global-phase convention is enforced;
anything observable is compared at the density-operator level.

Everything here is a pure function of immutable values, so instances are
safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Ket",
    "Unitary",
    "DensityOperator",
    "basis_ket",
    "plus_ket",
    "minus_ket",
    "identity",
    "rotation",
    "tensor",
    "apply",
    "density_from_mixture",
    "partial_trace",
    "trace_distance",
    "helstrom",
    "measure_probs",
    "dumps_density_csv",
]

HERMITICITY_ATOL = 1e-12
TRACE_ATOL = 1e-12
UNITARITY_ATOL = 1e-12
EIGENVALUE_FLOOR = -1e-10
ORTHONORMALITY_ATOL = 1e-10


def _frozen_complex(value: np.ndarray | Sequence, ndim: int) -> np.ndarray:
    arr = np.array(value, dtype=complex)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-dimensional array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.view(float))):
        raise ValueError("non-finite amplitudes")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Ket:
    """Complex amplitude vector; not necessarily normalized."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "amplitudes", _frozen_complex(self.amplitudes, 1))

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> Ket:
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return Ket(self.amplitudes / n)

    def outer(self) -> np.ndarray:
        """The rank-one matrix |psi><psi| as a plain array."""
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def __add__(self, other: Ket) -> Ket:
        if not isinstance(other, Ket):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError("cannot add kets of different dimension")
        return Ket(self.amplitudes + other.amplitudes)

    def __rmul__(self, scalar: complex) -> Ket:
        return Ket(complex(scalar) * self.amplitudes)


@dataclass(frozen=True)
class Unitary:
    """Square matrix with U^dagger U = I within 1e-12."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = _frozen_complex(self.matrix, 2)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"unitary must be square, got shape {m.shape}")
        dev = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if dev > UNITARITY_ATOL:
            raise ValueError(f"matrix is not unitary (deviation {dev:.3g})")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, unit-trace, positive-semidefinite matrix (small tolerances)."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = _frozen_complex(self.matrix, 2)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"density operator must be square, got shape {m.shape}")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERMITICITY_ATOL:
            raise ValueError(f"not Hermitian (deviation {herm:.3g})")
        tr = m.trace()
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"trace is {tr:.15g}, not 1")
        lo = float(np.linalg.eigvalsh(m).min())
        if lo < EIGENVALUE_FLOOR:
            raise ValueError(f"negative eigenvalue {lo:.3g}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def basis_ket(label: str) -> Ket:
    """Computational-basis ket for a binary label, e.g. ``basis_ket("01")``."""
    if not label or any(ch not in "01" for ch in label):
        raise ValueError(f"basis label must be a nonempty string over 0/1, got {label!r}")
    amps = np.zeros(2 ** len(label), dtype=complex)
    amps[int(label, 2)] = 1.0
    return Ket(amps)


def plus_ket() -> Ket:
    return Ket(np.array([1.0, 1.0]) / math.sqrt(2.0))


def minus_ket() -> Ket:
    return Ket(np.array([1.0, -1.0]) / math.sqrt(2.0))


def identity(dim: int) -> Unitary:
    return Unitary(np.eye(dim))


def rotation(theta: float) -> Unitary:
    """Single-qubit rotation taking |0> to cos(theta)|0> + sin(theta)|1>."""
    if not math.isfinite(theta):
        raise ValueError("rotation angle must be finite")
    c, s = math.cos(theta), math.sin(theta)
    return Unitary(np.array([[c, -s], [s, c]]))


def tensor(x, y):
    """Kronecker product of two values of the same kind; left factor is most significant."""
    for kind in (Ket, Unitary, DensityOperator):
        if isinstance(x, kind) and isinstance(y, kind):
            field = "amplitudes" if kind is Ket else "matrix"
            return kind(np.kron(getattr(x, field), getattr(y, field)))
    raise TypeError(
        f"tensor requires two kets, two unitaries, or two density operators, "
        f"got {type(x).__name__} and {type(y).__name__}"
    )


def apply(u: Unitary, state: Ket | DensityOperator):
    """U|psi> for kets, U rho U^dagger for density operators."""
    if isinstance(state, Ket):
        if u.dim != state.dim:
            raise ValueError("dimension mismatch")
        return Ket(u.matrix @ state.amplitudes)
    if isinstance(state, DensityOperator):
        if u.dim != state.dim:
            raise ValueError("dimension mismatch")
        return DensityOperator(u.matrix @ state.matrix @ u.matrix.conj().T)
    raise TypeError(f"cannot apply a unitary to {type(state).__name__}")


def density_from_mixture(branches) -> DensityOperator:
    """Trace-normalized sum of weighted pure projectors.

    ``branches`` is an iterable of (weight, Ket) with weights >= 0; kets may
    be unnormalized. The result is sum_i w_i |psi_i><psi_i| divided by its
    trace, which is the defined semantics (any overall weight or amplitude
    scale drops out). At least one branch must carry positive mass.
    """
    acc = None
    dim = None
    for w, ket in branches:
        w = float(w)
        if not math.isfinite(w) or w < 0.0:
            raise ValueError(f"branch weight must be finite and >= 0, got {w}")
        if dim is None:
            dim = ket.dim
            acc = np.zeros((dim, dim), dtype=complex)
        elif ket.dim != dim:
            raise ValueError("mixture branches have mismatched dimensions")
        acc += w * ket.outer()
    if acc is None:
        raise ValueError("mixture needs at least one branch")
    tr = float(acc.trace().real)
    if tr <= 0.0:
        raise ValueError("mixture has zero total mass")
    return DensityOperator(acc / tr)


def partial_trace(rho: DensityOperator, keep: int, dims: Sequence[int]) -> DensityOperator:
    """Reduce to the ``keep``-th tensor factor; trace is preserved."""
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims) or int(np.prod(dims)) != rho.dim:
        raise ValueError(f"factor dimensions {dims} do not multiply to {rho.dim}")
    n = len(dims)
    if not 0 <= keep < n:
        raise ValueError(f"keep index {keep} out of range for {n} factors")
    rows = [chr(ord("a") + k) for k in range(n)]
    cols = list(rows)
    cols[keep] = chr(ord("a") + n)
    sub = f"{''.join(rows)}{''.join(cols)}->{rows[keep]}{cols[keep]}"
    reduced = np.einsum(sub, rho.matrix.reshape(*dims, *dims))
    return DensityOperator(reduced)


def trace_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Half the sum of absolute eigenvalues of rho - sigma; in [0, 1]."""
    if rho.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    diff = rho.matrix - sigma.matrix
    return 0.5 * float(np.abs(np.linalg.eigvalsh(diff)).sum())


def helstrom(
    rho0: DensityOperator, rho1: DensityOperator, prior0: float = 0.5
) -> tuple[float, np.ndarray]:
    """Optimal single-shot discrimination success and the witness projector.

    Success probability is 1/2 + (1/2) * tr|p1 rho1 - p0 rho0|. The witness
    is the projector onto the strictly positive eigenspace of that weighted
    difference; answering "rho1" exactly on its support achieves the bound.
    """
    if rho0.dim != rho1.dim:
        raise ValueError("dimension mismatch")
    prior0 = float(prior0)
    if not 0.0 <= prior0 <= 1.0:
        raise ValueError(f"prior must lie in [0, 1], got {prior0}")
    weighted = (1.0 - prior0) * rho1.matrix - prior0 * rho0.matrix
    evals, evecs = np.linalg.eigh(weighted)
    success = 0.5 + 0.5 * float(np.abs(evals).sum())
    pos = evecs[:, evals > 0.0]
    witness = pos @ pos.conj().T
    return success, witness


def measure_probs(rho: DensityOperator, basis: Sequence[Ket]) -> np.ndarray:
    """Outcome probabilities <b_k| rho |b_k> for an orthonormal basis."""
    if len(basis) != rho.dim:
        raise ValueError(f"basis has {len(basis)} kets but the space has dimension {rho.dim}")
    b = np.column_stack([k.amplitudes for k in basis])
    gram_dev = np.max(np.abs(b.conj().T @ b - np.eye(rho.dim)))
    if gram_dev > ORTHONORMALITY_ATOL:
        raise ValueError(f"basis is not orthonormal (deviation {gram_dev:.3g})")
    return np.real(np.einsum("ik,ij,jk->k", b.conj(), rho.matrix, b))


def dumps_density_csv(rho: DensityOperator, digits: int = 17) -> str:
    """CSV dump, one line per matrix row, entries as re,im pairs."""
    lines = []
    for row in rho.matrix:
        fields = []
        for z in row:
            fields.append(f"{z.real:.{digits}g}")
            fields.append(f"{z.imag:.{digits}g}")
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"
