"""Dense-matrix verification of every closed-form claim on small registers.

Nothing here reuses the sector-sum evaluation path: channels are realized as
explicit Choi operators on ``C^(2^M) (x) C^(2^N)``, built from an explicit
Schur isometry (computed by coupling one qubit at a time), applied to dense
input states, and reduced by partial traces.  Agreement of the resulting
marginals with :mod:`superbroadcast.analysis` is the package's primary
correctness evidence.

Conventions: computational ``|0>`` is spin up along z; register tensor
factors are ordered output (x) input in Choi operators; Schur blocks store
projections in descending order (highest weight first).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channels import ChannelCoeffs, ExtremalMap, coefficients_for
from .su2core import HalfInt, SpinLike, cg, coupled_range, multiplicity, projections

__all__ = [
    "DenseOperator",
    "SizeCapError",
    "SchurIsometry",
    "CheckResult",
    "VerificationReport",
    "schur_isometry",
    "projector_J",
    "build_choi",
    "apply_channel",
    "partial_trace",
    "single_copy_marginal",
    "bloch_vector",
    "qubit_state",
    "product_input",
    "random_axis",
    "random_su2",
    "kron_power",
    "verify_closed_form",
    "symmetric_marginal_deviation",
    "permutation_twirl_deviation",
]

# Dense operators are plain complex/real square ndarrays of power-of-two size.
DenseOperator = np.ndarray

DEFAULT_QUBIT_CAP = 12

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

# Single-qubit spin-flip conjugation i*sigma_y (real matrix).
_FLIP = np.array([[0.0, 1.0], [-1.0, 0.0]])


class SizeCapError(RuntimeError):
    """Raised when a dense computation would exceed its qubit cap."""


def kron_power(a: np.ndarray, n: int) -> np.ndarray:
    out = a
    for _ in range(n - 1):
        out = np.kron(out, a)
    return out


# ---------------------------------------------------------------------------
# Schur isometry


@dataclass
class SchurIsometry:
    """Orthonormal coupled basis of ``n_qubits`` qubits.

    ``blocks[j]`` lists, per coupling path, an array of shape
    ``(2j+1, 2^L)`` whose rows are the basis vectors ``|j, m, path>`` with
    ``m`` descending from ``+j`` to ``-j``.  A path is the sequence of
    intermediate total spins ``l_1 = 1/2, l_2, ..., l_L = j`` visited while
    adding qubits one at a time; the number of paths reaching ``j`` equals
    ``multiplicity(L, j)``.
    """

    n_qubits: int
    blocks: dict[HalfInt, list[tuple[tuple[HalfInt, ...], np.ndarray]]]

    def spins(self) -> list[HalfInt]:
        return sorted(self.blocks)

    def paths(self, j: SpinLike) -> list[tuple[HalfInt, ...]]:
        return [path for path, _ in self.blocks[HalfInt.of(j)]]

    def block(self, j: SpinLike, path_index: int = 0) -> np.ndarray:
        return self.blocks[HalfInt.of(j)][path_index][1]

    def column(self, j: SpinLike, m: SpinLike, path_index: int = 0) -> np.ndarray:
        jj = HalfInt.of(j)
        mm = HalfInt.of(m)
        return self.block(jj, path_index)[(jj.doubled - mm.doubled) // 2]

    def matrix(self) -> np.ndarray:
        """Full ``2^L x 2^L`` unitary; column order: ``j`` ascending, then
        path, then ``m`` descending."""
        rows = []
        for j in self.spins():
            for _, block in self.blocks[j]:
                rows.append(block)
        return np.vstack(rows).T


def schur_isometry(n_qubits: int, cap: int = DEFAULT_QUBIT_CAP) -> SchurIsometry:
    """Coupled spin basis of ``n_qubits`` qubits, one qubit at a time.

    Each new qubit splits every spin-``j`` block into ``j + 1/2`` and
    ``j - 1/2`` children with Clebsch-Gordan amplitudes; the recursion
    realizes the multiplicity spaces as coupling paths.

    Raises:
        SizeCapError: for ``n_qubits`` above ``cap`` (default 12), where the
            dense basis would not fit comfortably in memory.
    """
    if n_qubits < 1:
        raise ValueError(f"need at least one qubit, got {n_qubits}")
    if n_qubits > cap:
        raise SizeCapError(f"{n_qubits} qubits exceed the dense cap {cap}")
    half = HalfInt(1)
    blocks: dict[HalfInt, list[tuple[tuple[HalfInt, ...], np.ndarray]]] = {
        half: [((half,), np.eye(2))]
    }
    for level in range(2, n_qubits + 1):
        grown: dict[HalfInt, list[tuple[tuple[HalfInt, ...], np.ndarray]]] = {}
        for j in sorted(blocks, reverse=True):
            for path, block in blocks[j]:
                for child in (j + half, j - half):
                    if child.doubled < 0:
                        continue
                    rows = np.zeros((child.dim, block.shape[1] * 2))
                    for row, m_new in enumerate(reversed(projections(child))):
                        for spin_state, basis in ((half, (1.0, 0.0)), (-half, (0.0, 1.0))):
                            m_old = m_new - spin_state
                            if abs(m_old.doubled) > j.doubled:
                                continue
                            amplitude = cg(j, m_old, half, spin_state, child, m_new)
                            old_row = block[(j.doubled - m_old.doubled) // 2]
                            rows[row] += amplitude * np.kron(old_row, basis)
                    grown.setdefault(child, []).append((path + (child,), rows))
        blocks = grown
    return SchurIsometry(n_qubits, blocks)


# ---------------------------------------------------------------------------
# Choi operators


def projector_J(
    j: SpinLike,
    l: SpinLike,
    J: SpinLike,
    out_block: np.ndarray,
    in_block: np.ndarray,
) -> DenseOperator:
    """Projector onto total spin ``J`` in one (output, input) sector pair.

    ``out_block`` and ``in_block`` are Schur blocks (rows = projections,
    descending) of spins ``j`` and ``l``; the result acts on the joint space
    ordered output (x) input and has rank ``2J+1``.
    """
    jj, ll, JJ = HalfInt.of(j), HalfInt.of(l), HalfInt.of(J)
    if JJ not in coupled_range(jj, ll):
        raise ValueError(f"total spin {JJ} outside the coupling range of ({jj}, {ll})")
    if out_block.shape[0] != jj.dim or in_block.shape[0] != ll.dim:
        raise ValueError("Schur block shapes do not match the stated spins")
    dim = out_block.shape[1] * in_block.shape[1]
    coupled = np.zeros((dim, JJ.dim))
    for col, m_total in enumerate(projections(JJ)):
        vec = np.zeros(dim)
        for m in projections(jj):
            n = m_total - m
            if abs(n.doubled) > ll.doubled:
                continue
            amplitude = cg(jj, m, ll, n, JJ, m_total)
            if amplitude == 0.0:
                continue
            vec += amplitude * np.kron(
                out_block[(jj.doubled - m.doubled) // 2],
                in_block[(ll.doubled - n.doubled) // 2],
            )
        coupled[:, col] = vec
    return coupled @ coupled.T


def build_choi(coeffs: ChannelCoeffs, cap: int = DEFAULT_QUBIT_CAP) -> DenseOperator:
    """Dense Choi operator of a coefficient channel.

    Sums ``s(j,l,J)`` times the total-spin-``J`` projector over every pair
    of coupling paths (the identity on both multiplicity spaces).  The
    result is PSD with ``Tr_out = I`` for trace-preserving coefficients.

    Raises:
        SizeCapError: when ``n_in + m_out`` exceeds ``cap`` (default 12).
    """
    n_in, m_out = coeffs.n_in, coeffs.m_out
    if n_in + m_out > cap:
        raise SizeCapError(f"{m_out}+{n_in} qubits exceed the dense cap {cap}")
    iso_out = schur_isometry(m_out, cap)
    iso_in = schur_isometry(n_in, cap)
    dim = 2 ** (m_out + n_in)
    choi = np.zeros((dim, dim))
    for (j, l, J), s in coeffs.weights.items():
        weight = float(s)
        if weight == 0.0:
            continue
        for _, out_block in iso_out.blocks[j]:
            for _, in_block in iso_in.blocks[l]:
                choi += weight * projector_J(j, l, J, out_block, in_block)
    return choi


def apply_channel(choi: DenseOperator, rho_in: DenseOperator) -> DenseOperator:
    """Output state ``Tr_in[(I (x) rho~) S]`` with ``rho~ = C rho^T C``.

    ``C = (i sigma_y)^{(x) N}`` is the collective spin flip; the contraction
    reproduces ``rho`` itself when ``S`` is the Choi operator of the
    identity channel.
    """
    dim_in = rho_in.shape[0]
    dim_total = choi.shape[0]
    if rho_in.ndim != 2 or rho_in.shape[0] != rho_in.shape[1]:
        raise ValueError("input state must be a square matrix")
    if choi.ndim != 2 or choi.shape[0] != choi.shape[1] or dim_total % dim_in:
        raise ValueError(
            f"Choi dimension {choi.shape} incompatible with input dimension {dim_in}"
        )
    n_in = dim_in.bit_length() - 1
    if 2**n_in != dim_in:
        raise ValueError(f"input dimension {dim_in} is not a power of two")
    dim_out = dim_total // dim_in
    flip = kron_power(_FLIP, n_in)
    rho_tilde = flip @ rho_in.T @ flip.T
    choi4 = choi.reshape(dim_out, dim_in, dim_out, dim_in)
    return np.einsum("ab,xbya->xy", rho_tilde, choi4)


# ---------------------------------------------------------------------------
# states and reductions


def partial_trace(rho: DenseOperator, keep: Sequence[int], n_qubits: int) -> DenseOperator:
    """Reduced state on the ``keep`` qubits (ascending order preserved)."""
    keep = sorted(keep)
    if rho.shape != (2**n_qubits, 2**n_qubits):
        raise ValueError(f"state shape {rho.shape} does not match {n_qubits} qubits")
    if any(q < 0 or q >= n_qubits for q in keep) or len(set(keep)) != len(keep):
        raise ValueError(f"invalid qubit selection {keep} for {n_qubits} qubits")
    tensor = rho.reshape((2,) * (2 * n_qubits))
    row_labels = list(range(n_qubits))
    col_labels = [
        n_qubits + keep.index(q) if q in keep else q for q in range(n_qubits)
    ]
    out_labels = [q for q in keep] + [n_qubits + i for i in range(len(keep))]
    return np.einsum(tensor, row_labels + col_labels, out_labels).reshape(
        2 ** len(keep), 2 ** len(keep)
    )


def single_copy_marginal(rho_out: DenseOperator, which: int) -> DenseOperator:
    """Single-qubit reduced state of output copy ``which``."""
    dim = rho_out.shape[0]
    m_out = dim.bit_length() - 1
    if 2**m_out != dim:
        raise ValueError(f"output dimension {dim} is not a power of two")
    if not 0 <= which < m_out:
        raise ValueError(f"qubit index {which} out of range for {m_out} outputs")
    return partial_trace(rho_out, [which], m_out)


def bloch_vector(rho: DenseOperator) -> np.ndarray:
    """Cartesian Bloch components of a single-qubit state."""
    return np.array(
        [
            float(np.real(np.trace(rho @ PAULI_X))),
            float(np.real(np.trace(rho @ PAULI_Y))),
            float(np.real(np.trace(rho @ PAULI_Z))),
        ]
    )


def qubit_state(r: float, axis: Sequence[float]) -> DenseOperator:
    """Single-qubit state with Bloch vector ``r * axis`` (unit axis)."""
    ax = np.asarray(axis, dtype=float)
    return 0.5 * (
        np.eye(2, dtype=complex) + r * (ax[0] * PAULI_X + ax[1] * PAULI_Y + ax[2] * PAULI_Z)
    )


def product_input(n_in: int, r: float, axis: Sequence[float]) -> DenseOperator:
    """``n_in`` identical copies of :func:`qubit_state`."""
    return kron_power(qubit_state(r, axis), n_in)


def random_axis(rng: np.random.Generator) -> np.ndarray:
    vec = rng.normal(size=3)
    return vec / np.linalg.norm(vec)


def random_su2(rng: np.random.Generator) -> np.ndarray:
    """Haar-random SU(2) element via a unit quaternion."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    return np.array(
        [
            [q[0] + 1j * q[3], q[2] + 1j * q[1]],
            [-q[2] + 1j * q[1], q[0] - 1j * q[3]],
        ]
    )


# ---------------------------------------------------------------------------
# verification report


@dataclass(frozen=True)
class CheckResult:
    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.deviation < self.tolerance


@dataclass(frozen=True)
class VerificationReport:
    n_in: int
    m_out: int
    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def deviation(self, name: str) -> float:
        for check in self.checks:
            if check.name == name:
                return check.deviation
        raise KeyError(name)


def verify_closed_form(
    n_in: int,
    m_out: int,
    emap: ExtremalMap,
    r_values: Sequence[float] = (0.0, 0.3, 0.7, 1.0),
    axes: Optional[Sequence[Sequence[float]]] = None,
    seed: int = 7,
    cap: int = DEFAULT_QUBIT_CAP,
    coefficients: Optional[ChannelCoeffs] = None,
) -> VerificationReport:
    """Check one extremal map's closed form against the dense channel.

    Builds the Choi operator, validates Hermiticity, trace preservation and
    positivity, then for every ``(r, axis)`` compares the dense single-copy
    marginal against the sector-sum ``r'``: parallel component, vanishing
    transverse component, unit trace, and equality of marginals across
    output positions.  Finally conjugates by seeded Haar-random collective
    rotations to confirm covariance.

    ``coefficients`` overrides the map's own weights (normally left at
    ``None``); a corrupted set makes the trace-preservation and closed-form
    checks report their deviations honestly.
    """
    from .analysis import single_copy_bloch  # local import: analysis is the peer under test

    if (emap.n_in, emap.m_out) != (n_in, m_out):
        raise ValueError(
            f"map shape {emap.n_in}->{emap.m_out} does not match requested {n_in}->{m_out}"
        )
    rng = np.random.default_rng(seed)
    if axes is None:
        axes = [np.array([0.0, 0.0, 1.0]), random_axis(rng), random_axis(rng)]
    if coefficients is None:
        coefficients = coefficients_for(emap)
    choi = build_choi(coefficients, cap)

    hermitian_dev = float(np.max(np.abs(choi - choi.conj().T)))
    choi4 = choi.reshape(2**m_out, 2**n_in, 2**m_out, 2**n_in)
    trace_out = np.einsum("aiaj->ij", choi4)
    tp_dev = float(np.max(np.abs(trace_out - np.eye(2**n_in))))
    min_eig = float(np.linalg.eigvalsh(choi)[0])
    psd_dev = max(0.0, -min_eig)

    parallel_dev = 0.0
    transverse_dev = 0.0
    trace_dev = 0.0
    uniform_dev = 0.0
    for r in r_values:
        expected = single_copy_bloch(emap, r).r_prime
        for axis in axes:
            axis = np.asarray(axis, dtype=float)
            rho_out = apply_channel(choi, product_input(n_in, r, axis))
            trace_dev = max(trace_dev, abs(float(np.real(np.trace(rho_out))) - 1.0))
            marginals = [
                single_copy_marginal(rho_out, which)
                for which in {0, m_out // 2, m_out - 1}
            ]
            for a, b in itertools.combinations(marginals, 2):
                uniform_dev = max(uniform_dev, float(np.max(np.abs(a - b))))
            bloch = bloch_vector(marginals[0])
            along = float(bloch @ axis)
            parallel_dev = max(parallel_dev, abs(along - expected))
            transverse_dev = max(
                transverse_dev, float(np.linalg.norm(bloch - along * axis))
            )

    covariance_dev = 0.0
    base = product_input(n_in, 0.6, [0.0, 0.0, 1.0])
    reference = apply_channel(choi, base)
    for _ in range(2):
        u = random_su2(rng)
        u_in = kron_power(u, n_in)
        u_out = kron_power(u, m_out)
        rotated_first = apply_channel(choi, u_in @ base @ u_in.conj().T)
        rotated_last = u_out @ reference @ u_out.conj().T
        covariance_dev = max(
            covariance_dev, float(np.max(np.abs(rotated_first - rotated_last)))
        )

    checks = (
        CheckResult("choi_hermitian", hermitian_dev, 1e-12),
        CheckResult("choi_trace_preserving", tp_dev, 1e-10),
        CheckResult("choi_positive", psd_dev, 1e-10),
        CheckResult("closed_form_parallel", parallel_dev, 1e-9),
        CheckResult("output_transverse", transverse_dev, 1e-9),
        CheckResult("output_unit_trace", trace_dev, 1e-12),
        CheckResult("marginals_uniform", uniform_dev, 1e-12),
        CheckResult("covariance", covariance_dev, 1e-9),
    )
    return VerificationReport(n_in, m_out, checks)


# ---------------------------------------------------------------------------
# standalone identity checks


def symmetric_marginal_deviation(j_max: SpinLike = 3, cap: int = DEFAULT_QUBIT_CAP) -> float:
    """Max deviation of one-qubit marginals of top-spin Schur columns.

    For the spin-``j`` column ``|j m>`` of ``2j`` qubits the single-qubit
    reduced state must equal ``I/2 + (m/2j) sigma_z``; returns the largest
    absolute entry difference over ``j <= j_max`` and all ``m``.
    """
    top = HalfInt.of(j_max)
    worst = 0.0
    for dj in range(1, top.doubled + 1):
        j = HalfInt(dj)
        iso = schur_isometry(dj, cap)
        for m in projections(j):
            column = iso.column(j, m)
            marginal = partial_trace(np.outer(column, column), [dj - 1], dj)
            expected = 0.5 * np.eye(2) + (m.doubled / (2.0 * dj)) * PAULI_Z
            worst = max(worst, float(np.max(np.abs(marginal - expected))))
    return worst


def permutation_twirl_deviation(n_qubits: int, cap: int = 8) -> float:
    """Max deviation of the permutation twirl from the multiplicity average.

    Averaging ``|j m path_1><j m path_1|`` over all qubit permutations must
    equal ``1/d_j`` times the sum over all coupling paths, for every sector
    spin ``j`` and projection ``m``.
    """
    if n_qubits > cap:
        raise SizeCapError(f"{n_qubits} qubits exceed the permutation cap {cap}")
    iso = schur_isometry(n_qubits)
    worst = 0.0
    perms = list(itertools.permutations(range(n_qubits)))
    for j in iso.spins():
        d_j = multiplicity(n_qubits, j)
        for m in projections(j):
            first = iso.column(j, m, 0)
            twirl = np.zeros((2**n_qubits, 2**n_qubits))
            for perm in perms:
                permuted = first.reshape((2,) * n_qubits).transpose(perm).reshape(-1)
                twirl += np.outer(permuted, permuted)
            twirl /= len(perms)
            spread = sum(
                np.outer(iso.column(j, m, k), iso.column(j, m, k)) for k in range(d_j)
            )
            worst = max(worst, float(np.max(np.abs(twirl - spread / d_j))))
    return worst
