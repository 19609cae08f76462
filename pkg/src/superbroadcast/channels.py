"""Covariant, permutation-invariant qubit broadcasting channels.

A channel taking ``n_in`` qubits to ``m_out`` qubits that commutes with
collective rotations and qubit permutations is fixed by a nonnegative weight
for every compatible triple ``(j, l, J)``: ``l`` an input-register spin,
``j`` an output-register spin, ``J`` a total spin in the coupling range of
``j`` and ``l``.  The extreme points of this convex set pick exactly one
``(j, J)`` pair per input spin ``l``, which is what :class:`ExtremalMap`
records.  Everything here is exact: coefficients are rationals and trace
preservation can be checked without tolerance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Union

from .su2core import HalfInt, SpinLike, coupled_range, multiplicity, spin_range

__all__ = [
    "ExtremalMap",
    "ChannelCoeffs",
    "TracePreservationReport",
    "SearchSpaceTooLargeError",
    "extremal_count",
    "enumerate_extremal",
    "conjectured_optimal_map",
    "coefficients_for",
    "mix",
    "validate_trace_preserving",
]

DEFAULT_ENUMERATION_CAP = 10_000_000

Weight = Union[Fraction, float]


class SearchSpaceTooLargeError(ValueError):
    """Raised when an extremal-map enumeration would exceed its cap."""


@dataclass(frozen=True)
class ExtremalMap:
    """One extreme point of the covariant broadcasting channels.

    For each input spin ``l`` (in the order of ``spin_range(n_in)``) the map
    stores the chosen output spin and the total spin the two are coupled to.

    Attributes:
        n_in: number of input qubits.
        m_out: number of output qubits.
        output_spin: per-``l`` output-register spin, in ``spin_range(m_out)``.
        coupled_spin: per-``l`` total spin, in the coupling range of the
            output spin and ``l``.
    """

    n_in: int
    m_out: int
    output_spin: tuple[HalfInt, ...]
    coupled_spin: tuple[HalfInt, ...]

    def __post_init__(self) -> None:
        ls = spin_range(self.n_in)
        if len(self.output_spin) != len(ls) or len(self.coupled_spin) != len(ls):
            raise ValueError(
                f"need one (output, coupled) spin pair per input spin; "
                f"expected {len(ls)} entries"
            )
        out_ok = set(spin_range(self.m_out))
        for l, j, J in zip(ls, self.output_spin, self.coupled_spin):
            if j not in out_ok:
                raise ValueError(f"output spin {j} invalid for {self.m_out} qubits")
            if J not in coupled_range(j, l):
                raise ValueError(f"coupled spin {J} invalid for pair ({j}, {l})")

    def input_spins(self) -> list[HalfInt]:
        return spin_range(self.n_in)

    def sectors(self) -> Iterator[tuple[HalfInt, HalfInt, HalfInt]]:
        """Yield ``(l, output_spin, coupled_spin)`` per input spin."""
        yield from zip(self.input_spins(), self.output_spin, self.coupled_spin)

    def output_spin_for(self, l: SpinLike) -> HalfInt:
        return self.output_spin[self._index(l)]

    def coupled_spin_for(self, l: SpinLike) -> HalfInt:
        return self.coupled_spin[self._index(l)]

    def _index(self, l: SpinLike) -> int:
        want = HalfInt.of(l)
        for i, cand in enumerate(self.input_spins()):
            if cand == want:
                return i
        raise KeyError(f"{want} is not an input spin for {self.n_in} qubits")


@dataclass
class ChannelCoeffs:
    """Weights ``(j, l, J) -> s`` defining a covariant broadcasting channel.

    ``weights`` may hold exact :class:`Fraction` values (as produced by
    :func:`coefficients_for`) or floats (e.g. after mixing with a float
    weight).  Missing triples are implicitly zero.
    """

    n_in: int
    m_out: int
    weights: dict[tuple[HalfInt, HalfInt, HalfInt], Weight] = field(default_factory=dict)

    def weight(self, j: SpinLike, l: SpinLike, J: SpinLike) -> Weight:
        key = (HalfInt.of(j), HalfInt.of(l), HalfInt.of(J))
        return self.weights.get(key, Fraction(0))


@dataclass(frozen=True)
class TracePreservationReport:
    """Per-input-spin trace residuals plus any constraint violations."""

    residuals: tuple[tuple[HalfInt, float], ...]
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def max_residual(self) -> float:
        return max((abs(r) for _, r in self.residuals), default=0.0)


def _choices_per_input_spin(n_in: int, m_out: int) -> list[list[tuple[HalfInt, HalfInt]]]:
    """For each input spin ``l``, the ordered list of legal ``(j, J)`` pairs."""
    choices = []
    for l in spin_range(n_in):
        pairs = []
        for j in spin_range(m_out):
            for J in coupled_range(j, l):
                pairs.append((j, J))
        choices.append(pairs)
    return choices


def extremal_count(n_in: int, m_out: int) -> int:
    """Number of extremal maps, the product over ``l`` of the per-``l`` choices."""
    count = 1
    for pairs in _choices_per_input_spin(n_in, m_out):
        count *= len(pairs)
    return count


def enumerate_extremal(
    n_in: int, m_out: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> list[ExtremalMap]:
    """All extremal maps for ``n_in -> m_out``, in a fixed deterministic order.

    The order is lexicographic: the choice for the smallest input spin varies
    slowest, and for each ``l`` the ``(j, J)`` pairs are sorted by ascending
    ``j`` then ascending ``J``.

    Raises:
        SearchSpaceTooLargeError: if the total count exceeds ``cap``
            (default ten million); the message names the offending count.
    """
    count = extremal_count(n_in, m_out)
    if count > cap:
        raise SearchSpaceTooLargeError(
            f"search space too large: {count} extremal maps for "
            f"{n_in} -> {m_out} exceeds cap {cap}"
        )
    choices = _choices_per_input_spin(n_in, m_out)
    maps = []
    for combo in itertools.product(*choices):
        maps.append(
            ExtremalMap(
                n_in=n_in,
                m_out=m_out,
                output_spin=tuple(j for j, _ in combo),
                coupled_spin=tuple(J for _, J in combo),
            )
        )
    return maps


def conjectured_optimal_map(n_in: int, m_out: int) -> ExtremalMap:
    """The half-output-spin rule: send every input sector to the top output
    spin ``m_out / 2`` coupled down to the smallest reachable total spin
    ``|l - m_out / 2|``.

    This is the map :func:`superbroadcast.analysis.optimal_map` recovers by
    exhaustive search wherever the search is feasible.
    """
    top = HalfInt(m_out)
    outs = []
    coupled = []
    for l in spin_range(n_in):
        outs.append(top)
        coupled.append(abs(top - l))
    return ExtremalMap(n_in, m_out, tuple(outs), tuple(coupled))


def coefficients_for(emap: ExtremalMap) -> ChannelCoeffs:
    """Exact channel weights of an extremal map.

    The chosen triple for input spin ``l`` carries weight
    ``(2l+1) / ((2J+1) * d_j)`` with ``d_j`` the output-register multiplicity
    of spin ``j``; this is precisely the normalization that makes the channel
    trace preserving, which :func:`validate_trace_preserving` confirms
    exactly.
    """
    weights: dict[tuple[HalfInt, HalfInt, HalfInt], Weight] = {}
    for l, j, J in emap.sectors():
        d_j = multiplicity(emap.m_out, j)
        weights[(j, l, J)] = Fraction(l.dim, J.dim * d_j)
    return ChannelCoeffs(emap.n_in, emap.m_out, weights)


def mix(a: ChannelCoeffs, b: ChannelCoeffs, weight: Weight) -> ChannelCoeffs:
    """Convex combination ``weight * a + (1 - weight) * b``.

    Requires matching register sizes and ``0 <= weight <= 1``.  Fraction
    weights keep the result exact; float weights give floats.
    """
    if (a.n_in, a.m_out) != (b.n_in, b.m_out):
        raise ValueError(
            f"cannot mix channels of different shape: "
            f"{a.n_in}->{a.m_out} vs {b.n_in}->{b.m_out}"
        )
    if not 0 <= weight <= 1:
        raise ValueError(f"mixing weight {weight} outside [0, 1]")
    mixed: dict[tuple[HalfInt, HalfInt, HalfInt], Weight] = {}
    for key in set(a.weights) | set(b.weights):
        value = weight * a.weights.get(key, 0) + (1 - weight) * b.weights.get(key, 0)
        if value != 0:
            mixed[key] = value
    return ChannelCoeffs(a.n_in, a.m_out, mixed)


def validate_trace_preserving(
    coeffs: ChannelCoeffs, tol: float = 1e-12
) -> TracePreservationReport:
    """Check the per-``l`` trace condition and weight positivity.

    For every input spin ``l`` the weights must satisfy
    ``sum_{j,J} d_j * s(j,l,J) * (2J+1)/(2l+1) = 1``.  The report lists the
    residual of that sum for each ``l``; the violation list is empty exactly
    when all residuals are below ``tol`` and no weight is negative.  Exact
    rational weights produce exact residuals.
    """
    sums: dict[HalfInt, Weight] = {l: Fraction(0) for l in spin_range(coeffs.n_in)}
    violations = []
    for (j, l, J), s in coeffs.weights.items():
        if s < 0:
            violations.append(f"negative weight {s} at (j={j}, l={l}, J={J})")
        if l not in sums:
            violations.append(f"unknown input spin {l} for {coeffs.n_in} qubits")
            continue
        sums[l] += s * Fraction(multiplicity(coeffs.m_out, j) * J.dim, l.dim)
    residuals = []
    for l, total in sums.items():
        residual = total - 1
        residuals.append((l, float(residual)))
        if abs(residual) >= tol:
            violations.append(f"trace condition off by {float(residual):.3e} at l={l}")
    return TracePreservationReport(tuple(residuals), tuple(violations))
