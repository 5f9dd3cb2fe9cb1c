"""Exact sampling of N-boson output ports via the conditional chain rule.

A uniformly random ordering of the input rows makes the distribution of each
next output port proportional to a squared permanent of the rows seen so
far. Expanding that permanent along the candidate column reduces one
sampling step to the K leave-one-row-out subpermanents of the already-chosen
ports, and all K of them come out of a single Gray enumeration over the
distinct prefix ports: per Gray state the running row sums are updated in
one column, and exclusive prefix/suffix products over the rows deliver every
leave-one-out value at once.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Iterator, Mapping, Sequence

import numpy as np
from scipy import stats

from .errors import UnsupportedRegimeError
from .matrices import UnitaryMatrix, fingerprint
from .permanent import _unit_roots, mixed_radix_gray

BRUTE_FORCE_LIMIT = 100_000

__all__ = [
    "BRUTE_FORCE_LIMIT",
    "PortSequence",
    "SampleOps",
    "SampleBatch",
    "sample_permutation",
    "conditional_weights",
    "draw_sample",
    "draw_sample_counted",
    "sample_batch",
    "brute_force_distribution",
    "empirical_counts",
    "total_variation_distance",
    "chi_square_fit",
]


@dataclass(frozen=True)
class PortSequence:
    """Ordered output ports of one sample, with provenance.

    ``ports`` are 1-based and in sampling order; ``row_order`` is the random
    input-row ordering the chain used. ``seed`` is the integer seed for a
    direct draw, a (master_seed, index) pair for batch members, or None when
    the caller supplied its own generator.
    """

    ports: tuple[int, ...]
    row_order: tuple[int, ...]
    seed: object = None

    def configuration(self, n_ports: int) -> np.ndarray:
        """Collapse to the per-port occupation vector of length ``n_ports``."""
        return np.bincount(np.asarray(self.ports), minlength=n_ports + 1)[1:]


@dataclass(frozen=True)
class SampleOps:
    """Operation counters accumulated while drawing one sample."""

    per_step_gray: tuple[int, ...]
    row_ops: int
    weight_ops: int

    @property
    def gray_steps(self) -> int:
        return sum(self.per_step_gray)

    @property
    def op_units(self) -> int:
        return self.row_ops + self.weight_ops


def sample_permutation(n: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Uniformly random ordering of 1..n; deterministic per generator state."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return tuple(int(p) + 1 for p in rng.permutation(n))


def _exclusive_products(values: np.ndarray) -> np.ndarray:
    """out[i] = product of all entries except values[i] (division-free)."""
    k = values.shape[0]
    prefix = np.ones(k, dtype=np.complex128)
    suffix = np.ones(k, dtype=np.complex128)
    if k > 1:
        np.cumprod(values[:-1], out=prefix[1:])
        suffix[:-1] = np.cumprod(values[:0:-1])[::-1]
    return prefix * suffix


def _subpermanent_accumulators(
    block: np.ndarray, counts: Sequence[int]
) -> tuple[np.ndarray, int]:
    """Leave-one-row-out permanents of ``block``'s repeated-column multiset,
    up to one constant shared by every row.

    ``block`` is K x s (candidate rows by distinct prefix ports) and
    ``counts`` the port multiplicities summing to K - 1. Returns the K
    accumulators and the number of Gray steps walked. The shared constant
    (multiplicity factorials over the enumeration size) is dropped because
    callers only need ratios.
    """
    radices = [int(c) + 1 for c in counts]
    n_cols = len(radices)
    fixed = min(range(n_cols), key=lambda j: radices[j])
    summed = [j for j in range(n_cols) if j != fixed]
    roots = [_unit_roots(r) for r in radices]

    digits = [0] * n_cols
    row_sums = block.sum(axis=1)
    prefactor = 1 + 0j
    acc = _exclusive_products(row_sums)
    steps = 0
    for step in mixed_radix_gray([radices[j] for j in summed]):
        j = summed[step.position]
        old = roots[j][digits[j]]
        new = roots[j][step.new_value]
        digits[j] = step.new_value
        row_sums += (new - old) * block[:, j]
        prefactor *= new * old.conjugate()
        acc += prefactor * _exclusive_products(row_sums)
        steps += 1
    return acc, steps


def _weights_counted(
    mat: np.ndarray, rows: np.ndarray, occupied: np.ndarray, counts: np.ndarray
) -> tuple[np.ndarray, int]:
    """Unnormalized next-port weights for the rows ``rows`` (0-based) given
    the prefix described by occupied ports (0-based) and their counts."""
    if rows.shape[0] == 1:
        w = np.abs(mat[rows[0]]) ** 2
        return w, 0
    block = mat[np.ix_(rows, occupied)]
    acc, steps = _subpermanent_accumulators(block, counts)
    scale = float(np.max(np.abs(acc)))
    if scale > 0.0:
        acc = acc / scale
    amplitudes = acc @ mat[rows]
    return np.abs(amplitudes) ** 2, steps


def conditional_weights(u: UnitaryMatrix, pi: Sequence[int], prefix: Sequence[int]) -> np.ndarray:
    """Unnormalized weights over all M candidate next ports.

    ``pi`` is the input-row ordering (a permutation of 1..N) and ``prefix``
    the 1-based ports already sampled. Entry l-1 is proportional to the
    probability that the next port is l; a constant common to all candidates
    is dropped, which is all the chain rule needs at a fixed step.
    """
    n = len(pi)
    if sorted(pi) != list(range(1, n + 1)):
        raise ValueError("pi must be a permutation of 1..N")
    if len(prefix) >= n:
        raise ValueError(f"prefix of length {len(prefix)} leaves no port to sample")
    m_ports = u.dim
    ports = np.asarray(prefix, dtype=int)
    if ports.size and (ports.min() < 1 or ports.max() > m_ports):
        raise ValueError(f"prefix ports must lie in 1..{m_ports}")
    rows = np.asarray(pi[: len(prefix) + 1], dtype=int) - 1
    occ = np.bincount(ports, minlength=m_ports + 1)[1:]
    occupied = np.flatnonzero(occ)
    weights, _ = _weights_counted(u.matrix, rows, occupied, occ[occupied])
    return weights


def _chain_sample(
    u: UnitaryMatrix, n_bosons: int, rng: np.random.Generator, seed_note=None
) -> tuple[PortSequence, SampleOps]:
    m_ports = u.dim
    if n_bosons < 1:
        raise ValueError(f"n_bosons must be >= 1, got {n_bosons}")
    if n_bosons > m_ports:
        raise UnsupportedRegimeError(
            f"{n_bosons} bosons on {m_ports} ports: densities above one are not supported"
        )
    mat = u.matrix
    pi = sample_permutation(n_bosons, rng)
    rows_all = np.asarray(pi, dtype=int) - 1

    occ = np.zeros(m_ports, dtype=int)
    ports: list[int] = []
    per_step: list[int] = []
    row_ops = 0
    weight_ops = 0
    for k in range(1, n_bosons + 1):
        occupied = np.flatnonzero(occ)
        weights, gray = _weights_counted(mat, rows_all[:k], occupied, occ[occupied])
        per_step.append(gray)
        row_ops += k * (gray + 1)
        weight_ops += m_ports * k

        weights = np.maximum(weights, 0.0)
        cdf = np.cumsum(weights)
        total = cdf[-1]
        if not total > 0.0:
            raise RuntimeError("conditional weights vanished; cannot continue the chain")
        pick = int(np.searchsorted(cdf, rng.random() * total, side="right"))
        pick = min(pick, m_ports - 1)
        ports.append(pick + 1)
        occ[pick] += 1

    seq = PortSequence(ports=tuple(ports), row_order=pi, seed=seed_note)
    ops = SampleOps(per_step_gray=tuple(per_step), row_ops=row_ops, weight_ops=weight_ops)
    return seq, ops


def _resolve_rng(rng, seed):
    if rng is not None:
        return rng
    return np.random.default_rng(np.random.SeedSequence(seed))


def draw_sample(
    u: UnitaryMatrix,
    n_bosons: int,
    rng: np.random.Generator | None = None,
    seed: int | None = None,
) -> PortSequence:
    """One exact sample of the N output ports. Pass either a generator or a
    seed; with a fixed seed the sample is reproducible."""
    seq, _ = _chain_sample(u, n_bosons, _resolve_rng(rng, seed), seed_note=seed)
    return seq


def draw_sample_counted(
    u: UnitaryMatrix,
    n_bosons: int,
    rng: np.random.Generator | None = None,
    seed: int | None = None,
) -> tuple[PortSequence, SampleOps]:
    """Like draw_sample, also returning the operation counters."""
    return _chain_sample(u, n_bosons, _resolve_rng(rng, seed), seed_note=seed)


@dataclass(frozen=True)
class SampleBatch:
    """A reproducible batch of chain samples from one unitary."""

    unitary_sha256: str
    n_bosons: int
    n_ports: int
    master_seed: int
    samples: tuple[PortSequence, ...]
    gray_steps: tuple[int, ...]

    def configurations(self) -> np.ndarray:
        """(count, M) array of collapsed occupation vectors."""
        out = np.zeros((len(self.samples), self.n_ports), dtype=int)
        for i, seq in enumerate(self.samples):
            out[i] = seq.configuration(self.n_ports)
        return out

    def header(self) -> dict:
        return {
            "unitary_sha256": self.unitary_sha256,
            "n_bosons": self.n_bosons,
            "n_ports": self.n_ports,
            "master_seed": self.master_seed,
            "count": len(self.samples),
        }

    def jsonl_lines(self) -> Iterator[str]:
        yield json.dumps(self.header())
        for i, seq in enumerate(self.samples):
            yield json.dumps(
                {
                    "idx": i,
                    "ports": list(seq.ports),
                    "config": seq.configuration(self.n_ports).tolist(),
                    "ops": self.gray_steps[i],
                }
            )

    def write_jsonl(self, fp) -> None:
        for line in self.jsonl_lines():
            fp.write(line)
            fp.write("\n")


def sample_batch(
    u: UnitaryMatrix, n_bosons: int, count: int, master_seed: int
) -> SampleBatch:
    """``count`` independent samples with per-sample seeds derived from
    (master_seed, index); the result is identical however it is scheduled."""
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    children = np.random.SeedSequence(master_seed).spawn(count)
    samples = []
    steps = []
    for i, child in enumerate(children):
        seq, ops = _chain_sample(
            u, n_bosons, np.random.default_rng(child), seed_note=(master_seed, i)
        )
        samples.append(seq)
        steps.append(ops.gray_steps)
    return SampleBatch(
        unitary_sha256=fingerprint(u.matrix),
        n_bosons=n_bosons,
        n_ports=u.dim,
        master_seed=master_seed,
        samples=tuple(samples),
        gray_steps=tuple(steps),
    )


def brute_force_distribution(
    u: UnitaryMatrix, n_bosons: int
) -> dict[tuple[int, ...], float]:
    """Exact output distribution by enumerating every configuration.

    Refuses above BRUTE_FORCE_LIMIT configurations; this is the oracle the
    sampler is validated against, so it stays deliberately independent of
    the chain-rule machinery.
    """
    from .permanent import output_probability

    m_ports = u.dim
    if n_bosons < 1:
        raise ValueError(f"n_bosons must be >= 1, got {n_bosons}")
    n_configs = math.comb(m_ports + n_bosons - 1, n_bosons)
    if n_configs > BRUTE_FORCE_LIMIT:
        raise ValueError(
            f"{n_configs} configurations exceed the enumeration limit {BRUTE_FORCE_LIMIT}"
        )
    out: dict[tuple[int, ...], float] = {}
    for multiset in combinations_with_replacement(range(1, m_ports + 1), n_bosons):
        config = np.bincount(np.asarray(multiset), minlength=m_ports + 1)[1:]
        out[tuple(int(c) for c in config)] = output_probability(u, config)
    return out


def empirical_counts(batch: SampleBatch) -> dict[tuple[int, ...], int]:
    """Configuration frequency table of a batch."""
    counts: dict[tuple[int, ...], int] = {}
    for seq in batch.samples:
        key = tuple(int(c) for c in seq.configuration(batch.n_ports))
        counts[key] = counts.get(key, 0) + 1
    return counts


def total_variation_distance(
    counts: Mapping[tuple, int], probabilities: Mapping[tuple, float]
) -> float:
    total = sum(counts.values())
    if total == 0:
        raise ValueError("empty sample")
    keys = set(counts) | set(probabilities)
    return 0.5 * sum(
        abs(counts.get(k, 0) / total - probabilities.get(k, 0.0)) for k in keys
    )


def chi_square_fit(
    counts: Mapping[tuple, int],
    probabilities: Mapping[tuple, float],
    min_expected: float = 5.0,
) -> tuple[float, float]:
    """Goodness-of-fit statistic and p-value of observed counts against an
    exact distribution.

    Bins with expected count below ``min_expected`` are pooled, the standard
    validity fix for sparse cells. Any observation outside the support (or
    in a zero-probability bin) is an immediate failure with p = 0.
    """
    total = sum(counts.values())
    if total == 0:
        raise ValueError("empty sample")
    if set(counts) - set(probabilities):
        return math.inf, 0.0

    f_obs: list[float] = []
    f_exp: list[float] = []
    pooled_obs = 0.0
    pooled_exp = 0.0
    for key, p in probabilities.items():
        observed = counts.get(key, 0)
        expected = p * total
        if expected == 0.0:
            if observed:
                return math.inf, 0.0
            continue
        if expected < min_expected:
            pooled_obs += observed
            pooled_exp += expected
        else:
            f_obs.append(observed)
            f_exp.append(expected)
    if pooled_exp > 0.0:
        f_obs.append(pooled_obs)
        f_exp.append(pooled_exp)
    if len(f_obs) < 2:
        return 0.0, 1.0
    exp = np.asarray(f_exp)
    exp *= total / exp.sum()
    statistic, pvalue = stats.chisquare(np.asarray(f_obs), exp)
    return float(statistic), float(pvalue)
