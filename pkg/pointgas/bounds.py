"""Localization bounds, state counting and the free-energy ledger.

Everything here is either exact integer arithmetic (occupation counting) or a
closed-form bound evaluated in double precision. The non-explicit universal
constants enter as arguments with defaults from ``config``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from config import (
    DEFAULT_C_DELTA,
    DEFAULT_C_ENTROPY,
    DEFAULT_C_ETA,
    DEFAULT_ELL_PREFACTOR,
    DEFAULT_KAPPA,
    HARDY_C0,
    HARDY_C1,
)

from .errors import InvalidArgumentError
from .freefermi import SpectrumSlice, cube_free_energy, localized_free_energy
from .geometry import BoxPartition, OccupationVector, localization_stats, make_partition, neighborhoods
from .grid import GridField
from .weight import g_lower_bound

logger = logging.getLogger(__name__)

_LN2 = math.log(2.0)


# --------------------------------------------------------------------------
# norm sandwich


@dataclass(frozen=True)
class SandwichReport:
    """lower <= ||psi||_g^2 <= upper, each side evaluated by the same quadrature."""

    lower: float
    middle: float
    upper: float
    eps: float
    norm: float
    gradient_term: float

    @property
    def lower_margin(self) -> float:
        return self.middle - self.lower

    @property
    def upper_margin(self) -> float:
        return self.upper - self.middle

    @property
    def passed(self) -> bool:
        return self.lower_margin >= 0 and self.upper_margin >= 0


@dataclass(frozen=True, eq=False)
class SandwichCase:
    partition: BoxPartition
    occupation: OccupationVector
    psi: GridField


def sandwich_origin(p: BoxPartition, n: OccupationVector, points: int) -> tuple[float, ...]:
    """Grid origin on B(n) with ``points`` cells per box side per coordinate.

    The k-th of n_j particles in box j is shifted by (k+1)/(n_j+1) of a cell,
    so no two particles ever share a grid coordinate.
    """

    if points < 2:
        raise InvalidArgumentError(f"need at least two points per box side, got {points}")
    h = p.ell / points
    boxes = n.box_of_particle()
    first = np.searchsorted(boxes, boxes)
    origin = []
    for i, box in enumerate(boxes):
        shift = (i - first[i] + 1) / (n.counts[box] + 1)
        origin += [float(c) * p.ell + (shift - 0.5) * h for c in p.corners[box]]
    return tuple(origin)


def sandwich_field(p: BoxPartition, n: OccupationVector, points: int, func) -> GridField:
    """Sample func(x_1^1, x_1^2, x_1^3, x_2^1, ...) on the staggered grid of B(n)."""

    return GridField.from_function(
        func, (points,) * (3 * n.N), p.ell / points, sandwich_origin(p, n, points)
    )


def _pair_weight(psi: GridField, N: int) -> np.ndarray:
    axes = psi.mesh()
    g = np.zeros(psi.shape)
    for i in range(N):
        for j in range(i + 1, N):
            sq = sum((axes[3 * i + a] - axes[3 * j + a]) ** 2 for a in range(3))
            g = g + 1.0 / np.sqrt(sq)
    return g


def norm_sandwich_check(
    psi: GridField,
    n: OccupationVector,
    p: BoxPartition,
    eps: float,
    *,
    c0: float = HARDY_C0,
    c1: float = HARDY_C1,
) -> SandwichReport:
    """Both sides of the weighted-norm sandwich for a function supported in B(n)."""

    if not eps > 0:
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    N = n.N
    if psi.ndim != 3 * N:
        raise InvalidArgumentError(f"psi has {psi.ndim} axes, expected {3 * N}")
    boxes = n.box_of_particle()
    for i, box in enumerate(boxes):
        lower, upper = p.bounds(int(box))
        for a in range(3):
            coords = psi.axis(3 * i + a)
            if coords.min() < lower[a] - 1e-12 * p.L or coords.max() > upper[a] + 1e-12 * p.L:
                raise InvalidArgumentError(f"particle {i} leaves its box {int(box)}")
    h = psi.spacing
    volume = h ** psi.ndim
    density = psi.values**2
    norm = float(np.sum(density) * volume)
    if norm == 0.0:
        raise InvalidArgumentError("psi vanishes identically")

    g2 = _pair_weight(psi, N) ** 2
    middle = float(np.sum(g2 * density) * volume)

    stats = localization_stats(p, n)
    floor = g_lower_bound(stats, p.ell)
    sizes = [len(s) for s in neighborhoods(p, n)]
    gradient = 0.0
    for i in range(N):
        if sizes[i] == 0:
            continue
        grad2 = sum(np.gradient(psi.values, h, axis=3 * i + a) ** 2 for a in range(3))
        gradient += sizes[i] * float(np.sum(g2 * grad2) * volume)

    V = stats.V
    ell = p.ell
    upper = (1 + eps) * (stats.K_plus**2 + c1 * V**2 / (eps * ell**2)) * norm
    upper += (1 + 1 / eps) * c0 * V / floor**2 * gradient
    return SandwichReport(
        lower=floor**2 * norm, middle=middle, upper=upper, eps=eps, norm=norm, gradient_term=gradient
    )


# points per box side at the two quadrature resolutions, by particle number
_SANDWICH_POINTS = {2: (4, 6), 3: (3, 4), 4: (2, 3)}


def random_sandwich_case(rng: np.random.Generator, resolution: int = 0, *, max_m: int = 3) -> SandwichCase:
    """A random partition (m <= max_m), occupation (N <= 4) and polynomial product psi."""

    m = int(rng.integers(2, max_m + 1))
    p = make_partition(float(rng.uniform(0.5, 2.0)), m)
    N = int(rng.integers(2, 5))
    boxes = np.sort(rng.choice(p.M, size=N, replace=True))
    counts = np.bincount(boxes, minlength=p.M)
    n = OccupationVector(tuple(int(c) for c in counts))
    points = _SANDWICH_POINTS[N][resolution]
    corners = p.corners[n.box_of_particle()] * p.ell
    a = rng.uniform(-1.0, 1.0, size=3 * N)
    b = rng.uniform(-1.0, 1.0, size=3 * N)
    base = corners.reshape(-1)

    def psi(*coords):
        value = 1.0
        for k, x in enumerate(coords):
            t = (x - base[k]) / p.ell
            value = value * (1.0 + a[k] * t + b[k] * t * t)
        return value

    return SandwichCase(p, n, sandwich_field(p, n, points, psi))


# --------------------------------------------------------------------------
# occupation numbers


def _counts(n: OccupationVector | Sequence[int]) -> list[int]:
    return list(n.counts) if isinstance(n, OccupationVector) else [int(c) for c in n]


def kinetic_lower_bound(
    n: OccupationVector | Sequence[int], q: int, ell: float, kappa: float = DEFAULT_KAPPA
) -> float:
    """kappa / q^(2/3) * sum_j [n_j - q]_+^(5/3) / ell^2."""

    if q < 1 or not ell > 0 or not kappa > 0:
        raise InvalidArgumentError(f"need q >= 1, ell > 0, kappa > 0; got ({q}, {ell}, {kappa})")
    excess = math.fsum(max(c - q, 0) ** (5.0 / 3.0) for c in _counts(n))
    return kappa * excess / (q ** (2.0 / 3.0) * ell**2)


def calibrate_kappa(energy: float, n: OccupationVector | Sequence[int], q: int, ell: float) -> float:
    """Largest kappa with kinetic_lower_bound(n, q, ell, kappa) <= energy."""

    excess = math.fsum(max(c - q, 0) ** (5.0 / 3.0) for c in _counts(n))
    if excess == 0:
        raise InvalidArgumentError("no box holds more than q particles; kappa is unconstrained")
    return energy * q ** (2.0 / 3.0) * ell**2 / excess


def mu_opt_bound(A_size: int, q: int) -> int:
    """sup over mu of mu^2 [A - mu^3 q]_+, scanning mu up to ceil((A/q)^(1/3))."""

    if A_size < 0 or q < 1:
        raise InvalidArgumentError(f"need A_size >= 0 and q >= 1, got ({A_size}, {q})")
    best = 0
    mu = 1
    while True:
        best = max(best, mu * mu * max(A_size - mu**3 * q, 0))
        if mu**3 * q >= A_size:
            return best
        mu += 1


@dataclass(frozen=True)
class MuOptScan:
    c_star: float
    argmin: tuple[int, int]
    A_max: int
    q_max: int


def mu_opt_constant(A_max: int = 10_000, q_max: int = 8) -> MuOptScan:
    """min over A <= A_max, q <= q_max with A > q of sup * q^(2/3) / (A - q)^(5/3)."""

    best = math.inf
    argmin = (0, 0)
    for q in range(1, q_max + 1):
        A = np.arange(q + 1, A_max + 1, dtype=np.int64)
        if A.size == 0:
            continue
        top = int(math.ceil((A_max / q) ** (1.0 / 3.0))) + 1
        mu = np.arange(1, top + 1, dtype=np.int64)[:, None]
        sup = np.max(mu * mu * np.clip(A[None, :] - mu**3 * q, 0, None), axis=0)
        ratio = sup * q ** (2.0 / 3.0) / (A - q).astype(float) ** (5.0 / 3.0)
        k = int(np.argmin(ratio))
        if ratio[k] < best:
            best = float(ratio[k])
            argmin = (int(A[k]), q)
    return MuOptScan(best, argmin, A_max, q_max)


@dataclass(frozen=True)
class OccupationBound:
    n_bar: int
    surrogate: float


def max_occupation(E: float, ell: float, q: int, kappa: float = DEFAULT_KAPPA) -> OccupationBound:
    """Most particles one box can hold in a state of energy below E.

    n_bar = q when E ell^2 q^(2/3) <= kappa; otherwise the largest n whose
    kinetic bound stays below E. The surrogate is kappa^(-3/5) q^(2/5) (E ell^2)^(3/5).
    """

    if E < 0 or not ell > 0:
        raise InvalidArgumentError(f"need E >= 0 and ell > 0, got ({E}, {ell})")
    scaled = E * ell**2 * q ** (2.0 / 3.0) / kappa
    k = max(int(math.ceil(scaled ** 0.6)) - 1, 0)
    while kinetic_lower_bound([q + k + 1], q, ell, kappa) < E:
        k += 1
    while k > 0 and kinetic_lower_bound([q + k], q, ell, kappa) >= E:
        k -= 1
    return OccupationBound(q + k, kappa ** -0.6 * q**0.4 * (E * ell**2) ** 0.6)


# --------------------------------------------------------------------------
# counting


def ground_state_count(n: OccupationVector | Sequence[int], q: int) -> int:
    """prod_j C(q, n_j): spin assignments of an occupation in zero-energy box states."""

    count = 1
    for c in _counts(n):
        count *= math.comb(q, c)
    return count


def ground_state_totals(N_max: int, M: int, q: int) -> list[int]:
    """sum over occupations with sum n_j = N of prod_j C(q, n_j), for every N <= N_max.

    Dynamic programming over boxes: the coefficients of (sum_k C(q,k) x^k)^M.
    """

    if N_max < 0 or M < 1 or q < 1:
        raise InvalidArgumentError(f"need N >= 0, M >= 1, q >= 1; got ({N_max}, {M}, {q})")
    per_box = [math.comb(q, k) for k in range(min(q, N_max) + 1)]
    totals = [1] + [0] * N_max
    for _ in range(M):
        nxt = [0] * (N_max + 1)
        for have, ways in enumerate(totals):
            if not ways:
                continue
            for k, c in enumerate(per_box):
                if have + k > N_max:
                    break
                nxt[have + k] += ways * c
        totals = nxt
    return totals


def ground_state_total(N: int, M: int, q: int) -> int:
    return ground_state_totals(N, M, q)[N]


def entropy_bound(E: float, N: int, rho: float, q: int, c: float = DEFAULT_C_ENTROPY) -> float:
    """ln of the counting bound (c q E^(3/2) / rho)^N."""

    if not E > 0 or not rho > 0:
        raise InvalidArgumentError(f"need E > 0 and rho > 0, got ({E}, {rho})")
    return N * math.log(c * q * E**1.5 / rho)


@dataclass(frozen=True)
class EntropyBoxes:
    log_binomial: float
    log_power: float

    @property
    def holds(self) -> bool:
        return self.log_binomial <= self.log_power * (1 + 1e-12)


def boxes_for(N: int, rho: float, ell: float) -> float:
    """Number of boxes M = N / (rho ell^3) of side ell at density rho."""

    return N / (rho * ell**3)


def entropy_bound_boxes(N: int, M: float, q: int) -> EntropyBoxes:
    """ln C(qM, N) next to N ln(q M e / N)."""

    if N < 1 or not M > 0:
        raise InvalidArgumentError(f"need N >= 1 and M > 0, got ({N}, {M})")
    slots = q * M
    if float(M).is_integer():
        total = math.comb(int(slots), N)
        log_binomial = math.log(total) if total else -math.inf
    elif slots >= N:
        log_binomial = math.lgamma(slots + 1) - math.lgamma(N + 1) - math.lgamma(slots - N + 1)
    else:
        log_binomial = -math.inf
    return EntropyBoxes(log_binomial, N * math.log(slots * math.e / N))


def entropy_tail_log(beta: float, E_c: float, N: int, rho: float, q: int, c: float = DEFAULT_C_ENTROPY) -> float:
    """ln of beta * int_{E_c}^inf (c q E^(3/2)/rho)^N e^(-beta E) dE.

    Bounds the Boltzmann sum over states above E_c whenever the counting
    bound holds there.
    """

    if not beta > 0 or not E_c > 0:
        raise InvalidArgumentError(f"need beta > 0 and E_c > 0, got ({beta}, {E_c})")
    a = 1.5 * N + 1.0
    x = beta * E_c
    upper = float(special.gammaincc(a, x))
    if upper > 0:
        log_gamma = math.log(upper) + math.lgamma(a)
    elif x > a - 1:
        # Gamma(a, x) <= x^(a-1) e^(-x) x / (x - a + 1) for a >= 1
        log_gamma = (a - 1) * math.log(x) - x + math.log(x / (x - a + 1))
    else:
        log_gamma = math.lgamma(a)
    return N * math.log(c * q / rho) + log_gamma - 1.5 * N * math.log(beta)


def calibrate_entropy_constant(
    eigenvalues: np.ndarray,
    weights: np.ndarray,
    N: int,
    rho: float,
    q: int,
    *,
    e_floor: float,
) -> float:
    """Smallest c with count(E) <= (c q E^(3/2)/rho)^N for every E >= e_floor up to the top level."""

    E = np.asarray(eigenvalues, dtype=float)
    w = np.asarray(weights, dtype=float)
    order = np.argsort(E)
    E, w = E[order], w[order]
    if not e_floor > 0:
        raise InvalidArgumentError(f"e_floor must be positive, got {e_floor}")
    cumulative = np.concatenate([[0.0], np.cumsum(w)])
    points = np.concatenate([[e_floor], E[E >= e_floor]])
    counts = cumulative[np.searchsorted(E, points, side="right")]
    return float(np.max(counts ** (1.0 / N) * rho / (q * points**1.5)))


# --------------------------------------------------------------------------
# tail of the Boltzmann sum


@dataclass(frozen=True)
class TailReport:
    bound: float
    threshold: float
    applicable: bool
    true_tail: float | None = None
    complete: bool = True

    @property
    def margin(self) -> float | None:
        return None if self.true_tail is None else self.bound - self.true_tail


def _spectrum_parts(spectrum) -> list[tuple[SpectrumSlice, float]]:
    if spectrum is None:
        return []
    if isinstance(spectrum, SpectrumSlice):
        return [(spectrum, 1.0)]
    return [(spec, float(weight)) for spec, weight in spectrum]


def tail_sum_bound(
    beta: float,
    E_bar: float,
    N: int,
    spectrum: SpectrumSlice | Sequence[tuple[SpectrumSlice, float]] | None = None,
    *,
    c_eta: float = DEFAULT_C_ETA,
) -> TailReport:
    """2 exp(-beta E_bar / 2) next to the true sum of exp(-beta E_j) over E_j >= E_bar.

    A spectrum may be one slice or (slice, degeneracy) pairs; levels count
    with multiplicity times copies times degeneracy. The true tail is marked
    incomplete when E_bar lies above a slice cutoff.
    """

    if not beta > 0 or N < 2:
        raise InvalidArgumentError(f"need beta > 0 and N >= 2, got ({beta}, {N})")
    threshold = c_eta * N * math.log(N) / beta
    bound = 2.0 * math.exp(-0.5 * beta * E_bar)
    parts = _spectrum_parts(spectrum)
    if not parts:
        return TailReport(bound, threshold, E_bar >= threshold)
    terms = []
    complete = True
    for spec, weight in parts:
        mask = spec.eigenvalues >= E_bar
        complete = complete and E_bar <= spec.cutoff
        terms.extend((weight * spec.degeneracies()[mask] * np.exp(-beta * spec.eigenvalues[mask])).tolist())
    return TailReport(bound, threshold, E_bar >= threshold, math.fsum(terms), complete)


@dataclass(frozen=True)
class TailSeries:
    log_margins: tuple[float, ...]
    holds: bool


def tail_series_check(
    beta: float, E_bar: float, N: int, rho: float, q: int, c: float = DEFAULT_C_ENTROPY
) -> TailSeries:
    """Check N_g((k+2) E_bar) e^(-(k+1/2) beta E_bar) <= 2^-k for all k >= 0 on the counting bound.

    Terms are compared in log space. Past k + 2 > 3N / (2 (beta E_bar - ln 2))
    the log margin decreases, so checking up to there decides every k.
    """

    x = beta * E_bar
    if x <= _LN2:
        return TailSeries((), False)
    last = max(int(math.ceil(1.5 * N / (x - _LN2))) - 1, 1)
    margins = tuple(
        entropy_bound((k + 2) * E_bar, N, rho, q, c) - (k + 0.5) * x + k * _LN2 for k in range(last + 1)
    )
    return TailSeries(margins, all(m <= 0 for m in margins))


def tail_cutoff_constant(
    beta: float, N: int, rho: float, q: int, c: float = DEFAULT_C_ENTROPY, *, rtol: float = 1e-6
) -> float:
    """Smallest c_eta for which the series check holds at E_bar = c_eta N ln N / beta."""

    if N < 2:
        raise InvalidArgumentError(f"need N >= 2, got {N}")
    scale = N * math.log(N) / beta

    def holds(c_eta: float) -> bool:
        return tail_series_check(beta, c_eta * scale, N, rho, q, c).holds

    lo, hi = 0.0, 1.0
    while not holds(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            raise InvalidArgumentError("no admissible c_eta below 1e12")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return hi


# --------------------------------------------------------------------------
# delta and the ledger


@dataclass(frozen=True)
class DeltaReport:
    delta: float
    first: float
    second: float
    e_ell2: float
    smallness_ratio: float

    @property
    def e_ell2_ok(self) -> bool:
        return self.e_ell2 >= 1.0

    @property
    def small(self) -> bool:
        return self.smallness_ratio < 1.0

    @property
    def first_dominates(self) -> bool:
        return self.first >= self.second


def delta_estimate(
    E: float, ell: float, N: int, rho: float, q: int, c: float = DEFAULT_C_DELTA
) -> DeltaReport:
    """c [q^(1/5) (E l^2)^(3/10) N^(-1/3) (rho l^3)^(-1/6) + q^(2/5) (E l^2)^(11/10) N^(-7/6) (rho l^3)^(-1/3)]."""

    if not (E > 0 and ell > 0 and rho > 0) or N < 1:
        raise InvalidArgumentError(f"need E, ell, rho > 0 and N >= 1; got ({E}, {ell}, {N}, {rho})")
    x = E * ell**2
    y = rho * ell**3
    first = c * q**0.2 * x**0.3 * N ** (-1.0 / 3.0) * y ** (-1.0 / 6.0)
    second = c * q**0.4 * x**1.1 * N ** (-7.0 / 6.0) * y ** (-1.0 / 3.0)
    limit = min(N ** (10.0 / 9.0) * y ** (5.0 / 9.0), N ** (35.0 / 33.0) * y ** (10.0 / 33.0))
    if x < 1.0:
        logger.info("E ell^2 = %.3g < 1; the delta estimate assumes E ell^2 >= 1", x)
    return DeltaReport(first + second, first, second, x, x / limit)


def minimal_cutoff_scale(E_bar: float, delta: float) -> float:
    """Smallest E0 with E_bar + 2 E0 sqrt(delta) <= E0."""

    if not 0 <= delta < 0.25:
        raise InvalidArgumentError(f"need 0 <= delta < 1/4, got {delta}")
    return E_bar / (1.0 - 2.0 * math.sqrt(delta))


def ell_choice(N: int, rho: float, prefactor: float = DEFAULT_ELL_PREFACTOR) -> float:
    """prefactor * rho^(-1/3) N^(1/63) (ln N)^(-23/21)."""

    if N < 2 or not rho > 0:
        raise InvalidArgumentError(f"need N >= 2 and rho > 0, got ({N}, {rho})")
    return prefactor * rho ** (-1.0 / 3.0) * N ** (1.0 / 63.0) * math.log(N) ** (-23.0 / 21.0)


def headline_deficit(N: int, rho: float, c_eta: float = DEFAULT_C_ETA) -> float:
    """c_eta rho^(2/3) N^(62/63) (ln N)^(23/21)."""

    if N < 2 or not rho > 0:
        raise InvalidArgumentError(f"need N >= 2 and rho > 0, got ({N}, {rho})")
    return c_eta * rho ** (2.0 / 3.0) * N ** (62.0 / 63.0) * math.log(N) ** (23.0 / 21.0)


@dataclass(frozen=True)
class BoundLedger:
    beta: float
    N: int
    rho: float
    q: int
    L: float
    m: int
    ell_ideal: float
    ell: float
    E_bar: float
    delta: DeltaReport
    E0: float | None
    terms: dict[str, float | None]
    F_localized: float
    F_free: float
    F_lower: float | None
    headline_deficit: float
    n_bar: int
    constants: dict[str, float] = field(default_factory=dict)
    blocking: str | None = None

    @property
    def feasible(self) -> bool:
        return self.E0 is not None

    @property
    def per_particle_deficit(self) -> float:
        return self.headline_deficit / self.N

    @property
    def consistent(self) -> bool:
        """F_lower <= F_free and every term finite (feasible ledgers only)."""

        if not self.feasible:
            return False
        values = [v for v in self.terms.values() if v is not None]
        return self.F_lower <= self.F_free and all(math.isfinite(v) for v in values)


def assemble_ledger(
    beta: float,
    N: int,
    rho: float,
    q: int,
    *,
    c_delta: float = DEFAULT_C_DELTA,
    kappa: float = DEFAULT_KAPPA,
    c_eta: float = DEFAULT_C_ETA,
    ell_prefactor: float = DEFAULT_ELL_PREFACTOR,
    method: str = "auto",
) -> BoundLedger:
    """Every term of the lower bound F_g >= F(beta,N,L,ell) - 2 E0 sqrt(delta) - T ln(1 + ...).

    The box side is the ideal ell rounded to L/m; the energy cutoff is
    E_bar = c_eta N ln N / beta and E0 the smallest admissible scale. When
    delta >= 1/4 no E0 exists and the ledger names the larger delta term.
    """

    if not beta > 0 or not rho > 0 or N < 2 or q < 1:
        raise InvalidArgumentError(f"need beta, rho > 0, N >= 2, q >= 1; got ({beta}, {N}, {rho}, {q})")
    L = (N / rho) ** (1.0 / 3.0)
    ideal = ell_choice(N, rho, ell_prefactor)
    m = max(2, int(round(L / ideal)))
    partition = make_partition(L, m)
    ell = partition.ell
    E_bar = c_eta * N * math.log(N) / beta
    delta = delta_estimate(E_bar, ell, N, rho, q, c_delta)
    F_loc = localized_free_energy(beta, N, partition, q, method=method)
    F_free = cube_free_energy(beta, N, L, q, "dirichlet", method=method)
    constants = {"c_delta": c_delta, "kappa": kappa, "c_eta": c_eta, "ell_prefactor": ell_prefactor}
    finite_size = c_eta * N * rho ** (1.0 / 3.0) / ell
    deficit = headline_deficit(N, rho, c_eta)

    if delta.delta >= 0.25:
        blocking = "first" if delta.first >= delta.second else "second"
        logger.warning("delta=%.4g >= 1/4 for N=%d; the %s term blocks the ledger", delta.delta, N, blocking)
        return BoundLedger(
            beta, N, rho, q, L, m, ideal, ell, E_bar, delta, None,
            {"finite_size_defect": finite_size, "norm_penalty": None, "tail_term": None},
            F_loc, F_free, None, deficit, max_occupation(E_bar, ell, q, kappa).n_bar, constants, blocking,
        )

    E0 = minimal_cutoff_scale(E_bar, delta.delta)
    penalty = 2.0 * E0 * math.sqrt(delta.delta)
    exponent = _LN2 - 0.5 * beta * E_bar - beta * penalty + beta * F_loc
    tail = float(np.logaddexp(0.0, exponent)) / beta
    F_lower = F_loc - penalty - tail
    logger.info(
        "ledger N=%d: ell=%.4g (m=%d) delta=%.4g E0=%.4g F_lower=%.6g F_free=%.6g",
        N, ell, m, delta.delta, E0, F_lower, F_free,
    )
    return BoundLedger(
        beta, N, rho, q, L, m, ideal, ell, E_bar, delta, E0,
        {"finite_size_defect": finite_size, "norm_penalty": penalty, "tail_term": tail},
        F_loc, F_free, F_lower, deficit, max_occupation(E0, ell, q, kappa).n_bar, constants,
    )


__all__ = [
    "BoundLedger",
    "DeltaReport",
    "EntropyBoxes",
    "MuOptScan",
    "OccupationBound",
    "SandwichCase",
    "SandwichReport",
    "TailReport",
    "TailSeries",
    "assemble_ledger",
    "boxes_for",
    "calibrate_entropy_constant",
    "calibrate_kappa",
    "delta_estimate",
    "ell_choice",
    "entropy_bound",
    "entropy_bound_boxes",
    "entropy_tail_log",
    "ground_state_count",
    "ground_state_total",
    "ground_state_totals",
    "headline_deficit",
    "kinetic_lower_bound",
    "max_occupation",
    "minimal_cutoff_scale",
    "mu_opt_bound",
    "mu_opt_constant",
    "norm_sandwich_check",
    "random_sandwich_case",
    "sandwich_field",
    "sandwich_origin",
    "tail_cutoff_constant",
]
