"""Non-interacting fermions: cube spectra, canonical and Legendre free energies, f(beta, rho)."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from mpmath import mp
from scipy import integrate, optimize, signal, special

from config import (
    CANONICAL_DPS,
    CANONICAL_MAX_N,
    MAX_SPECTRUM_INDEX,
    QUAD_RTOL,
    SUBSET_ENUMERATION_MAX_STATES,
    TRUNCATION_RTOL,
)

from .errors import (
    InfeasibleOccupationError,
    InvalidArgumentError,
    PrecisionLossError,
    QuadratureError,
    SpectrumTooLargeError,
    TruncationError,
)
from .geometry import BoxPartition, make_partition

logger = logging.getLogger(__name__)

Boundary = Literal["dirichlet", "neumann"]

# Subset enumeration refuses more than this many Slater determinants.
_MAX_SUBSETS = 5_000_000
# Occupations beyond this many temperatures above mu are treated as zero.
_TAIL_WIDTH = 60.0


@dataclass(frozen=True, eq=False)
class SpectrumSlice:
    """Sorted one-body levels below ``cutoff`` with their multiplicities.

    ``copies`` identical domains share the slice, so the degeneracy of a level
    is ``multiplicity * copies``. ``kind`` tells what produced the levels
    ("cube", "radial", "pair-symmetric", ...).
    """

    eigenvalues: np.ndarray
    multiplicities: np.ndarray
    bc: str
    side: float
    cutoff: float
    copies: int = 1
    kind: str = "cube"
    residuals: np.ndarray | None = None
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = np.asarray(self.eigenvalues, dtype=float)
        mults = np.asarray(self.multiplicities, dtype=np.int64)
        if values.shape != mults.shape:
            raise InvalidArgumentError("eigenvalues and multiplicities must have equal length")
        if values.size and (np.any(np.diff(values) < 0) or values[-1] > self.cutoff):
            raise InvalidArgumentError("spectrum slice must be sorted and below its cutoff")
        if np.any(mults < 1) or self.copies < 1:
            raise InvalidArgumentError("multiplicities and copies must be positive")
        object.__setattr__(self, "eigenvalues", values)
        object.__setattr__(self, "multiplicities", mults)

    def __len__(self) -> int:
        return int(self.eigenvalues.size)

    def degeneracies(self) -> np.ndarray:
        return self.multiplicities.astype(float) * self.copies

    @property
    def state_count(self) -> int:
        return int(self.multiplicities.sum()) * self.copies

    def count_below(self, energy: float) -> int:
        mask = self.eigenvalues < energy
        return int(self.multiplicities[mask].sum()) * self.copies


@dataclass(frozen=True)
class ThermoPoint:
    beta: float
    rho: float
    q: int
    mu: float
    f: float
    pressure: float


@dataclass(frozen=True)
class DefectFit:
    ms: tuple[int, ...]
    ells: tuple[float, ...]
    defects: tuple[float, ...]
    ratios: tuple[float, ...]
    c_eta: float


def _check_thermo(beta: float, q: int) -> None:
    if not beta > 0:
        raise InvalidArgumentError(f"beta must be positive, got {beta}")
    if q < 1:
        raise InvalidArgumentError(f"q must be >= 1, got {q}")


def cube_spectrum(
    L: float,
    bc: Boundary,
    cutoff: float,
    copies: int = 1,
    *,
    max_index: int = MAX_SPECTRUM_INDEX,
) -> SpectrumSlice:
    """Laplacian levels (pi/L)^2 (k1^2 + k2^2 + k3^2) of a cube, complete up to ``cutoff``."""

    if not L > 0:
        raise InvalidArgumentError(f"L must be positive, got {L}")
    if not cutoff > 0:
        raise InvalidArgumentError(f"cutoff must be positive, got {cutoff}")
    if bc not in ("dirichlet", "neumann"):
        raise InvalidArgumentError(f"unknown boundary condition: {bc}")
    unit = (math.pi / L) ** 2
    n_max = int(math.floor(cutoff / unit * (1 + 1e-12)))
    if n_max > max_index:
        raise SpectrumTooLargeError(
            f"cutoff {cutoff} needs level index {n_max} > limit {max_index}; lower the cutoff"
        )
    k_min = 1 if bc == "dirichlet" else 0
    squares = np.zeros(n_max + 1, dtype=np.int64)
    k = np.arange(k_min, math.isqrt(n_max) + 1)
    squares[k * k] = 1
    pairs = signal.convolve(squares, squares)[: n_max + 1]
    counts = signal.convolve(pairs, squares)[: n_max + 1]
    levels = np.flatnonzero(counts)
    logger.debug("cube spectrum L=%s bc=%s: %d levels up to index %d", L, bc, levels.size, n_max)
    return SpectrumSlice(
        eigenvalues=unit * levels,
        multiplicities=counts[levels],
        bc=bc,
        side=float(L),
        cutoff=float(cutoff),
        copies=copies,
    )


def truncation_estimate(spec: SpectrumSlice, q: int, beta: float) -> float:
    """Weyl-law estimate of q * sum of exp(-beta eps) over the levels above the cutoff."""

    _check_thermo(beta, q)
    if spec.kind != "cube":
        raise InvalidArgumentError("truncation estimate is defined for cube spectra only")
    weyl = spec.side**3 / (4 * math.pi**2) * special.gamma(1.5) / beta**1.5
    return q * spec.copies * weyl * float(special.gammaincc(1.5, beta * spec.cutoff))


def _report_truncation(spec: SpectrumSlice, q: int, beta: float) -> None:
    if spec.kind != "cube" or not len(spec):
        return
    tail = truncation_estimate(spec, q, beta)
    z1 = q * float(np.sum(spec.degeneracies() * np.exp(-beta * (spec.eigenvalues - spec.eigenvalues[0]))))
    relative = tail * math.exp(beta * spec.eigenvalues[0]) / z1 if z1 > 0 else math.inf
    if relative > TRUNCATION_RTOL:
        logger.warning("spectrum cutoff %.4g leaves relative one-body tail %.3g", spec.cutoff, relative)
    else:
        logger.debug("spectrum cutoff %.4g: relative one-body tail %.3g", spec.cutoff, relative)


def _expanded_levels(spec: SpectrumSlice, q: int, limit: int | None = None) -> np.ndarray:
    """One entry per one-body state (spin included), optionally only the lowest ``limit``."""

    degeneracy = spec.multiplicities * spec.copies * q
    if limit is None:
        return np.repeat(spec.eigenvalues, degeneracy)
    used = int(np.searchsorted(np.cumsum(degeneracy), limit)) + 1
    return np.repeat(spec.eigenvalues[:used], degeneracy[:used])[:limit]


def _check_filling(spec: SpectrumSlice, q: int, N: int) -> int:
    if N < 0:
        raise InvalidArgumentError(f"N must be non-negative, got {N}")
    states = q * spec.state_count
    if N > states:
        raise InfeasibleOccupationError(f"{N} fermions do not fit into {states} one-body states")
    return states


def slater_free_energy(spec: SpectrumSlice, q: int, N: int, beta: float) -> float:
    """-T ln Z_N by summing over every N-subset of the one-body states."""

    _check_thermo(beta, q)
    states = _check_filling(spec, q, N)
    if N == 0:
        return 0.0
    if math.comb(states, N) > _MAX_SUBSETS:
        raise InvalidArgumentError(f"C({states}, {N}) Slater determinants is too many to enumerate")
    levels = _expanded_levels(spec, q).tolist()
    ground = math.fsum(levels[:N])
    weights = (
        math.exp(-beta * (math.fsum(subset) - ground)) for subset in itertools.combinations(levels, N)
    )
    return ground - math.log(math.fsum(weights)) / beta


def _required_dps(spec: SpectrumSlice, q: int, N: int, beta: float, dps: int) -> int:
    # The alternating sum cancels roughly beta * (E_ground - N eps_0) / ln 10 digits.
    levels = _expanded_levels(spec, q, N)
    spread = beta * float(np.sum(levels - levels[0]))
    return max(dps, int(spread / math.log(10)) + 30)


def _canonical_recursion(spec: SpectrumSlice, q: int, N: int, beta: float, dps: int) -> float:
    shift = float(spec.eigenvalues[0])
    gaps = beta * (spec.eigenvalues - shift)
    degeneracy = [int(d) for d in spec.multiplicities * spec.copies * q]
    with mp.workdps(dps):
        cut = (dps + 20) * math.log(10)
        base = [mp.exp(-mp.mpf(float(x))) for x in gaps]
        powers = list(base)
        z = []
        for k in range(1, N + 1):
            active = [d * w for d, w, x in zip(degeneracy, powers, gaps) if k * x < cut]
            z.append(mp.fsum(active))
            powers = [w * b for w, b in zip(powers, base)]

        Z = [mp.mpf(1)]
        lost = 0.0
        for n in range(1, N + 1):
            terms = [z[k - 1] * Z[n - k] for k in range(1, n + 1)]
            total = mp.fsum((-1) ** (k - 1) * t for k, t in enumerate(terms, start=1))
            if total <= 0:
                raise PrecisionLossError(f"canonical recursion lost all digits at n={n} (dps={dps})")
            lost = max(lost, float(mp.log10(max(terms) / total)))
            Z.append(total / n)
        if lost > dps - 20:
            raise PrecisionLossError(f"canonical recursion cancelled {lost:.1f} of {dps} digits")
        logger.debug("canonical recursion N=%d: %.1f digits cancelled at dps=%d", N, lost, dps)
        return N * shift - float(mp.log(Z[N])) / beta


def canonical_free_energy(
    spec: SpectrumSlice,
    q: int,
    N: int,
    beta: float,
    *,
    dps: int = CANONICAL_DPS,
) -> float:
    """F = -T ln Z_N from the alternating recursion over power sums z_k.

    Levels are shifted by the lowest one before exponentiating; the working
    precision grows with the expected cancellation and is doubled once more
    if the monitor still reports a loss. Small nearly frozen problems then
    fall back to subset enumeration.
    """

    _check_thermo(beta, q)
    states = _check_filling(spec, q, N)
    if N == 0:
        return 0.0
    _report_truncation(spec, q, beta)
    working = _required_dps(spec, q, N, beta, dps)
    for attempt in range(2):
        try:
            return _canonical_recursion(spec, q, N, beta, working)
        except PrecisionLossError as exc:
            logger.info("%s; retrying", exc)
            working *= 2
    if states <= SUBSET_ENUMERATION_MAX_STATES:
        logger.info("falling back to subset enumeration over %d states", states)
        return slater_free_energy(spec, q, N, beta)
    raise PrecisionLossError(f"canonical recursion unstable even at dps={working}")


def grand_canonical_free_energy(spec: SpectrumSlice, q: int, N: int, beta: float) -> float:
    """Legendre lower bound sup_mu [mu N - T ln Xi(mu)] on the canonical free energy."""

    _check_thermo(beta, q)
    states = _check_filling(spec, q, N)
    if N == 0:
        return 0.0
    levels = spec.eigenvalues
    weights = spec.degeneracies() * q
    if N == states:
        return math.fsum(weights * levels)
    _report_truncation(spec, q, beta)
    scaled = beta * levels

    def excess(x: float) -> float:
        return float(np.sum(weights * special.expit(x - scaled))) - N

    lo = scaled[0] + math.log(N / (2.0 * states))
    step = 1.0
    hi = scaled[0] + step
    while excess(hi) <= 0:
        step *= 2
        hi = scaled[0] + step
        if hi > scaled[-1] + 50:
            break
    x_star = optimize.brentq(excess, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
    if spec.kind == "cube" and beta * spec.cutoff - x_star < 20:
        raise TruncationError(
            f"chemical potential {x_star / beta:.4g} too close to the spectrum cutoff {spec.cutoff:.4g}"
        )
    mu = x_star / beta
    log_xi = math.fsum(weights * np.logaddexp(0.0, x_star - scaled))
    return mu * N - log_xi / beta


def fermi_energy(rho: float, q: int) -> float:
    return (6 * math.pi**2 * rho / q) ** (2.0 / 3.0)


def zero_temperature_density(rho: float, q: int) -> float:
    """f(infinity, rho) = 3/5 (6 pi^2 / q)^(2/3) rho^(5/3)."""

    return 0.6 * fermi_energy(rho, q) * rho


def _radial_quad(integrand, mu: float, beta: float) -> float:
    edge = math.sqrt(max(mu, 0.0))
    tail = math.sqrt(max(mu, 0.0) + _TAIL_WIDTH / beta)
    total = 0.0
    for lower, upper in ((0.0, edge), (edge, tail), (tail, math.inf)):
        if upper <= lower:
            continue
        value, error = integrate.quad(integrand, lower, upper, epsabs=0.0, epsrel=QUAD_RTOL, limit=200)
        if error > 1e3 * QUAD_RTOL * abs(value) + 1e-300:
            raise QuadratureError(f"radial integral on [{lower}, {upper}] did not converge: err={error:.3g}")
        total += value
    return total


def thermodynamic_pressure(beta: float, mu: float, q: int) -> float:
    """P(mu) = q T / (2 pi^2) * integral of p^2 ln(1 + exp(-beta (p^2 - mu)))."""

    _check_thermo(beta, q)
    integral = _radial_quad(lambda p: p * p * np.logaddexp(0.0, beta * (mu - p * p)), mu, beta)
    return q * integral / (2 * math.pi**2 * beta)


def density(beta: float, mu: float, q: int) -> float:
    """n(mu) = dP/dmu = q / (2 pi^2) * integral of p^2 / (1 + exp(beta (p^2 - mu)))."""

    _check_thermo(beta, q)
    integral = _radial_quad(lambda p: p * p * special.expit(beta * (mu - p * p)), mu, beta)
    return q * integral / (2 * math.pi**2)


def f_density(beta: float, rho: float, q: int) -> ThermoPoint:
    """Free energy density of the ideal Fermi gas, sup_mu [mu rho - P(mu)]."""

    _check_thermo(beta, q)
    if not rho > 0:
        raise InvalidArgumentError(f"rho must be positive, got {rho}")
    e_fermi = fermi_energy(rho, q)
    scale = max(e_fermi, 1.0 / beta)

    def excess(mu: float) -> float:
        return density(beta, mu, q) - rho

    hi, step = e_fermi, scale
    while excess(hi) < 0:
        hi += step
        step *= 2
    lo, step = e_fermi - 1.0 / beta, scale
    while excess(lo) >= 0:
        lo -= step
        step *= 2
    try:
        mu = optimize.brentq(excess, lo, hi, xtol=1e-14 * scale, rtol=4 * np.finfo(float).eps, maxiter=500)
    except RuntimeError as exc:
        raise QuadratureError(f"chemical potential search failed for beta={beta}, rho={rho}") from exc
    pressure = thermodynamic_pressure(beta, mu, q)
    return ThermoPoint(beta=beta, rho=rho, q=q, mu=mu, f=mu * rho - pressure, pressure=pressure)


def auto_cutoff(side: float, copies: int, q: int, N: int, beta: float) -> float:
    """Cutoff 40 temperatures above a Weyl-law Fermi energy for N particles in ``copies`` cubes."""

    volume = copies * side**3
    return 1.5 * fermi_energy(max(N, 1) / volume, q) + 40.0 / beta


def _free_energy_on(spec: SpectrumSlice, q: int, N: int, beta: float, method: str) -> float:
    if method == "auto":
        method = "canonical" if N <= CANONICAL_MAX_N else "legendre"
    if method == "canonical":
        return canonical_free_energy(spec, q, N, beta)
    if method == "legendre":
        return grand_canonical_free_energy(spec, q, N, beta)
    raise InvalidArgumentError(f"unknown free-energy method: {method}")


def cube_free_energy(
    beta: float,
    N: int,
    L: float,
    q: int,
    bc: Boundary = "dirichlet",
    *,
    copies: int = 1,
    cutoff: float | None = None,
    method: str = "auto",
) -> float:
    """Free energy of N fermions in ``copies`` disjoint cubes of side L.

    Without an explicit cutoff the slice is grown until it holds more than N
    states and the Weyl tail above it is negligible.
    """

    _check_thermo(beta, q)
    cut = cutoff if cutoff is not None else auto_cutoff(L, copies, q, N, beta)
    while True:
        spec = cube_spectrum(L, bc, cut, copies)
        enough = q * spec.state_count > N
        if cutoff is not None or (enough and _tail_ok(spec, q, beta)):
            break
        cut *= 2
    return _free_energy_on(spec, q, N, beta, method)


def _tail_ok(spec: SpectrumSlice, q: int, beta: float) -> bool:
    if not len(spec):
        return False
    z1 = q * float(np.sum(spec.degeneracies() * np.exp(-beta * (spec.eigenvalues - spec.eigenvalues[0]))))
    tail = truncation_estimate(spec, q, beta) * math.exp(beta * spec.eigenvalues[0])
    return tail <= TRUNCATION_RTOL * z1


def localized_free_energy(
    beta: float,
    N: int,
    p: BoxPartition,
    q: int,
    *,
    cutoff: float | None = None,
    method: str = "auto",
) -> float:
    """F(beta, N, L, ell): N fermions in the M Neumann boxes of ``p``."""

    return cube_free_energy(beta, N, p.ell, q, "neumann", copies=p.M, cutoff=cutoff, method=method)


def fit_defect_constant(
    beta: float,
    N: int,
    L: float,
    q: int,
    ms: Sequence[int],
    outer_bc: Boundary = "dirichlet",
    method: str = "auto",
) -> DefectFit:
    """Empirical c_eta with F(beta,N,L) - F(beta,N,L,ell) <= c_eta N rho^(1/3) / ell."""

    rho = N / L**3
    reference = cube_free_energy(beta, N, L, q, outer_bc, method=method)
    ells, defects, ratios = [], [], []
    for m in ms:
        partition = make_partition(L, m)
        defect = reference - localized_free_energy(beta, N, partition, q, method=method)
        ells.append(partition.ell)
        defects.append(defect)
        ratios.append(defect * partition.ell / (N * rho ** (1.0 / 3.0)))
    return DefectFit(tuple(ms), tuple(ells), tuple(defects), tuple(ratios), max(ratios))


__all__ = [
    "Boundary",
    "DefectFit",
    "SpectrumSlice",
    "ThermoPoint",
    "auto_cutoff",
    "canonical_free_energy",
    "cube_free_energy",
    "cube_spectrum",
    "density",
    "f_density",
    "fermi_energy",
    "fit_defect_constant",
    "grand_canonical_free_energy",
    "localized_free_energy",
    "slater_free_energy",
    "thermodynamic_pressure",
    "truncation_estimate",
    "zero_temperature_density",
]
