"""
One-dimensional Schrödinger evolution on an ``l``-qubit position grid.

Units are chosen so that ``dq = dp = sqrt(2 pi / N)``; the box is
``[-A, A)`` with ``A = sqrt(pi N / 2)`` and ``q_a = a dq - A``. Each step
multiplies by ``exp(-i V(q) dt)``, moves to momentum space with the forward
transform, applies the kinetic phase and transforms back.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from .qft import Direction, Mode, build_qft_plan, plan_transform
from .statevector import MAX_QUBITS

__all__ = [
    "KineticConvention",
    "Backend",
    "WaveGrid",
    "Potential",
    "TrotterConfig",
    "Observables",
    "PULSE_ORACLE_MAX_QUBITS",
    "make_gaussian",
    "kinetic_phase",
    "qft_backend_select",
    "trotter_step",
    "evolve",
    "analytic_free_gaussian",
    "observables",
    "energy",
    "l2_distance",
    "wavefunction_csv",
]

PULSE_ORACLE_MAX_QUBITS = 6


class KineticConvention(enum.Enum):
    CENTERED = "centered"
    PAPER_LITERAL = "paper-literal"


class Backend(enum.Enum):
    REFERENCE = "reference"
    PULSE_ORACLE = "pulse-oracle"


@dataclass(frozen=True)
class WaveGrid:
    """Wavefunction samples ``psi(q_a)``, normalized so ``sum |psi|**2 dq = 1``."""

    l: int
    samples: np.ndarray

    def __post_init__(self):
        if not 1 <= self.l <= MAX_QUBITS:
            raise ValueError(f"grid size l must be in [1, {MAX_QUBITS}], got {self.l}")
        s = np.array(self.samples, dtype=complex)
        if s.shape != (2**self.l,):
            raise ValueError(f"expected {2**self.l} samples, got shape {s.shape}")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return 2**self.l

    @property
    def delta_q(self) -> float:
        return math.sqrt(2 * math.pi / self.n)

    @property
    def delta_p(self) -> float:
        return self.delta_q

    @property
    def half_width(self) -> float:
        return math.sqrt(math.pi * self.n / 2)

    @property
    def q(self) -> np.ndarray:
        return np.arange(self.n) * self.delta_q - self.half_width

    @property
    def p(self) -> np.ndarray:
        """Signed momenta, the upper half of indices mapped to negative values."""
        b = np.arange(self.n)
        return (b - self.n * (b >= self.n // 2)) * self.delta_p

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.delta_q)

    def amplitudes(self) -> np.ndarray:
        """Unit-norm register amplitudes ``psi_a sqrt(dq)``."""
        return self.samples * math.sqrt(self.delta_q)

    def with_amplitudes(self, amps) -> "WaveGrid":
        return WaveGrid(self.l, np.asarray(amps) / math.sqrt(self.delta_q))


class PotentialKind(enum.Enum):
    FREE = "free"
    LINEAR = "linear"
    QUADRATIC = "quadratic"


@dataclass(frozen=True)
class Potential:
    """``free``; ``linear``: ``V = -f q``; ``quadratic``: ``V = m omega**2 q**2 / 2``."""

    kind: PotentialKind = PotentialKind.FREE
    f: float = 0.0
    m: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PotentialKind(self.kind))
        if self.kind is PotentialKind.QUADRATIC and not self.m > 0:
            raise ValueError("mass must be positive")

    @classmethod
    def free(cls) -> "Potential":
        return cls(PotentialKind.FREE)

    @classmethod
    def linear(cls, f: float) -> "Potential":
        return cls(PotentialKind.LINEAR, f=float(f))

    @classmethod
    def harmonic(cls, m: float, omega: float) -> "Potential":
        return cls(PotentialKind.QUADRATIC, m=float(m), omega=float(omega))

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        if self.kind is PotentialKind.LINEAR:
            return -self.f * q
        if self.kind is PotentialKind.QUADRATIC:
            return 0.5 * self.m * self.omega**2 * q**2
        return np.zeros_like(q)


@dataclass(frozen=True)
class TrotterConfig:
    delta_t: float
    total_time: float
    convention: KineticConvention = KineticConvention.CENTERED

    def __post_init__(self):
        object.__setattr__(self, "convention", KineticConvention(self.convention))
        if not self.delta_t > 0:
            raise ValueError("delta_t must be positive")
        if self.total_time < 0:
            raise ValueError("total_time must be nonnegative")
        steps = round(self.total_time / self.delta_t)
        if abs(steps * self.delta_t - self.total_time) > 1e-9 * max(1.0, self.total_time):
            raise ValueError(
                f"total_time {self.total_time} is not a whole number of steps of {self.delta_t}"
            )

    @property
    def steps(self) -> int:
        return round(self.total_time / self.delta_t)

    @classmethod
    def with_steps(cls, total_time: float, steps: int, convention=KineticConvention.CENTERED) -> "TrotterConfig":
        if steps < 1:
            raise ValueError("need at least one step")
        return cls(total_time / steps, total_time, convention)


def _check_inside(l, q0, sigma):
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    a = math.sqrt(math.pi * 2**l / 2)
    if abs(q0) + 4 * sigma >= a:
        raise ValueError(f"packet at {q0} with width {sigma} is clipped by the box [-{a:.6g}, {a:.6g})")


def make_gaussian(l: int, q0: float, p0: float, sigma: float) -> WaveGrid:
    """``psi(q) ~ exp(-(q - q0)**2 / (4 sigma**2) + i p0 q)``, normalized on the grid."""
    _check_inside(l, q0, sigma)
    grid = WaveGrid(l, np.zeros(2**l))
    q = grid.q
    psi = np.exp(-((q - q0) ** 2) / (4 * sigma**2) + 1j * p0 * q)
    return WaveGrid(l, psi / math.sqrt(np.sum(np.abs(psi) ** 2) * grid.delta_q))


def analytic_free_gaussian(t: float, q0: float, p0: float, sigma: float, m: float, l: int) -> WaveGrid:
    """Free-particle evolution of :func:`make_gaussian` at time ``t``, sampled on the grid."""
    _check_inside(l, q0, sigma)
    if not m > 0:
        raise ValueError("mass must be positive")
    grid = WaveGrid(l, np.zeros(2**l))
    x = grid.q
    z = 1 + 1j * t / (2 * m * sigma**2)
    expo = (-((x - q0) ** 2) / (4 * sigma**2) + 1j * p0 * (x - q0) - 1j * p0**2 * t / (2 * m)) / z
    psi = np.exp(expo + 1j * p0 * q0) / np.sqrt(z)
    return WaveGrid(l, psi / math.sqrt(np.sum(np.abs(psi) ** 2) * grid.delta_q))


def kinetic_phase(grid: WaveGrid | int, m: float, delta_t: float, convention=KineticConvention.CENTERED) -> np.ndarray:
    """Phase added to momentum index ``b`` in one step (multiply by ``exp(i phase)``).

    The literal form ``-pi b**2 dt / (m N)`` treats every index as a positive
    momentum; the centered form wraps the upper half to negative momenta.
    """
    if not m > 0:
        raise ValueError("mass must be positive")
    l = grid if isinstance(grid, (int, np.integer)) else grid.l
    n = 2**l
    b = np.arange(n)
    if KineticConvention(convention) is KineticConvention.PAPER_LITERAL:
        return -math.pi * b.astype(float) ** 2 * delta_t / (m * n)
    p = (b - n * (b >= n // 2)) * math.sqrt(2 * math.pi / n)
    return -(p**2) * delta_t / (2 * m)


@functools.lru_cache(maxsize=None)
def _pulse_transforms(l):
    fwd = plan_transform(build_qft_plan(l, Direction.FORWARD, Mode.ORACLE_COMPENSATED))
    inv = plan_transform(build_qft_plan(l, Direction.INVERSE, Mode.ORACLE_COMPENSATED))
    return fwd, inv


def qft_backend_select(backend, l: int):
    """Return ``(forward, inverse)`` callables acting on amplitude arrays.

    ``reference`` uses the FFT; ``pulse-oracle`` uses the unitaries of
    simulated pulse plans, built once per size.
    """
    backend = Backend(backend)
    if backend is Backend.REFERENCE:
        return (lambda v: np.fft.fft(v, norm="ortho"), lambda v: np.fft.ifft(v, norm="ortho"))
    if l > PULSE_ORACLE_MAX_QUBITS:
        raise ValueError(f"pulse-oracle backend supports l <= {PULSE_ORACLE_MAX_QUBITS}, got {l}")
    fwd, inv = _pulse_transforms(l)
    return (lambda v: fwd @ v, lambda v: inv @ v)


def trotter_step(
    grid: WaveGrid,
    potential: Potential,
    m: float,
    delta_t: float,
    convention=KineticConvention.CENTERED,
    backend=Backend.REFERENCE,
) -> WaveGrid:
    """One potential-first step ``QFT^-1 K QFT exp(-i V dt)``."""
    fwd, inv = qft_backend_select(backend, grid.l)
    kin = np.exp(1j * kinetic_phase(grid, m, delta_t, convention))
    amps = grid.amplitudes() * np.exp(-1j * potential(grid.q) * delta_t)
    return grid.with_amplitudes(inv(kin * fwd(amps)))


def evolve(
    grid: WaveGrid,
    potential: Potential,
    m: float,
    config: TrotterConfig,
    backend=Backend.REFERENCE,
    callback=None,
) -> WaveGrid:
    """Apply ``config.steps`` Trotter steps; ``callback(step, t, grid)`` runs after each."""
    fwd, inv = qft_backend_select(backend, grid.l)
    if config.steps == 0:
        return grid
    kin = np.exp(1j * kinetic_phase(grid, m, config.delta_t, config.convention))
    pot = np.exp(-1j * potential(grid.q) * config.delta_t)
    amps = grid.amplitudes()
    for step in range(1, config.steps + 1):
        amps = inv(kin * fwd(pot * amps))
        if callback is not None:
            callback(step, step * config.delta_t, grid.with_amplitudes(amps))
    return grid.with_amplitudes(amps)


@dataclass(frozen=True)
class Observables:
    norm: float
    q_mean: float
    q2_mean: float
    p_mean: float
    p2_mean: float

    @property
    def q_width(self) -> float:
        return math.sqrt(max(0.0, self.q2_mean - self.q_mean**2))

    @property
    def p_width(self) -> float:
        return math.sqrt(max(0.0, self.p2_mean - self.p_mean**2))


def observables(grid: WaveGrid) -> Observables:
    """Norm and first two moments of position and (signed) momentum."""
    rho = np.abs(grid.samples) ** 2 * grid.delta_q
    norm = float(rho.sum())
    q = grid.q
    phi = np.abs(np.fft.fft(grid.amplitudes(), norm="ortho")) ** 2
    p = grid.p
    return Observables(
        norm,
        float(rho @ q / norm),
        float(rho @ q**2 / norm),
        float(phi @ p / phi.sum()),
        float(phi @ p**2 / phi.sum()),
    )


def energy(grid: WaveGrid, potential: Potential, m: float) -> float:
    """``<p**2>/(2m) + <V>``."""
    obs = observables(grid)
    rho = np.abs(grid.samples) ** 2 * grid.delta_q
    return obs.p2_mean / (2 * m) + float(rho @ potential(grid.q)) / obs.norm


def l2_distance(a: WaveGrid, b: WaveGrid) -> float:
    """Continuum ``L2`` norm of ``a - b``."""
    if a.l != b.l:
        raise ValueError("grids differ in size")
    return float(np.sqrt(np.sum(np.abs(a.samples - b.samples) ** 2) * a.delta_q))


def wavefunction_csv(grid: WaveGrid, t: float) -> str:
    """CSV text with a ``#`` header line carrying ``l``, ``delta_q`` and ``t``."""
    lines = [
        f"# l={grid.l} delta_q={grid.delta_q:.17g} t={float(t):.17g}",
        "index,q,re,im,prob",
    ]
    prob = np.abs(grid.samples) ** 2 * grid.delta_q
    for a, (q, z, pr) in enumerate(zip(grid.q, grid.samples, prob)):
        lines.append(f"{a},{q:.17g},{z.real:.17g},{z.imag:.17g},{pr:.17g}")
    return "\n".join(lines) + "\n"
