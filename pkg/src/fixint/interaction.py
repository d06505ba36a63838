"""
Fixed diagonal pair interactions and the phase polynomials they generate.

A diagonal Hamiltonian on ``l`` qubits with at most pairwise terms is a
polynomial in the bits, ``constant + sum_j lin_j x_j + sum_{j>k} quad_jk x_j x_k``.
Evolving a basis state ``|a>`` for time ``t`` multiplies it by
``exp(-i t Phi(a))``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

__all__ = [
    "DecayKind",
    "DecayLaw",
    "PairForm",
    "CouplingModel",
    "PhasePolynomial",
    "pair_coefficient",
    "pair_polynomial",
    "pair_quadratic_rate",
    "hamiltonian_polynomial",
    "evaluate",
    "fit_phase_polynomial",
    "canonical_qft_model",
    "is_canonical_qft_model",
    "model_to_config",
    "model_from_config",
]

DEGENERACY_TOL = 1e-12


class DecayKind(enum.Enum):
    YUKAWA2 = "yukawa2"
    YUKAWA = "yukawa"
    POWER = "power"
    TABLE = "table"


@dataclass(frozen=True)
class DecayLaw:
    """Distance dependence of the pair coupling.

    ``yukawa2``: ``rho0 * 2**-r / r``; ``yukawa``: ``rho0 * exp(-b r) / r``;
    ``power``: ``rho0 / r**alpha``; ``table``: ``rho0 * table[(p, q)]`` keyed by
    the qubit pair with ``p > q``.
    """

    kind: DecayKind = DecayKind.YUKAWA2
    rho0: float = math.pi
    screening: float = 1.0
    alpha: float = 0.0
    table: Mapping[tuple[int, int], float] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", DecayKind(self.kind))
        if self.kind is DecayKind.YUKAWA and self.screening <= 0:
            raise ValueError("yukawa screening constant must be positive")
        if self.kind is DecayKind.POWER and self.alpha < 0:
            raise ValueError("power-law exponent must be nonnegative")
        table = {(max(p, q), min(p, q)): float(v) for (p, q), v in dict(self.table).items()}
        if not all(math.isfinite(v) for v in table.values()):
            raise ValueError("decay table entries must be finite")
        object.__setattr__(self, "table", table)

    def strength(self, r: float, pair: tuple[int, int] | None = None) -> float:
        if self.kind is DecayKind.YUKAWA2:
            return self.rho0 * 2.0 ** (-r) / r
        if self.kind is DecayKind.YUKAWA:
            return self.rho0 * math.exp(-self.screening * r) / r
        if self.kind is DecayKind.POWER:
            return self.rho0 / r**self.alpha
        p, q = pair
        return self.rho0 * self.table.get((max(p, q), min(p, q)), 0.0)


@dataclass(frozen=True)
class PairForm:
    """Diagonal of the 4x4 pair Hamiltonian.

    Form A is ``diag(0, 0, 0, rho)``; form B is ``diag(rho1, rho2, rho3, rho4)``
    in the basis ``|x_p x_q>`` = 00, 01, 10, 11 with ``p > q``. Both are
    multiplied by the decay strength of the pair.
    """

    kind: str = "A"
    rho: float = 1.0
    rhos: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 1.0)

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if kind == "A":
            object.__setattr__(self, "rhos", (0.0, 0.0, 0.0, float(self.rho)))
        elif kind == "B":
            rhos = tuple(float(r) for r in self.rhos)
            if len(rhos) != 4:
                raise ValueError("form B needs four diagonal entries")
            if abs(rhos[0] + rhos[3] - rhos[1] - rhos[2]) <= DEGENERACY_TOL:
                raise ValueError("degenerate form B: rho1 + rho4 == rho2 + rho3")
            object.__setattr__(self, "rhos", rhos)
        else:
            raise ValueError(f"unknown pair form {self.kind!r}")

    @classmethod
    def form_b(cls, rho1, rho2, rho3, rho4) -> "PairForm":
        return cls("B", rhos=(rho1, rho2, rho3, rho4))

    @property
    def quadratic_weight(self) -> float:
        r1, r2, r3, r4 = self.rhos
        return r1 - r2 - r3 + r4


@dataclass(frozen=True)
class CouplingModel:
    num_qubits: int
    form: PairForm = field(default_factory=PairForm)
    decay: DecayLaw = field(default_factory=DecayLaw)
    positions: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("coupling model needs at least one qubit")
        pos = tuple(range(self.num_qubits)) if self.positions is None else tuple(map(float, self.positions))
        if len(pos) != self.num_qubits:
            raise ValueError("one position per qubit is required")
        gaps = np.diff(pos)
        if np.any(gaps < 1.0):
            raise ValueError("positions must increase with spacing at least 1")
        object.__setattr__(self, "positions", tuple(float(x) for x in pos))

    def distance(self, p: int, q: int) -> float:
        return abs(self.positions[q] - self.positions[p])

    def pairs(self):
        for p in range(self.num_qubits):
            for q in range(p):
                yield p, q


class PhasePolynomial:
    """``constant + sum linear[j] x_j + sum quadratic[(j, k)] x_j x_k`` with ``j > k``."""

    __slots__ = ("num_qubits", "constant", "linear", "quadratic")

    def __init__(self, num_qubits: int, constant: float = 0.0, linear=None, quadratic=None):
        self.num_qubits = int(num_qubits)
        self.constant = float(constant)
        lin = np.zeros(self.num_qubits) if linear is None else np.array(linear, dtype=float)
        if lin.shape != (self.num_qubits,):
            raise ValueError("linear part needs one coefficient per qubit")
        lin.setflags(write=False)
        self.linear = lin
        quad = {}
        for (j, k), c in (quadratic or {}).items():
            if j == k or not (0 <= j < self.num_qubits and 0 <= k < self.num_qubits):
                raise ValueError(f"bad quadratic key {(j, k)}")
            key = (max(j, k), min(j, k))
            quad[key] = quad.get(key, 0.0) + float(c)
        self.quadratic = {key: c for key, c in sorted(quad.items()) if c != 0.0}

    def __repr__(self):
        return (
            f"PhasePolynomial({self.num_qubits}, constant={self.constant!r}, "
            f"linear={self.linear.tolist()!r}, quadratic={self.quadratic!r})"
        )

    def _check(self, other):
        if not isinstance(other, PhasePolynomial) or other.num_qubits != self.num_qubits:
            raise ValueError("phase polynomials must act on the same number of qubits")

    def __add__(self, other):
        self._check(other)
        quad = dict(self.quadratic)
        for key, c in other.quadratic.items():
            quad[key] = quad.get(key, 0.0) + c
        return PhasePolynomial(self.num_qubits, self.constant + other.constant, self.linear + other.linear, quad)

    def __mul__(self, scale):
        scale = float(scale)
        return PhasePolynomial(
            self.num_qubits,
            self.constant * scale,
            self.linear * scale,
            {key: c * scale for key, c in self.quadratic.items()},
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self, tol: float = 0.0) -> bool:
        return (
            abs(self.constant) <= tol
            and np.all(np.abs(self.linear) <= tol)
            and all(abs(c) <= tol for c in self.quadratic.values())
        )

    def allclose(self, other, atol: float = 1e-12) -> bool:
        return (self - other).is_zero(atol)

    def quadratic_part(self) -> "PhasePolynomial":
        return PhasePolynomial(self.num_qubits, quadratic=self.quadratic)

    def affine_part(self) -> "PhasePolynomial":
        return PhasePolynomial(self.num_qubits, self.constant, self.linear)

    def evaluate(self, basis: int) -> float:
        bits = [(basis >> j) & 1 for j in range(self.num_qubits)]
        value = self.constant
        for j, b in enumerate(bits):
            if b:
                value += self.linear[j]
        for (j, k), c in self.quadratic.items():
            if bits[j] and bits[k]:
                value += c
        return value

    def table(self) -> np.ndarray:
        """Values on every basis index ``0 .. 2**l - 1``."""
        idx = np.arange(2**self.num_qubits)
        bits = [((idx >> j) & 1).astype(float) for j in range(self.num_qubits)]
        out = np.full(idx.shape, self.constant)
        for j in range(self.num_qubits):
            if self.linear[j] != 0.0:
                out += self.linear[j] * bits[j]
        for (j, k), c in self.quadratic.items():
            out += c * bits[j] * bits[k]
        return out

    def flip(self, mask: int) -> "PhasePolynomial":
        """Substitute ``x_q -> 1 - x_q`` for every bit set in ``mask``."""
        l = self.num_qubits
        f = [(mask >> q) & 1 for q in range(l)]
        const = self.constant
        lin = np.zeros(l)
        quad = {}
        for q in range(l):
            c = self.linear[q]
            if f[q]:
                const += c
                lin[q] -= c
            else:
                lin[q] += c
        for (j, k), c in self.quadratic.items():
            # c * (s_j + t_j x_j)(s_k + t_k x_k) with s=1,t=-1 when flipped
            sj, tj = (1.0, -1.0) if f[j] else (0.0, 1.0)
            sk, tk = (1.0, -1.0) if f[k] else (0.0, 1.0)
            const += c * sj * sk
            lin[j] += c * tj * sk
            lin[k] += c * sj * tk
            quad[(j, k)] = c * tj * tk
        return PhasePolynomial(l, const, lin, quad)

    def relabel(self, mapping, num_qubits: int | None = None) -> "PhasePolynomial":
        """Rename bit ``j`` to ``mapping[j]``."""
        n = self.num_qubits if num_qubits is None else num_qubits
        lin = np.zeros(n)
        for j, c in enumerate(self.linear):
            lin[mapping[j]] += c
        quad = {(mapping[j], mapping[k]): c for (j, k), c in self.quadratic.items()}
        return PhasePolynomial(n, self.constant, lin, quad)


def evaluate(poly: PhasePolynomial, basis: int) -> float:
    return poly.evaluate(basis)


def fit_phase_polynomial(values, num_qubits: int) -> tuple[PhasePolynomial, float]:
    """Recover the pseudo-Boolean expansion of a table of basis phases.

    Returns the constant/linear/quadratic part and the largest magnitude among
    the discarded higher-order coefficients.
    """
    coeffs = np.array(values, dtype=float)
    n = 2**num_qubits
    if coeffs.shape != (n,):
        raise ValueError("need one value per basis index")
    # Moebius transform over subsets of bits
    for j in range(num_qubits):
        step = 1 << j
        view = coeffs.reshape(-1, 2, step)
        view[:, 1, :] -= view[:, 0, :]
    lin = np.array([coeffs[1 << j] for j in range(num_qubits)])
    quad = {(j, k): coeffs[(1 << j) | (1 << k)] for j in range(num_qubits) for k in range(j)}
    order = np.array([bin(s).count("1") for s in range(n)])
    higher = np.abs(coeffs[order > 2])
    residual = float(higher.max()) if higher.size else 0.0
    return PhasePolynomial(num_qubits, coeffs[0], lin, quad), residual


def pair_coefficient(model: CouplingModel, p: int, q: int) -> float:
    """Decay strength ``d_pq`` of the pair at its distance (includes ``rho0``)."""
    l = model.num_qubits
    if p == q:
        raise ValueError("pair coefficient needs two distinct qubits")
    if not (0 <= p < l and 0 <= q < l):
        raise ValueError(f"pair {(p, q)} out of range for {l} qubits")
    return model.decay.strength(model.distance(p, q), (p, q))


def pair_polynomial(model: CouplingModel, p: int, q: int) -> tuple[float, float, float, float]:
    """Per-unit-time phase of the pair as ``(c0, c_p, c_q, c_pq)``.

    The pair Hamiltonian diagonal is expanded as
    ``rho1 (1-x_p)(1-x_q) + rho2 (1-x_p) x_q + rho3 x_p (1-x_q) + rho4 x_p x_q``
    with ``p`` taken as the higher qubit index.
    """
    hi, lo = max(p, q), min(p, q)
    d = pair_coefficient(model, hi, lo)
    r1, r2, r3, r4 = (d * r for r in model.form.rhos)
    c0 = r1
    c_hi = r3 - r1
    c_lo = r2 - r1
    c_pq = r1 - r2 - r3 + r4
    if p == hi:
        return c0, c_hi, c_lo, c_pq
    return c0, c_lo, c_hi, c_pq


def pair_quadratic_rate(model: CouplingModel, p: int, q: int) -> float:
    return pair_polynomial(model, p, q)[3]


def hamiltonian_polynomial(model: CouplingModel) -> PhasePolynomial:
    l = model.num_qubits
    const = 0.0
    lin = np.zeros(l)
    quad = {}
    for p, q in model.pairs():
        c0, cp, cq, cpq = pair_polynomial(model, p, q)
        const += c0
        lin[p] += cp
        lin[q] += cq
        quad[(p, q)] = cpq
    return PhasePolynomial(l, const, lin, quad)


def canonical_qft_model(l: int) -> CouplingModel:
    """Form A with ``d(r) = pi * 2**-r / r`` on unit spacing."""
    return CouplingModel(l, PairForm("A", rho=1.0), DecayLaw(DecayKind.YUKAWA2, rho0=math.pi))


def is_canonical_qft_model(model: CouplingModel, tol: float = 1e-12) -> bool:
    target = PhasePolynomial(
        model.num_qubits,
        quadratic={(j, k): math.pi * 2.0 ** (k - j) / (j - k) for j, k in model.pairs()},
    )
    return hamiltonian_polynomial(model).allclose(target, tol)


def model_to_config(model: CouplingModel) -> dict[str, str]:
    cfg = {"l": str(model.num_qubits), "form": model.form.kind}
    if model.form.kind == "A":
        cfg["rho"] = repr(model.form.rho)
    else:
        for i, r in enumerate(model.form.rhos, start=1):
            cfg[f"rho{i}"] = repr(r)
    cfg["decay"] = model.decay.kind.value
    cfg["rho0"] = repr(model.decay.rho0)
    if model.decay.kind is DecayKind.YUKAWA:
        cfg["screening"] = repr(model.decay.screening)
    if model.decay.kind is DecayKind.POWER:
        cfg["alpha"] = repr(model.decay.alpha)
    if model.decay.kind is DecayKind.TABLE:
        cfg["table"] = ",".join(f"{p}:{q}:{v!r}" for (p, q), v in sorted(model.decay.table.items()))
    cfg["positions"] = ",".join(repr(x) for x in model.positions)
    return cfg


def model_from_config(cfg: Mapping[str, str], num_qubits: int | None = None) -> CouplingModel:
    """Build a model from flat ``key = value`` strings (keys as in :func:`model_to_config`)."""
    l = int(cfg["l"]) if num_qubits is None else num_qubits
    kind = cfg.get("form", "A").upper()
    if kind == "A":
        form = PairForm("A", rho=float(cfg.get("rho", 1.0)))
    else:
        form = PairForm.form_b(*(float(cfg[f"rho{i}"]) for i in range(1, 5)))
    table = {}
    if cfg.get("table"):
        for item in str(cfg["table"]).split(","):
            p, q, v = item.split(":")
            table[(int(p), int(q))] = float(v)
    decay = DecayLaw(
        DecayKind(cfg.get("decay", "yukawa2")),
        rho0=float(cfg.get("rho0", math.pi)),
        screening=float(cfg.get("screening", 1.0)),
        alpha=float(cfg.get("alpha", 0.0)),
        table=table,
    )
    positions = None
    if cfg.get("positions"):
        positions = tuple(float(x) for x in str(cfg["positions"]).split(","))
    return CouplingModel(l, form, decay, positions)
