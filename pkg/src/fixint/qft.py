"""
Fourier transforms built from Hadamard pulses over a fixed interaction.

Wires are numbered bottom to top: wire ``w`` is qubit ``l - 1 - w``, carries
the reversed input bit ``a'_w = a_{l-1-w}`` before its Hadamard and the
output bit ``b_w`` after it. Reading the register after a plan therefore
gives ``b`` with its bits reversed.

With evolution ``exp(-i H t)`` the bare staircase of Hadamards (one per unit
time, background always on) produces amplitudes
``N**-1/2 exp(-i (A(a') + 2 pi a b / N + B(b)))``, i.e. the forward transform
up to the diagonal terms ``A`` and ``B``. The inverse is obtained by holding
every wire inverted until just before its Hadamard.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .interaction import (
    CouplingModel,
    PhasePolynomial,
    canonical_qft_model,
    is_canonical_qft_model,
    pair_quadratic_rate,
)
from .schedule import (
    EDGE,
    MIN_PULSES_PER_WINDOW,
    PhaseEvent,
    PulseEvent,
    PulseSchedule,
    SyncInterval,
    _check_rate,
    _poisson_with_parity,
    build_sync_intervals,
    compensation_events,
    concatenate,
    expected_phase_polynomial,
    make_rng,
    sample_poisson_pulses,
    schedule_unitary,
    signed_pair_phase_schedule,
    simulate,
)
from .statevector import HADAMARD, NOT, StateVector, bit_reverse_permutation

__all__ = [
    "Direction",
    "Mode",
    "QftPlan",
    "SYNC_SLACK",
    "qft_matrix",
    "ideal_qft",
    "phase_oracle",
    "diagonal_summands",
    "cross_targets",
    "phase_gate",
    "quadratic_phase_gate",
    "cross_phase_gate",
    "build_qft_plan",
    "approximate_qft_plan",
    "run_plan",
    "plan_transform",
    "plan_fidelities",
    "plan_summary",
    "pairs_per_qubit",
]

# Hadamard spacing is chosen so the busiest half-gap is this much longer than
# the synchronization windows it must hold.
SYNC_SLACK = 1.1


class Direction(enum.Enum):
    FORWARD = "forward"
    INVERSE = "inverse"


class Mode(enum.Enum):
    UNIT_YUKAWA = "unit-yukawa"
    GENERAL_DIAGONAL = "general"
    ORACLE_COMPENSATED = "oracle"


def qft_matrix(l: int, direction: Direction = Direction.FORWARD) -> np.ndarray:
    """Dense ``N x N`` transform, ``exp(-+2 pi i a b / N) / sqrt(N)``."""
    n = 2**l
    sign = -1.0 if Direction(direction) is Direction.FORWARD else 1.0
    ab = np.outer(np.arange(n), np.arange(n)) % n
    return np.exp(sign * 2j * np.pi * ab / n) / np.sqrt(n)


def ideal_qft(state: StateVector, direction: Direction = Direction.FORWARD) -> StateVector:
    """Reference transform by FFT, ``|a> -> N**-1/2 sum_b exp(-+2 pi i a b/N) |b>``."""
    if Direction(direction) is Direction.FORWARD:
        out = np.fft.fft(state.amplitudes, norm="ortho")
    else:
        out = np.fft.ifft(state.amplitudes, norm="ortho")
    return StateVector(state.num_qubits, out)


def _bits(x, l):
    return [(x >> j) & 1 for j in range(l)]


def phase_oracle(l: int, a: int, b: int) -> float:
    """Phase accumulated by the bare staircase array for input ``a``, output ``b``.

    Sum of four terms over wire pairs ``j > k``: ``a'_j a'_k`` for time ``k``,
    ``a'_j b_k`` for time ``j - k``, ``b_j b_k`` for time ``l - 1 - j`` (all at
    coupling ``pi / (2**(j-k) (j-k))``), plus ``pi a'_j b_j`` from the Hadamards.
    """
    n = 2**l
    if not (0 <= a < n and 0 <= b < n):
        raise ValueError("basis labels out of range")
    ar = [(a >> (l - 1 - j)) & 1 for j in range(l)]
    bb = _bits(b, l)
    total = 0.0
    for j in range(l):
        total += math.pi * ar[j] * bb[j]
        for k in range(j):
            w = 2.0 ** (j - k) * (j - k)
            total += math.pi * ar[j] * ar[k] * k / w
            total += math.pi * ar[j] * bb[k] * (j - k) / w
            total += math.pi * bb[j] * bb[k] * (l - j - 1) / w
    return total


def diagonal_summands(l: int) -> tuple[PhasePolynomial, PhasePolynomial]:
    """The input-side and output-side quadratic terms, in wire indices."""
    a_quad = {}
    b_quad = {}
    for j in range(l):
        for k in range(j):
            w = 2.0 ** (j - k) * (j - k)
            a_quad[(j, k)] = math.pi * k / w
            b_quad[(j, k)] = math.pi * (l - j - 1) / w
    return PhasePolynomial(l, quadratic=a_quad), PhasePolynomial(l, quadratic=b_quad)


def cross_targets(l: int, direction: Direction, threshold: float = 0.0) -> dict[tuple[int, int], float]:
    """Phase coefficients on ``a'_j b_k`` that, with the Hadamards, give the transform."""
    sign = 1.0 if Direction(direction) is Direction.FORWARD else -1.0
    out = {}
    for j in range(l):
        for k in range(j):
            c = math.pi * 2.0 ** (k - j)
            if c >= threshold:
                out[(j, k)] = sign * c
    return out


def _wire_qubits(l):
    return [l - 1 - w for w in range(l)]


def _lift(model, pair, c, rate):
    """Shift ``c`` by a multiple of 2 pi when its run would be too short to average.

    ``x_j x_k`` is 0 or 1, so ``c`` only matters modulo 2 pi.
    """
    if rate is None or model.num_qubits <= 2:
        return c
    rate_jk = abs(pair_quadratic_rate(model, *pair))
    if rate_jk == 0 or abs(c) / rate_jk * rate >= MIN_PULSES_PER_WINDOW:
        return c
    return min(c - 2 * math.pi, c + 2 * math.pi, key=abs)


def phase_gate(poly: PhasePolynomial, model: CouplingModel, rate: float | None, seed) -> PulseSchedule:
    """Realize ``exp(-i poly)``: one decoupling run per quadratic term, then one-qubit phases."""
    rng = make_rng(seed)
    parts = [
        signed_pair_phase_schedule(model, pair, _lift(model, pair, c, rate), rate, rng)
        for pair, c in sorted(poly.quadratic.items())
    ]
    affine = poly.affine_part()
    if not affine.is_zero():
        parts.append(PulseSchedule(0.0, tuple(compensation_events(affine, 0.0)), model))
    if not parts:
        return PulseSchedule.empty(model)
    return concatenate(parts)


def quadratic_phase_gate(targets, model: CouplingModel, rate: float | None, seed) -> PulseSchedule:
    """Schedule with ideal action ``exp(-i sum c_jk x_j x_k)`` (qubit indices)."""
    if isinstance(targets, PhasePolynomial):
        poly = targets.quadratic_part()
    else:
        poly = PhasePolynomial(model.num_qubits, quadratic=dict(targets))
    for (j, k), c in poly.quadratic.items():
        if pair_quadratic_rate(model, j, k) == 0:
            raise ValueError(f"pair {(j, k)} has zero coupling")
    return phase_gate(poly, model, rate, seed)


def _staircase(model: CouplingModel, direction: Direction):
    """Bare staircase: Hadamard on wire ``w`` at time ``w``, background always on.

    Returns the schedule and the input/output compensations (qubit indices).
    """
    l = model.num_qubits
    qubits = _wire_qubits(l)
    events = [PulseEvent(float(w), qubits[w], HADAMARD) for w in range(l)]
    a_poly, b_poly = diagonal_summands(l)
    pre = -a_poly
    post = -b_poly
    if Direction(direction) is Direction.INVERSE:
        for w in range(1, l):
            events.append(PulseEvent(0.0, qubits[w], NOT))
            events.append(PulseEvent(w - EDGE, qubits[w], NOT))
        held = sum(1 << w for w in range(1, l))
        pre = -a_poly.flip(held)
        lin = np.zeros(l)
        for j, k in ((j, k) for j in range(l) for k in range(j)):
            lin[k] += math.pi * 2.0 ** (k - j)
        post = post - PhasePolynomial(l, linear=lin)
    schedule = PulseSchedule(float(l - 1), tuple(events), model)
    return schedule, pre.relabel(qubits), post.relabel(qubits)


def _general_spacing(lengths: dict, l: int) -> float:
    """Smallest equal Hadamard spacing whose halves hold their windows with slack."""
    if l < 2:
        return 1.0
    load: dict[int, float] = {}
    for (j, k), length in lengths.items():
        centre = 0.5 * (j + k)
        # halves of unit gaps: (w, w+1/2] -> 2w, (w+1/2, w+1] -> 2w+1
        h = math.ceil(2 * centre) - 1
        load[h] = load.get(h, 0.0) + length
    busiest = max(load.values(), default=0.0)
    return 2.0 * SYNC_SLACK * busiest if busiest > 0 else 1.0


def _sync_lengths(model, targets, l):
    qubits = _wire_qubits(l)
    lengths = {}
    parity = {}
    for (j, k), c in targets.items():
        rate_jk = pair_quadratic_rate(model, qubits[j], qubits[k])
        if rate_jk == 0:
            raise ValueError(f"wire pair {(j, k)} has zero coupling")
        lengths[(j, k)] = abs(c / rate_jk)
        parity[(j, k)] = 0 if (c > 0) == (rate_jk > 0) else 1
    return lengths, parity


def _check_intervals(intervals, targets, lengths, times):
    by_pair = {(iv.j, iv.k): iv for iv in intervals}
    if set(by_pair) != set(targets):
        raise ValueError("one synchronization window per target pair is required")
    for pair, iv in by_pair.items():
        if not math.isclose(iv.length, lengths[pair], rel_tol=1e-12, abs_tol=1e-12):
            raise ValueError(f"window for {pair} has length {iv.length}, need {lengths[pair]}")
        if not (times[iv.k] < iv.start and iv.end < times[iv.j]):
            raise ValueError(
                f"timing violation: window for {pair} must lie inside ({times[iv.k]}, {times[iv.j]})"
            )
    ordered = sorted(intervals, key=lambda iv: iv.start)
    for a, b in zip(ordered, ordered[1:]):
        if a.end >= b.start:
            raise ValueError(f"windows for {(a.j, a.k)} and {(b.j, b.k)} overlap")


def _sync_array(model, targets, hadamard_times, rate, seed, intervals=None, oracle=False, hadamards=True):
    l = model.num_qubits
    qubits = _wire_qubits(l)
    times = [float(t) for t in hadamard_times]
    if len(times) != l or any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("need one strictly increasing Hadamard time per wire")
    lengths, parity = _sync_lengths(model, targets, l)
    if intervals is None:
        intervals = build_sync_intervals(l, times, lengths) if lengths else []
    else:
        intervals = list(intervals)
    _check_intervals(intervals, targets, lengths, times)
    end = times[-1]
    events = [PulseEvent(times[w], qubits[w], HADAMARD) for w in range(l)] if hadamards else []

    if oracle:
        for iv in intervals:
            poly = PhasePolynomial(l, quadratic={(qubits[iv.j], qubits[iv.k]): targets[(iv.j, iv.k)]})
            events.append(PhaseEvent(iv.start, poly))
        sched = PulseSchedule(end, tuple(events), None, l)
        return sched, intervals

    for iv in intervals:
        _check_rate(rate, iv.length)
    rng = make_rng(seed)
    by_wire = {w: [iv for iv in intervals if w in (iv.j, iv.k)] for w in range(l)}
    segments = []
    for w in range(l):
        pts = {0.0, times[w], end}
        for iv in by_wire[w]:
            pts.update((iv.start, iv.end))
        pts = sorted(pts)
        for s, e in zip(pts, pts[1:]):
            sync = next((iv for iv in by_wire[w] if iv.start == s and iv.end == e), None)
            if sync is not None:
                segments.append((e, 0, w, "sync", sync))
                continue
            if e in (times[w], end):
                need = ("zero", None)
            else:
                starting = next((iv for iv in by_wire[w] if iv.start == e and iv.j == w), None)
                need = ("rel", starting) if starting is not None else None
            segments.append((e, 0 if need is None else 1, w, "free", (s, need)))
    segments.sort(key=lambda seg: seg[:3])

    flip = [0] * l
    done_sync = set()
    for e, _, w, kind, data in segments:
        if kind == "sync":
            iv = data
            if (iv.j, iv.k) in done_sync:
                continue
            done_sync.add((iv.j, iv.k))
            ts = sample_poisson_pulses(rate, (iv.start, iv.end), rng)
            for t in ts:
                events.append(PulseEvent(float(t), qubits[iv.j], NOT))
                events.append(PulseEvent(float(t), qubits[iv.k], NOT))
            flip[iv.j] ^= len(ts) & 1
            flip[iv.k] ^= len(ts) & 1
            continue
        s, need = data
        if need is None:
            ts = sample_poisson_pulses(rate, (s, e), rng)
        else:
            kind_need, iv = need
            target = 0 if kind_need == "zero" else flip[iv.k] ^ parity[(iv.j, iv.k)]
            ts = _poisson_with_parity(rate, s, e, flip[w] ^ target, rng)
        events.extend(PulseEvent(float(t), qubits[w], NOT) for t in ts)
        flip[w] ^= len(ts) & 1

    # expected affine leftovers, split by which side of its Hadamard each bit is on
    cuts = sorted({0.0, end, *times, *(iv.start for iv in intervals), *(iv.end for iv in intervals)})
    pre_lin = np.zeros(l)
    post_lin = np.zeros(l)
    const = 0.0
    for s, e in zip(cuts, cuts[1:]):
        modes = [(w, 0) for w in range(l)]
        active = next((iv for iv in intervals if iv.start <= s and e <= iv.end), None)
        mode_by_qubit = [None] * l
        for w in range(l):
            mode_by_qubit[qubits[w]] = modes[w]
        if active is not None:
            mode_by_qubit[qubits[active.j]] = ("sync", 0)
            mode_by_qubit[qubits[active.k]] = ("sync", parity[(active.j, active.k)])
        avg = expected_phase_polynomial(model, mode_by_qubit, e - s)
        const += avg.constant
        for w in range(l):
            c = avg.linear[qubits[w]]
            if e <= times[w]:
                pre_lin[qubits[w]] += c
            else:
                post_lin[qubits[w]] += c
    events.extend(compensation_events(PhasePolynomial(l, 0.0, -pre_lin), 0.0))
    events.extend(compensation_events(PhasePolynomial(l, -const, -post_lin), end + EDGE))
    sched = PulseSchedule(end + EDGE, tuple(events), model)
    return sched, intervals


def cross_phase_gate(
    model: CouplingModel,
    targets: dict[tuple[int, int], float],
    hadamard_times,
    rate: float | None = None,
    seed=None,
    intervals=None,
    oracle: bool = False,
    hadamards: bool = False,
) -> PulseSchedule:
    """Phases ``sum c_jk a'_j b_k`` on wire pairs ``j > k``.

    Wire ``j`` holds ``a'_j`` until its Hadamard at ``hadamard_times[j]``;
    wire ``k`` holds ``b_k`` after ``hadamard_times[k]``; the Hadamards
    themselves are included only with ``hadamards=True``, otherwise the
    result is the diagonal ``exp(-i sum c_jk x_j x_k)`` on qubits
    ``l-1-j``, ``l-1-k``, timed as if they were there. Each target is
    accrued inside a window between those two instants during which both
    wires receive identical NOT trains, all other couplings being averaged out
    by independent trains. With ``oracle=True`` the averaged effect is applied
    as an ideal diagonal at the window start instead.
    """
    for j, k in targets:
        if not 0 <= k < j < model.num_qubits:
            raise ValueError(f"cross target {(j, k)} must satisfy l > j > k >= 0")
    targets = {pair: c for pair, c in targets.items() if c != 0}
    if not targets and not hadamards:
        return PulseSchedule.empty(model)
    sched, _ = _sync_array(model, targets, hadamard_times, rate, seed, intervals, oracle, hadamards)
    return sched


@dataclass(frozen=True)
class QftPlan:
    l: int
    direction: Direction
    mode: Mode
    hadamard_times: tuple[float, ...]
    schedule: PulseSchedule
    pre_compensation: PhasePolynomial
    post_compensation: PhasePolynomial
    sync_intervals: tuple[SyncInterval, ...] = ()
    cross_targets: dict = field(default_factory=dict)
    threshold: float | None = None

    @property
    def duration(self) -> float:
        return self.schedule.total_time


def build_qft_plan(
    l: int,
    direction: Direction = Direction.INVERSE,
    mode: Mode = Mode.ORACLE_COMPENSATED,
    model: CouplingModel | None = None,
    rate: float | None = None,
    seed=None,
) -> QftPlan:
    """Build a pulse plan for the ``l``-qubit transform.

    ``ORACLE_COMPENSATED`` and ``UNIT_YUKAWA`` use the unit-spaced staircase
    over the canonical coupling and cancel the diagonal terms before and
    after it: ideally in the first case, with decoupling runs in the second.
    ``GENERAL_DIAGONAL`` accepts any model and builds each cross phase inside
    its own synchronization window.
    """
    direction = Direction(direction)
    mode = Mode(mode)
    model = canonical_qft_model(l) if model is None else model
    if model.num_qubits != l:
        raise ValueError("model size does not match the plan")

    if mode is Mode.GENERAL_DIAGONAL:
        targets = cross_targets(l, direction)
        lengths, _ = _sync_lengths(model, targets, l)
        spacing = _general_spacing(lengths, l)
        times = tuple(spacing * w for w in range(l))
        sched, intervals = _sync_array(model, targets, times, rate, seed)
        zero = PhasePolynomial(l)
        return QftPlan(l, direction, mode, times, sched, zero, zero, tuple(intervals), targets)

    if not is_canonical_qft_model(model):
        raise ValueError(f"mode {mode.value} needs the canonical coupling pi * 2**-r / r")
    array, pre, post = _staircase(model, direction)
    if mode is Mode.ORACLE_COMPENSATED:
        events = list(array.shifted(EDGE).events)
        if not pre.is_zero():
            events.append(PhaseEvent(0.0, pre))
        if not post.is_zero():
            events.append(PhaseEvent(array.total_time + EDGE, post))
        sched = PulseSchedule(array.total_time + EDGE, tuple(events), model)
        times = tuple(EDGE + w for w in range(l))
    else:
        rng = make_rng(seed)
        first = phase_gate(pre, model, rate, rng)
        last = phase_gate(post, model, rate, rng)
        sched = concatenate([first, array, last])
        offset = first.total_time + EDGE
        times = tuple(offset + w for w in range(l))
    return QftPlan(l, direction, mode, times, sched, pre, post, (), cross_targets(l, direction))


def approximate_qft_plan(l: int, direction: Direction = Direction.INVERSE, threshold: float = 0.0) -> QftPlan:
    """Deterministic plan keeping only cross phases of magnitude ``>= threshold``.

    Uses the synchronization-window layout over the canonical coupling, with
    each window's averaged effect applied ideally; with a fixed threshold the
    number of windows per wire, and so the Hadamard spacing, stays bounded.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    direction = Direction(direction)
    model = canonical_qft_model(l)
    targets = cross_targets(l, direction, threshold)
    lengths, _ = _sync_lengths(model, targets, l)
    spacing = _general_spacing(lengths, l)
    times = tuple(spacing * w for w in range(l))
    sched, intervals = _sync_array(model, targets, times, None, None, oracle=True)
    zero = PhasePolynomial(l)
    return QftPlan(
        l, direction, Mode.ORACLE_COMPENSATED, times, sched, zero, zero, tuple(intervals), targets, threshold
    )


def run_plan(state: StateVector, plan: QftPlan) -> StateVector:
    """Apply the plan; the result is in bit-reversed output labelling."""
    return simulate(state, plan.schedule)


def plan_transform(plan: QftPlan) -> np.ndarray:
    """Plan unitary with the output relabelled to natural bit order."""
    u = schedule_unitary(plan.schedule)
    return u[bit_reverse_permutation(plan.l), :]


def plan_fidelities(plan: QftPlan) -> np.ndarray:
    """Fidelity against the ideal transform for each basis input."""
    u = plan_transform(plan)
    ideal = qft_matrix(plan.l, plan.direction)
    return np.abs(np.sum(ideal.conj() * u, axis=0)) ** 2


def pairs_per_qubit(plan: QftPlan) -> np.ndarray:
    counts = np.zeros(plan.l, dtype=int)
    for j, k in plan.cross_targets:
        counts[j] += 1
        counts[k] += 1
    return counts


def plan_summary(plan: QftPlan) -> str:
    lines = [
        f"mode {plan.mode.value}",
        f"direction {plan.direction.value}",
        f"qubits {plan.l}",
        f"duration {plan.duration!r}",
        "hadamard_times " + " ".join(repr(float(t)) for t in plan.hadamard_times),
    ]
    if plan.threshold is not None:
        lines.append(f"threshold {plan.threshold!r}")
    for iv in plan.sync_intervals:
        lines.append(f"sync {iv.j} {iv.k} {float(iv.start)!r} {float(iv.length)!r}")
    for name, poly in (("pre", plan.pre_compensation), ("post", plan.post_compensation)):
        lines.append(f"{name}_constant {poly.constant!r}")
        lines.append(f"{name}_linear " + " ".join(repr(float(c)) for c in poly.linear))
        for (j, k), c in poly.quadratic.items():
            lines.append(f"{name}_quadratic {j} {k} {c!r}")
    lines.append(f"pulses {plan.schedule.pulse_count()}")
    return "\n".join(lines) + "\n"
