"""
Pulse timelines over an always-on diagonal interaction.

A :class:`PulseSchedule` is a time-ordered list of instantaneous one-qubit
gates; between events the register evolves under the background
:class:`~fixint.interaction.CouplingModel`. Random NOT trains (Poisson
processes) average unwanted pair couplings down to affine phases, which are
then cancelled with one-qubit phase gates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .interaction import (
    CouplingModel,
    PhasePolynomial,
    hamiltonian_polynomial,
    pair_polynomial,
    pair_quadratic_rate,
)
from .statevector import (
    HADAMARD,
    NOT,
    GateKind,
    OneQubitGate,
    StateVector,
    apply_matrix,
    phase_shift,
    unitary_gate,
)

__all__ = [
    "EDGE",
    "MIN_PULSES_PER_WINDOW",
    "InfeasiblePackingError",
    "PulseEvent",
    "PhaseEvent",
    "PulseSchedule",
    "SyncInterval",
    "make_rng",
    "concatenate",
    "sample_poisson_pulses",
    "expected_phase_polynomial",
    "compensation_events",
    "compensation_for_decoupling",
    "build_decoupling_schedule",
    "signed_pair_phase_schedule",
    "build_sync_intervals",
    "simulate",
    "propagate",
    "schedule_unitary",
]

# Gap used to order a parity-restoring NOT strictly before a boundary gate on
# the same qubit. Background phase accrued over it is below 1e-10.
EDGE = 1e-11

# Lower bound on rate * window for the time averaging to be trusted.
MIN_PULSES_PER_WINDOW = 50.0


class InfeasiblePackingError(ValueError):
    """Synchronization windows do not fit between the Hadamard instants."""


@dataclass(frozen=True, slots=True)
class PulseEvent:
    time: float
    qubit: int
    gate: OneQubitGate


@dataclass(frozen=True, slots=True)
class PhaseEvent:
    """Ideal register-wide diagonal ``exp(-i poly)``.

    Not a physical pulse: used by the deterministic verification modes to
    stand in for the time-averaged effect of a random pulse train.
    """

    time: float
    poly: PhasePolynomial


def _event_key(ev, l):
    if isinstance(ev, PhaseEvent):
        return (ev.time, l)
    return (ev.time, ev.qubit)


@dataclass(frozen=True)
class PulseSchedule:
    total_time: float
    events: tuple
    background: CouplingModel | None
    num_qubits: int = 0

    def __post_init__(self):
        l = self.num_qubits or (self.background.num_qubits if self.background else 0)
        if l < 1:
            raise ValueError("schedule needs a background model or an explicit qubit count")
        if self.background is not None and self.background.num_qubits != l:
            raise ValueError("background size does not match the schedule")
        object.__setattr__(self, "num_qubits", l)
        if self.total_time < 0 or not math.isfinite(self.total_time):
            raise ValueError("total time must be finite and nonnegative")
        raw = tuple(self.events)
        n = len(raw)
        times = np.fromiter((ev.time for ev in raw), float, n)
        slots = np.fromiter((_event_key(ev, l)[1] for ev in raw), np.int64, n)
        bad = ~np.isfinite(times) | (times < 0) | (times > self.total_time)
        if bad.any():
            t = times[np.argmax(bad)]
            raise ValueError(f"event at t={t} outside [0, {self.total_time}]")
        for ev in raw:
            if isinstance(ev, PhaseEvent):
                if ev.poly.num_qubits != l:
                    raise ValueError("phase event size does not match the schedule")
            elif not 0 <= ev.qubit < l:
                raise ValueError(f"event qubit {ev.qubit} out of range")
        order = np.lexsort((slots, times))
        times, slots = times[order], slots[order]
        clash = (times[1:] == times[:-1]) & (slots[1:] == slots[:-1]) & (slots[1:] < l)
        if clash.any():
            i = int(np.argmax(clash))
            raise ValueError(f"two events on qubit {slots[i]} at t={times[i]}")
        object.__setattr__(self, "events", tuple(raw[i] for i in order))

    @classmethod
    def empty(cls, background: CouplingModel, total_time: float = 0.0) -> "PulseSchedule":
        return cls(total_time, (), background)

    @property
    def is_physical(self) -> bool:
        return not any(isinstance(ev, PhaseEvent) for ev in self.events)

    def pulse_count(self, qubit: int | None = None, kind: GateKind = GateKind.NOT) -> int:
        return sum(
            1
            for ev in self.events
            if isinstance(ev, PulseEvent) and ev.gate.kind is kind and (qubit is None or ev.qubit == qubit)
        )

    def shifted(self, dt: float) -> "PulseSchedule":
        events = tuple(_shift_events(self.events, dt))
        return PulseSchedule(self.total_time + dt, events, self.background, self.num_qubits)

    def split(self, t: float) -> tuple["PulseSchedule", "PulseSchedule"]:
        """Cut at ``t``: events at ``t`` go to the first part, the second is re-zeroed."""
        first = tuple(ev for ev in self.events if ev.time <= t)
        rest = []
        for ev in self.events:
            if ev.time > t:
                if isinstance(ev, PhaseEvent):
                    rest.append(PhaseEvent(ev.time - t, ev.poly))
                else:
                    rest.append(PulseEvent(ev.time - t, ev.qubit, ev.gate))
        return (
            PulseSchedule(t, first, self.background, self.num_qubits),
            PulseSchedule(self.total_time - t, tuple(rest), self.background, self.num_qubits),
        )

    def to_text(self) -> str:
        """Line format ``time qubit gate [param]``, one event per line."""
        lines = [f"# qubits {self.num_qubits} total_time {float(self.total_time)!r}"]
        for ev in self.events:
            if isinstance(ev, PhaseEvent):
                p = ev.poly
                lin = ",".join(repr(float(c)) for c in p.linear)
                quad = ",".join(f"{j}:{k}:{c!r}" for (j, k), c in p.quadratic.items())
                lines.append(f"{float(ev.time)!r} * IDEAL {p.constant!r};{lin};{quad}")
                continue
            g = ev.gate
            line = f"{float(ev.time)!r} {ev.qubit} {g.label()}"
            if g.kind is GateKind.PHASE:
                line += f" {g.theta!r}"
            elif g.kind is GateKind.UNITARY:
                line += " " + ",".join(f"{float(z.real)!r}:{float(z.imag)!r}" for z in g.unitary.ravel())
            lines.append(line)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, background: CouplingModel | None) -> "PulseSchedule":
        header, *body = [ln for ln in text.splitlines() if ln.strip()]
        parts = header.lstrip("#").split()
        l, total = int(parts[1]), float(parts[3])
        events = []
        for ln in body:
            fields = ln.split()
            t = float(fields[0])
            if fields[2] == "IDEAL":
                const, lin, quad = fields[3].split(";")
                linear = [float(x) for x in lin.split(",")] if lin else [0.0] * l
                quadratic = {}
                for item in filter(None, quad.split(",")):
                    j, k, c = item.split(":")
                    quadratic[(int(j), int(k))] = float(c)
                events.append(PhaseEvent(t, PhasePolynomial(l, float(const), linear, quadratic)))
                continue
            q, label = int(fields[1]), fields[2]
            if label == "H":
                gate = HADAMARD
            elif label == "X":
                gate = NOT
            elif label == "P":
                gate = phase_shift(float(fields[3]))
            else:
                vals = [complex(float(a), float(b)) for a, b in (z.split(":") for z in fields[3].split(","))]
                gate = unitary_gate(np.array(vals).reshape(2, 2))
            events.append(PulseEvent(t, q, gate))
        return cls(total, tuple(events), background, l)


def _shift_events(events, dt):
    if dt == 0:
        return list(events)
    return [
        PhaseEvent(ev.time + dt, ev.poly) if isinstance(ev, PhaseEvent) else PulseEvent(ev.time + dt, ev.qubit, ev.gate)
        for ev in events
    ]


@dataclass(frozen=True)
class SyncInterval:
    j: int
    k: int
    start: float
    length: float

    @property
    def end(self) -> float:
        return self.start + self.length


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def concatenate(schedules: Sequence[PulseSchedule], gap: float = EDGE) -> PulseSchedule:
    """Run schedules back to back, separated by ``gap`` of idle background evolution."""
    if not schedules:
        raise ValueError("nothing to concatenate")
    background = schedules[0].background
    l = schedules[0].num_qubits
    events = []
    offset = 0.0
    for i, s in enumerate(schedules):
        if s.num_qubits != l or s.background != background:
            raise ValueError("schedules must share the background model")
        if i:
            offset += gap
        events.extend(_shift_events(s.events, offset))
        offset += s.total_time
    return PulseSchedule(offset, tuple(events), background, l)


def sample_poisson_pulses(rate: float, window: tuple[float, float], seed) -> np.ndarray:
    """Arrival times of a homogeneous Poisson process on the open ``window``."""
    if rate <= 0:
        raise ValueError(f"rate must be positive, got {rate}")
    t0, t1 = window
    rng = make_rng(seed)
    if t1 <= t0:
        return np.empty(0)
    n = rng.poisson(rate * (t1 - t0))
    times = np.unique(rng.uniform(t0, t1, n))
    return times[(times > t0) & (times < t1)]


def _poisson_with_parity(rate, t0, t1, parity, rng, tries=64):
    """Poisson train on ``(t0, t1)`` whose count has the given parity.

    Resamples the count until the parity matches; if the window is too short
    for that to happen, a single NOT at ``t1 - EDGE`` fixes it up.
    """
    mean = rate * (t1 - t0)
    for _ in range(tries):
        n = rng.poisson(mean)
        if n % 2 == parity:
            return np.sort(rng.uniform(t0, t1 - EDGE, n))
    times = np.sort(rng.uniform(t0, t1 - 2 * EDGE, rng.poisson(mean)))
    if len(times) % 2 != parity:
        times = np.append(times, t1 - EDGE)
    return times


def _check_rate(rate, window):
    if rate is None or rate <= 0:
        raise ValueError("a positive pulse rate is required")
    if rate * window < MIN_PULSES_PER_WINDOW:
        raise ValueError(
            f"rate {rate} too low for a window of {window}: need rate*window >= {MIN_PULSES_PER_WINDOW}"
        )


# Flip modes used by expected_phase_polynomial: None for a static qubit,
# otherwise (group, offset) meaning the qubit carries x XOR f_group XOR offset
# with f_group a fair random bit shared by the group.
def _pair_average(model, p, q, mode_p, mode_q, static_p=0, static_q=0):
    c0, cp, cq, cpq = pair_polynomial(model, p, q)

    def value(xp, xq):
        return c0 + cp * xp + cq * xq + cpq * xp * xq

    def branches(mode, static):
        if mode is None:
            return [lambda x, s=static: x ^ s]
        return [lambda x, f=f, o=mode[1]: x ^ f ^ o for f in (0, 1)]

    if mode_p is not None and mode_q is not None and mode_p[0] == mode_q[0]:
        combos = [
            (lambda x, f=f: x ^ f ^ mode_p[1], lambda y, f=f: y ^ f ^ mode_q[1]) for f in (0, 1)
        ]
    else:
        combos = [(a, b) for a in branches(mode_p, static_p) for b in branches(mode_q, static_q)]
    v = np.zeros((2, 2))
    for xp in (0, 1):
        for xq in (0, 1):
            v[xp, xq] = np.mean([value(fa(xp), fb(xq)) for fa, fb in combos])
    return v[0, 0], v[1, 0] - v[0, 0], v[0, 1] - v[0, 0], v[1, 1] - v[1, 0] - v[0, 1] + v[0, 0]


def expected_phase_polynomial(model: CouplingModel, modes, duration: float, static_flips: int = 0) -> PhasePolynomial:
    """Time-averaged background phase for the given per-qubit flip modes.

    ``modes[q]`` is ``None`` for a qubit left alone (inverted throughout if bit
    ``q`` of ``static_flips`` is set), or ``(group, offset)`` for a qubit driven
    by the random NOT train ``group``. Qubits in different groups flip
    independently; qubits in the same group flip together.
    """
    l = model.num_qubits
    const = 0.0
    lin = np.zeros(l)
    quad = {}
    for p, q in model.pairs():
        c0, cp, cq, cpq = _pair_average(
            model, p, q, modes[p], modes[q], (static_flips >> p) & 1, (static_flips >> q) & 1
        )
        const += c0
        lin[p] += cp
        lin[q] += cq
        quad[(p, q)] = cpq
    return PhasePolynomial(l, const, lin, quad) * duration


def compensation_events(poly: PhasePolynomial, time: float) -> list[PulseEvent]:
    """One-qubit gates realizing ``exp(-i poly)`` for an affine ``poly``.

    The constant becomes a global phase folded into the gate on qubit 0.
    """
    if poly.quadratic:
        raise ValueError("one-qubit gates can only realize affine phases")
    events = []
    for q in range(poly.num_qubits):
        theta = -poly.linear[q]
        glob = -poly.constant if q == 0 else 0.0
        if glob != 0.0:
            u = np.diag([np.exp(1j * glob), np.exp(1j * (glob + theta))])
            events.append(PulseEvent(time, q, unitary_gate(u)))
        elif theta != 0.0:
            events.append(PulseEvent(time, q, phase_shift(theta)))
    return events


def _spectator_modes(l, separated):
    return [None if q in separated else (q, 0) for q in range(l)]


def compensation_for_decoupling(model: CouplingModel, separated: tuple[int, int], duration: float) -> PhasePolynomial:
    """Negative of the phase the spectators add to a decoupling run.

    With spectators flipped at random, a spectator/separated pair contributes
    half its coupling as a linear term on the separated bit, and a spectator
    pair a quarter of its coupling as a constant.
    """
    j, k = separated
    l = model.num_qubits
    total = expected_phase_polynomial(model, _spectator_modes(l, separated), duration)
    c0, cj, ck, cjk = pair_polynomial(model, j, k)
    own = PhasePolynomial(l, c0, _unit(l, {j: cj, k: ck}), {(j, k): cjk}) * duration
    return -(total - own)


def _unit(l, entries):
    v = np.zeros(l)
    for q, c in entries.items():
        v[q] += c
    return v


def _decoupling_events(model, separated, rate, duration, rng):
    l = model.num_qubits
    events = []
    for p in range(l):
        if p in separated:
            continue
        times = sample_poisson_pulses(rate, (0.0, duration - EDGE), rng)
        events.extend(PulseEvent(float(t), p, NOT) for t in times)
        if len(times) % 2:
            events.append(PulseEvent(duration - EDGE, p, NOT))
    return events


def build_decoupling_schedule(
    model: CouplingModel, separated: tuple[int, int], rate: float, duration: float, seed
) -> PulseSchedule:
    """Random NOT trains on every qubit except the separated pair.

    Each spectator's pulse count is made even by one extra NOT just before
    the end, so all bits are restored.
    """
    j, k = separated
    l = model.num_qubits
    if j == k or not (0 <= j < l and 0 <= k < l):
        raise ValueError(f"invalid separated pair {separated}")
    if l > 2:
        _check_rate(rate, duration)
    rng = make_rng(seed)
    return PulseSchedule(duration, tuple(_decoupling_events(model, separated, rate, duration, rng)), model)


def signed_pair_phase_schedule(
    model: CouplingModel, pair: tuple[int, int], c: float, rate: float, seed
) -> PulseSchedule:
    """Schedule whose ideal net action is ``exp(-i c x_j x_k)``.

    The pair accrues its quadratic rate while spectators are decoupled; when
    the sign of ``c`` differs from that rate, qubit ``j`` is held inverted by a
    NOT at each end, and the leftover affine phase is cancelled at the end.
    """
    j, k = pair
    l = model.num_qubits
    if c == 0:
        return PulseSchedule.empty(model)
    rate_jk = pair_quadratic_rate(model, j, k)
    if rate_jk == 0:
        raise ValueError(f"pair {pair} has zero coupling")
    duration = abs(c / rate_jk)
    if l > 2:
        _check_rate(rate, duration)
    rng = make_rng(seed)
    events = _decoupling_events(model, pair, rate, duration, rng)
    inverted = (c / rate_jk) < 0
    flips = 0
    if inverted:
        flips = 1 << j
        events.append(PulseEvent(0.0, j, NOT))
        events.append(PulseEvent(duration - EDGE, j, NOT))
    modes = _spectator_modes(l, pair)
    expected = expected_phase_polynomial(model, modes, duration, static_flips=flips)
    target = PhasePolynomial(l, quadratic={(j, k): c})
    correction = target - expected
    leftover = max((abs(v) for v in correction.quadratic.values()), default=0.0)
    assert leftover < 1e-9 * max(1.0, abs(c)), correction
    correction = correction.affine_part()
    events.extend(compensation_events(correction, duration - EDGE / 2))
    return PulseSchedule(duration, tuple(events), model)


def build_sync_intervals(
    l: int, hadamard_times: Sequence[float], required_lengths: dict[tuple[int, int], float]
) -> list[SyncInterval]:
    """Place one synchronization window per pair ``(j, k)``, ``j > k``.

    Each gap between neighbouring Hadamard instants is cut in two halves
    (the cut point belongs to the left half). Pair ``(j, k)`` goes to the half
    holding ``(t_j + t_k) / 2``; the windows sharing a half are laid out in a
    row with equal slack around them.
    """
    t = np.asarray(hadamard_times, dtype=float)
    if t.shape != (l,) or np.any(np.diff(t) <= 0):
        raise ValueError("need one strictly increasing Hadamard time per qubit")
    halves = []
    for w in range(l - 1):
        mid = 0.5 * (t[w] + t[w + 1])
        halves += [(t[w], mid), (mid, t[w + 1])]
    # centres landing on a cut up to rounding belong to the left half
    tol = 1e-12 * max(1.0, float(np.max(np.abs(t))))
    members: dict[int, list] = {}
    for (j, k), length in sorted(required_lengths.items()):
        if not (0 <= k < j < l):
            raise ValueError(f"sync pair {(j, k)} must satisfy l > j > k >= 0")
        if not length > 0:
            raise ValueError(f"sync length for {(j, k)} must be positive")
        centre = 0.5 * (t[j] + t[k])
        h = next(i for i, (_, e) in enumerate(halves) if centre <= e + tol)
        members.setdefault(h, []).append((j, k, float(length)))
    out = []
    for h, items in sorted(members.items()):
        s, e = halves[h]
        need = sum(length for _, _, length in items)
        if need >= e - s:
            raise InfeasiblePackingError(
                f"windows need {need:.6g} but the half ({s:.6g}, {e:.6g}] has {e - s:.6g}"
            )
        slack = (e - s - need) / (len(items) + 1)
        cursor = s
        for j, k, length in items:
            cursor += slack
            out.append(SyncInterval(j, k, cursor, length))
            cursor += length
    out.sort(key=lambda iv: iv.start)
    for a, b in zip(out, out[1:]):
        assert a.end < b.start
    for iv in out:
        assert t[iv.k] < iv.start and iv.end < t[iv.j]
    return out


def _run_block(amps, block, t_start, t_end, phi_tab, l):
    """Exact evolution through NOT/diagonal-only events.

    Tracks the XOR mask of flipped bits: the time spent under each mask
    weights the background phase of the shifted basis label.
    """
    n = amps.shape[0]
    idx = np.arange(n)
    if not block:
        dur = t_end - t_start
        if dur == 0 or phi_tab is None:
            return amps
        return _scale(amps, np.exp(-1j * dur * phi_tab))
    times = np.fromiter((ev.time for ev in block), float, len(block))
    flips = np.fromiter(
        (
            (1 << ev.qubit) if isinstance(ev, PulseEvent) and ev.gate.kind is GateKind.NOT else 0
            for ev in block
        ),
        np.int64,
        len(block),
    )
    seg_masks = np.concatenate(([0], np.bitwise_xor.accumulate(flips)))
    bounds = np.concatenate(([t_start], times, [t_end]))
    weights = np.bincount(seg_masks, weights=np.diff(bounds), minlength=n)
    phase = np.zeros(n)
    if phi_tab is not None:
        for m in np.flatnonzero(weights):
            phase += weights[m] * phi_tab[idx ^ m]
    factor = np.exp(-1j * phase)
    for i, ev in enumerate(block):
        if flips[i]:
            continue
        cur = idx ^ seg_masks[i]
        if isinstance(ev, PhaseEvent):
            factor = factor * np.exp(-1j * ev.poly.table()[cur])
        else:
            u = ev.gate.matrix
            bit = (cur >> ev.qubit) & 1
            factor = factor * np.where(bit, u[1, 1], u[0, 0])
    out = np.empty_like(amps)
    out[idx ^ seg_masks[-1]] = _scale(amps, factor)
    return out


def _scale(amps, factor):
    return amps * (factor[:, None] if amps.ndim == 2 else factor)


def _frame_compatible(ev):
    if isinstance(ev, PhaseEvent):
        return True
    return ev.gate.kind is GateKind.NOT or ev.gate.is_diagonal


def propagate(amps: np.ndarray, schedule: PulseSchedule) -> np.ndarray:
    """Apply ``schedule`` to amplitudes of shape ``(2**l,)`` or ``(2**l, k)``."""
    l = schedule.num_qubits
    phi_tab = hamiltonian_polynomial(schedule.background).table() if schedule.background else None
    amps = np.array(amps, dtype=complex)
    block = []
    t_prev = 0.0
    for ev in schedule.events:
        if _frame_compatible(ev):
            block.append(ev)
            continue
        amps = _run_block(amps, block, t_prev, ev.time, phi_tab, l)
        amps = apply_matrix(amps, ev.qubit, ev.gate.matrix, l)
        block = []
        t_prev = ev.time
    return _run_block(amps, block, t_prev, schedule.total_time, phi_tab, l)


def simulate(state: StateVector, schedule: PulseSchedule) -> StateVector:
    if state.num_qubits != schedule.num_qubits:
        raise ValueError(f"state has {state.num_qubits} qubits, schedule {schedule.num_qubits}")
    return StateVector(state.num_qubits, propagate(state.amplitudes, schedule))


def schedule_unitary(schedule: PulseSchedule) -> np.ndarray:
    n = 2**schedule.num_qubits
    return propagate(np.eye(n, dtype=complex), schedule)
