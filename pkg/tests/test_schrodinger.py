import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixint.schrodinger import (
    Backend,
    KineticConvention,
    Potential,
    TrotterConfig,
    WaveGrid,
    analytic_free_gaussian,
    energy,
    evolve,
    kinetic_phase,
    l2_distance,
    make_gaussian,
    observables,
    qft_backend_select,
    trotter_step,
    wavefunction_csv,
)


def width_at(t, sigma, m):
    return sigma * math.sqrt(1 + (t / (2 * m * sigma**2)) ** 2)


# grid


@pytest.mark.parametrize("l", range(2, 12))
def test_grain_condition(l):
    g = make_gaussian(l, 0.0, 0.0, 0.3)
    assert g.delta_q * g.delta_p * g.n == pytest.approx(2 * math.pi, rel=1e-14)
    assert g.half_width == pytest.approx(g.n * g.delta_q / 2)
    assert g.q[0] == pytest.approx(-g.half_width)


def test_grid_size_guard():
    with pytest.raises(ValueError):
        WaveGrid(3, np.zeros(4))


# initial packets


def test_centered_packet_is_real_and_even():
    g = make_gaussian(8, 0.0, 0.0, 1.0)
    assert np.allclose(g.samples.imag, 0)
    # q_a = -q_{N-a}, so reflection maps a to N - a
    assert np.allclose(g.samples[1:], g.samples[1:][::-1])
    assert g.norm == pytest.approx(1.0, abs=1e-12)


@given(st.floats(-5, 5), st.floats(-3, 3), st.floats(0.5, 2))
@settings(max_examples=40, deadline=None)
def test_packet_moments(q0, p0, sigma):
    g = make_gaussian(8, q0, p0, sigma)
    obs = observables(g)
    assert abs(obs.q_mean - q0) < g.delta_q
    assert obs.q_width**2 == pytest.approx(sigma**2, rel=0.02)
    assert obs.p_mean == pytest.approx(p0, abs=1e-6)
    assert obs.norm == pytest.approx(1.0, abs=1e-8)


def test_symmetric_packet_has_zero_momentum():
    assert abs(observables(make_gaussian(7, 0.0, 0.0, 0.8)).p_mean) < 1e-8


@pytest.mark.parametrize("args", [(8, 18.0, 0.0, 1.0), (8, 0.0, 0.0, 6.0), (8, 0.0, 0.0, -1.0)])
def test_clipped_packet_rejected(args):
    with pytest.raises(ValueError):
        make_gaussian(*args)


# kinetic phase


def test_kinetic_phase_zero_momentum():
    for conv in KineticConvention:
        assert kinetic_phase(5, 1.0, 0.3, conv)[0] == 0


def test_kinetic_phase_first_index_agrees():
    lit = kinetic_phase(3, 1.0, 1.0, KineticConvention.PAPER_LITERAL)
    cen = kinetic_phase(3, 1.0, 1.0, KineticConvention.CENTERED)
    assert lit[1] == pytest.approx(-math.pi / 8)
    assert cen[1] == pytest.approx(-math.pi / 8)


def test_kinetic_phase_wraparound_differs():
    n = 8
    lit = kinetic_phase(3, 1.0, 1.0, KineticConvention.PAPER_LITERAL)
    cen = kinetic_phase(3, 1.0, 1.0, KineticConvention.CENTERED)
    assert lit[n - 1] == pytest.approx(-math.pi * (n - 1) ** 2 / n)
    assert cen[n - 1] == pytest.approx(-math.pi / n)


@pytest.mark.parametrize("l", range(1, 10))
def test_conventions_agree_on_lower_half(l):
    lit = kinetic_phase(l, 1.3, 0.2, KineticConvention.PAPER_LITERAL)
    cen = kinetic_phase(l, 1.3, 0.2, KineticConvention.CENTERED)
    half = 2**l // 2
    assert np.allclose(lit[:half], cen[:half], rtol=1e-13, atol=0)


def test_kinetic_phase_mass_guard():
    with pytest.raises(ValueError):
        kinetic_phase(4, 0.0, 0.1)


# trotter steps


def test_free_steps_compose():
    g = make_gaussian(8, -1.0, 1.0, 1.0)
    free = Potential.free()
    two = trotter_step(trotter_step(g, free, 1.0, 0.05), free, 1.0, 0.05)
    one = trotter_step(g, free, 1.0, 0.1)
    assert l2_distance(one, two) < 1e-12


def test_free_packet_matches_analytic_state():
    g = make_gaussian(8, -2.0, 1.0, 1.0)
    out = evolve(g, Potential.free(), 1.0, TrotterConfig(1 / 64, 1.0))
    assert l2_distance(out, analytic_free_gaussian(1.0, -2.0, 1.0, 1.0, 1.0, 8)) < 1e-3


def test_harmonic_step_preserves_norm():
    g = make_gaussian(8, 2.0, 0.0, math.sqrt(0.5))
    out = trotter_step(g, Potential.harmonic(1.0, 1.0), 1.0, 2 * math.pi / 256)
    assert abs(out.norm - 1) < 1e-12


def test_zero_time_is_identity():
    g = make_gaussian(6, 0.5, 0.2, 1.0)
    out = evolve(g, Potential.harmonic(1.0, 2.0), 1.0, TrotterConfig(0.1, 0.0))
    assert np.array_equal(out.samples, g.samples)


def test_free_width_follows_dispersion():
    g = make_gaussian(8, 0.0, 0.0, 1.0)
    out = evolve(g, Potential.free(), 1.0, TrotterConfig(1 / 64, 1.0))
    assert observables(out).q_width == pytest.approx(width_at(1.0, 1.0, 1.0), rel=0.01)


def test_linear_potential_kick():
    f = 0.5
    g = make_gaussian(8, 0.0, 0.0, 1.0)
    out = evolve(g, Potential.linear(f), 1.0, TrotterConfig(1 / 64, 2.0))
    assert observables(out).p_mean == pytest.approx(f * 2.0, rel=0.01)


def test_linear_potential_centroid_error_is_first_order():
    # potential-first splitting lags the exact centroid f t^2 / 2m by f t dt / 2m
    f, t = 0.5, 2.0
    g = make_gaussian(8, 0.0, 0.0, 1.0)
    errs = []
    for dt in (1 / 16, 1 / 32, 1 / 64):
        out = evolve(g, Potential.linear(f), 1.0, TrotterConfig(dt, t))
        errs.append(abs(observables(out).q_mean - f * t**2 / 2))
        assert errs[-1] == pytest.approx(f * t * dt / 2, rel=0.01)
    assert 1.7 <= errs[0] / errs[1] <= 2.3 and 1.7 <= errs[1] / errs[2] <= 2.3


def test_harmonic_energy_returns_after_a_period():
    m, omega = 1.0, 1.0
    g = make_gaussian(8, 3.0, 0.0, math.sqrt(1 / (2 * m * omega)))
    pot = Potential.harmonic(m, omega)
    out = evolve(g, pot, m, TrotterConfig(2 * math.pi / 256, 2 * math.pi))
    e0 = energy(g, pot, m)
    assert abs(energy(out, pot, m) - e0) / e0 < 0.01
    assert abs(out.norm - 1) < 1e-8


def test_callback_sees_every_step():
    seen = []
    evolve(make_gaussian(5, 0.0, 0.0, 1.0), Potential.free(), 1.0, TrotterConfig(0.25, 1.0), callback=lambda k, t, g: seen.append((k, t)))
    assert seen == [(1, 0.25), (2, 0.5), (3, 0.75), (4, 1.0)]


@given(st.integers(0, 2**32 - 1), st.sampled_from(list(KineticConvention)))
@settings(max_examples=20, deadline=None)
def test_norm_is_conserved(seed, conv):
    rng = np.random.default_rng(seed)
    g = make_gaussian(7, rng.uniform(-3, 3), rng.uniform(-2, 2), rng.uniform(0.5, 1.5))
    pot = [Potential.free(), Potential.linear(rng.normal()), Potential.harmonic(1.0, rng.uniform(0.2, 2))][seed % 3]
    out = evolve(g, pot, 1.0, TrotterConfig(0.05, 1.0, conv))
    assert abs(out.norm - 1) < 1e-8


def test_step_count_must_be_whole():
    with pytest.raises(ValueError):
        TrotterConfig(0.3, 1.0)
    assert TrotterConfig.with_steps(1.0, 3).steps == 3


# analytic reference


def test_analytic_at_time_zero():
    assert l2_distance(analytic_free_gaussian(0.0, 1.0, -0.5, 0.9, 1.0, 8), make_gaussian(8, 1.0, -0.5, 0.9)) < 1e-12


@pytest.mark.parametrize("t", [0.0, 0.5, 1.0, 2.0])
def test_analytic_normalized_and_drifting(t):
    q0, p0, m = -2.0, 1.5, 1.3
    g = analytic_free_gaussian(t, q0, p0, 1.0, m, 8)
    obs = observables(g)
    assert abs(obs.norm - 1) < 1e-8
    assert abs(obs.q_mean - (q0 + p0 * t / m)) < g.delta_q
    assert obs.q_width == pytest.approx(width_at(t, 1.0, m), rel=1e-3)


def test_analytic_equals_exact_free_evolution():
    # the kinetic factor is exact, so many small steps reproduce the analytic state
    g = make_gaussian(8, 1.0, -1.0, 0.8)
    out = evolve(g, Potential.free(), 2.0, TrotterConfig(0.5, 1.5))
    assert l2_distance(out, analytic_free_gaussian(1.5, 1.0, -1.0, 0.8, 2.0, 8)) < 1e-10


# backends


def test_pulse_backend_agrees_with_reference():
    g = make_gaussian(5, 0.0, 0.5, 0.8)
    for pot in (Potential.free(), Potential.harmonic(1.0, 1.0)):
        a = trotter_step(g, pot, 1.0, 0.1, backend=Backend.REFERENCE)
        b = trotter_step(g, pot, 1.0, 0.1, backend=Backend.PULSE_ORACLE)
        assert np.linalg.norm(a.amplitudes() - b.amplitudes()) < 1e-8


def test_pulse_backend_size_guard():
    with pytest.raises(ValueError):
        qft_backend_select(Backend.PULSE_ORACLE, 7)


def test_reference_backend_is_fft():
    fwd, inv = qft_backend_select(Backend.REFERENCE, 4)
    v = np.random.default_rng(0).normal(size=16) + 0j
    assert np.allclose(fwd(v), np.fft.fft(v) / 4)
    assert np.allclose(inv(fwd(v)), v)


# output


def test_wavefunction_csv_layout():
    g = make_gaussian(3, 0.0, 0.0, 0.5)
    lines = wavefunction_csv(g, 0.25).splitlines()
    assert lines[0].startswith("# l=3 delta_q=") and lines[0].endswith("t=0.25")
    assert lines[1] == "index,q,re,im,prob"
    assert len(lines) == 2 + 8
    assert sum(float(ln.split(",")[4]) for ln in lines[2:]) == pytest.approx(1.0)
