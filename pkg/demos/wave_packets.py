# coding: utf-8

# # Wave packets on a qubit grid
#
# Split-operator steps alternate a potential phase in position space with a
# kinetic phase in momentum space; the Fourier transforms between them can be
# the FFT or the simulated pulse plans.

import math

from fixint.schrodinger import (
    Backend,
    Potential,
    TrotterConfig,
    analytic_free_gaussian,
    energy,
    evolve,
    l2_distance,
    make_gaussian,
    observables,
    trotter_step,
)


# ## Free spreading

g = make_gaussian(8, -2.0, 1.0, 1.0)
out = evolve(g, Potential.free(), 1.0, TrotterConfig(1 / 64, 1.0))
print("width:", observables(out).q_width, "expected:", math.sqrt(1 + 0.25))
print("distance to analytic state:", l2_distance(out, analytic_free_gaussian(1.0, -2.0, 1.0, 1.0, 1.0, 8)))


# ## Harmonic oscillator over one period

pot = Potential.harmonic(1.0, 1.0)
g = make_gaussian(8, 3.0, 0.0, math.sqrt(0.5))
rows = []
evolve(g, pot, 1.0, TrotterConfig(2 * math.pi / 256, 2 * math.pi),
       callback=lambda k, t, grid: rows.append((t, observables(grid).q_mean, energy(grid, pot, 1.0))))
for t, q, e in rows[::32]:
    print(f"t={t:5.2f} <q>={q:+.4f} 3cos(t)={3 * math.cos(t):+.4f} E={e:.4f}")


# ## The same step through pulse plans

g = make_gaussian(5, 0.5, 0.7, 0.8)
a = trotter_step(g, pot, 1.0, 0.1, backend=Backend.REFERENCE)
b = trotter_step(g, pot, 1.0, 0.1, backend=Backend.PULSE_ORACLE)
print("FFT vs pulses:", l2_distance(a, b))
