"""
Lagrangian particle positions
=============================

Particle position components are three snapshot matrices with one row per
particle.  Each component gets its own filter, basis and mode count, and
the jitter-free field of each component tells how much of the filtering
removed jitter and how much removed genuine motion.
"""
# %%
import numpy as np

from podlstm.fft import FilterConfig, filter_snapshots
from podlstm.pod import compute_svd, select_modes
from podlstm.synth import SyntheticMode, SyntheticSpec, generate_lagrangian, make_profile

n_particles = 800
freqs = {
    "x": (0.0, 2 / 4.5, 4 / 4.5),
    "y": (0.0, 4 / 4.5, 6 / 4.5),
    "z": (2 / 4.5, 6 / 4.5, 10 / 4.5),
}


def component(seed, f, jitter):
    modes = [
        SyntheticMode(make_profile("random", n_particles, seed, k), amp, fk, 1.0 + 0.3 * k)  # nonzero phase keeps the 0 Hz mode alive
        for k, (amp, fk) in enumerate(zip((1.0, 0.6, 0.4), f))
    ]
    return SyntheticSpec(n_particles, modes, jitter_amplitude=jitter, jitter_frequency=30.0, seed=seed)


noisy = generate_lagrangian(*(component(s, freqs[c], 0.03) for s, c in zip((1, 2, 3), "xyz")), 450, 0.01)
clean = generate_lagrangian(*(component(s, freqs[c], 0.0) for s, c in zip((1, 2, 3), "xyz")), 450, 0.01)

# %%
cfg = FilterConfig(5e-4)
for S, C in zip(noisy, clean):
    F = filter_snapshots(S, cfg)
    print(f"{S.name}: leading singular values raw {np.round(compute_svd(S)[1][:5], 3)}")
    print(f"{S.name}: leading singular values filtered {np.round(compute_svd(F)[1][:5], 3)}")
    jitter = S.values - C.values
    removed = 1 - np.sum((F.values - C.values) ** 2) / np.sum(jitter**2)
    print(
        f"{S.name} ({S.field.name}): modes at delta=0.99 {select_modes(compute_svd(S)[1], 0.99)} raw, "
        f"{select_modes(compute_svd(F)[1], 0.99)} filtered; "
        f"distance to jitter-free field shrinks by {100 * removed:.1f}% of the jitter energy"
    )
