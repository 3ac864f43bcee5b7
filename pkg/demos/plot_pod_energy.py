"""
POD basis and the cumulative energy criterion
=============================================

The number of retained modes is the smallest ``n`` whose partial sum of
singular values reaches the fraction ``delta`` of the total.  Filtering
first removes the jitter mode, so fewer modes reach the same fraction.
"""
# %%
import numpy as np

from _common import OUT
from podlstm import svg
from podlstm.fft import FilterConfig, filter_snapshots
from podlstm.pod import compute_basis, compute_svd, energy_curve, project, reconstruct, select_modes
from podlstm.synth import generate_eulerian, reference_spec

S = generate_eulerian(reference_spec(), 450, 0.01)
F = filter_snapshots(S, FilterConfig(4e-4))

# %%
s_raw, s_filt = compute_svd(S)[1], compute_svd(F)[1]
for delta in (0.8, 0.9, 0.95, 0.99):
    print(f"delta={delta}: unfiltered {select_modes(s_raw, delta)} modes, filtered {select_modes(s_filt, delta)}")

k = np.arange(1, 11)
svg.line_chart(
    [svg.Series(k, energy_curve(s_raw)[:10], "unfiltered"), svg.Series(k, energy_curve(s_filt)[:10], "filtered")],
    OUT / "energy.svg", title="cumulative energy", xlabel="modes", ylabel="E", hline=0.9,
)

# %%
# Truncation error equals the discarded squared singular values
basis = compute_basis(F, delta=0.9)
back = reconstruct(basis, project(F, basis))
lhs = np.sum((F.values - back.values) ** 2)
print(f"Nr = {basis.n_modes}: ||S - U U^T S||^2 = {lhs:.6e}, tail sum = {np.sum(s_filt[basis.n_modes:] ** 2):.6e}")
