"""How much timing jitter does a loop tolerate?

Close a loop around a plant, sweep 1 / (|T(jw)| w) and read off the smallest
value: that is the total jitter (sampling plus delay) the loop can absorb.
"""
# %%
import numpy as np

from nasco import TransferFunction, closed_loop, effective_period_bound, jitter_margin

# %% An integrator under proportional control: T(s) = K / (s + K).
integrator = TransferFunction([1.0], [0.0, 1.0])
for k in (0.5, 1.0, 2.0, 5.0):
    t_u = closed_loop(integrator, TransferFunction.gain(k))
    r = jitter_margin(t_u)
    print(f"K = {k:4.1f}  T = {t_u}  j_max = {r.j_max:.6f} s  (1/K = {1 / k:.6f})")

# %% A lightly damped second-order loop attains its bound at a finite frequency.
t_u = TransferFunction([1.0], [1.0, 1.0, 1.0])
r = jitter_margin(t_u)
print(f"\n1/(s^2+s+1): j_max = {r.j_max:.9f} s at omega* = {r.omega_star:.6f} rad/s")

# the profile is what `nasco margin` writes to CSV
i = np.argmin(r.bound)
print("grid minimum:", r.omega[i], r.bound[i])

# %% Faster loops tolerate less: slowing the loop by 10 multiplies the margin by 10.
slow = TransferFunction([1.0], [1.0, 10.0, 100.0])
print(f"1/(100 s^2 + 10 s + 1): j_max = {jitter_margin(slow).j_max:.6f} s")

# %% The margin also bounds the effective sampling period from below.
print("effective period bound for h = 10 ms, j_max = 1 ms:", effective_period_bound(1e-3, 10e-3))
