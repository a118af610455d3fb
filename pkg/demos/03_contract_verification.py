"""Checking timing traces against a timing-tolerance contract."""
# %%
from nasco import TimingTrace, TolcContract, admissible_windows, check_trace, validate_parameters

ms = 1e-3
c = TolcContract(h=10 * ms, tau=2 * ms, j_h=1 * ms, j_tau=1 * ms)
print("constraint violations:", validate_parameters(c))
print("too short a period:", [str(v) for v in validate_parameters(TolcContract(4 * ms, 2 * ms, 1 * ms, 1 * ms))])

# %% Windows for sample k = 3.
w = admissible_windows(c, 3)
print("sampling window:", w.sampling)
print("actuation window if sampled at 30.5 ms:", w.actuation(30.5 * ms))

# %% A conforming trace, then one with a late sample and a late actuation.
rows = [(0, 0.5, 2.7, 3.0), (1, 10.2, 12.1, 12.4), (2, 20.9, 23.3, 23.5)]
good = TimingTrace.from_records([(k, s * ms, a * ms, u * ms) for k, s, a, u in rows])
print("\ngood trace satisfied:", check_trace(c, good).satisfied)

bad = good.replace(1, t_s=11.5 * ms, t_a=13.4 * ms).replace(2, t_a=24.5 * ms)
for v in check_trace(c, bad).violations:
    print(f"k={v.k} {v.kind}: observed {v.observed / ms:.2f} ms, allowed "
          f"[{v.allowed[0] / ms:.2f}, {v.allowed[1] / ms:.2f}] ms")
