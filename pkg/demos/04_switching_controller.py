"""A controller bank switched by channel load, run as a Mealy machine."""
# %%
import numpy as np

from nasco import MealySwitchingController, TransferFunction, discretize, initialize, step

h = 0.1
print("Tustin integrator:", discretize(TransferFunction([1.0], [0.0, 1.0]), h))

# %% Aggressive PI on a quiet channel, a detuned one when the channel is loaded.
bank = {
    "Low": TransferFunction([1.0, 2.0], [0.0, 1.0]),
    "High": TransferFunction([0.3, 0.8], [0.0, 1.0]),
}
m = MealySwitchingController.from_continuous(bank, h, initial_mode="Low", reference=1.0)
state = initialize(m)

rng = np.random.default_rng(0)
for k in range(8):
    channel = "Low" if k < 4 else "High"
    u, state = step(m, state, sensor_sample=0.1 * k, channel_state=channel, delay_sample=rng.uniform(0, 0.01))
    print(f"k={k} mode={state.mode:4s} u={u:+.4f}")

# %% Each mode kept its own memory.
for label, mem in state.memory.items():
    print(label, mem)
