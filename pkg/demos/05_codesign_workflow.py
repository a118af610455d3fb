"""From plant and jitter models to a verified contract.

1. compute the jitter margin of every controller in the bank
2. synthesise contract parameters from the smallest margin
3. simulate the networked loop and check its trace against the contract
"""
# %%
from nasco import (
    DelayDistribution,
    HardwareJitter,
    MarkovDelayModel,
    MealySwitchingController,
    Reference,
    Scenario,
    SoftwareJitter,
    SynthesisPolicy,
    TransferFunction,
    composite_stats,
    margin_per_state,
    monte_carlo,
    run,
    synthesize_contract,
)

plant = TransferFunction([1.0], [0.0, 1.0])
bank = {"Low": TransferFunction.gain(1.0), "High": TransferFunction.gain(0.8)}
for label, r in margin_per_state(plant, bank):
    print(f"{label}: j_max = {r.j_max:.4f} s")

# %%
hw, sw = HardwareJitter(0.005), SoftwareJitter(0.02, 0.01)
net = MarkovDelayModel.low_high(
    [[0.9, 0.1], [0.2, 0.8]], DelayDistribution.uniform(0.01, 0.02), DelayDistribution.uniform(0.02, 0.04)
)
stats = composite_stats(hw, sw, net)
contract = synthesize_contract(plant, bank, stats, h=1.0, tau=0.05, policy=SynthesisPolicy(0.5, 0.8))
print(contract)

# %%
sc = Scenario(
    plant=plant,
    controller=MealySwitchingController.from_continuous(bank, contract.h, "Low"),
    hardware=hw,
    software=sw,
    network=net,
    contract=contract,
    reference=Reference(1.0, 0.0),
    duration=60.0,
    seed=1,
    clamp_latency=True,
)
res = run(sc)
print("contract satisfied:", res.verdict.satisfied)
print("metrics:", res.metrics)
print("final output:", res.y[-1])

# %%
rep = monte_carlo(sc, 50)
print(f"pass fraction {rep.pass_fraction:.2f}, latency mean {rep.latency_mean * 1e3:.3f} ms "
      f"(predicted {rep.predicted_latency_mean * 1e3:.3f} ms), max |y| {rep.max_abs_output:.3f}")
