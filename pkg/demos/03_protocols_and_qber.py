# The seven protocols as entanglement-based descriptions and their QBER
# under the lossy depolarising channel.
import numpy as np

from lossyqkd.channel import ChannelParams, apply_channel, correlations, qber_analytic, qber_simulated
from lossyqkd.protocols import PROTOCOLS, get_protocol

alpha = 0.3
params = ChannelParams(p=0.4, e=0.1, theta=np.pi / 8)
print(f"{'protocol':>14} {'Bob POVM':>9} {'analytic':>10} {'simulated':>10}")
for name in PROTOCOLS:
    spec = get_protocol(name, alpha)
    rho = apply_channel(spec, params)
    print(f"{name:>14} {len(spec.bob_povm):>9} {qber_analytic(spec, params.e, params.theta):>10.6f} "
          f"{qber_simulated(spec, rho):>10.6f}")

# loss only feeds the vacuum outcome, so the QBER ignores p
spec = get_protocol("two-state", alpha)
for p in (0.0, 0.5, 0.9):
    data = correlations(spec, apply_channel(spec, ChannelParams(p, 0.1)))
    print(f"p={p}: vacuum probability {data.joint[:, -1].sum():.3f}, "
          f"QBER {qber_simulated(spec, apply_channel(spec, ChannelParams(p, 0.1))):.6f}")
