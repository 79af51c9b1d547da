# One-way check: is there a symmetric extension to a copy of A (RR) or of B (DR)?
import numpy as np

from lossyqkd.channel import ChannelParams, apply_channel, correlations
from lossyqkd.operators import partial_trace
from lossyqkd.protocols import get_protocol
from lossyqkd.verifier import build_equivalence_class, build_extension_layout, lift_map, one_way_check

for mode in ("rr", "dr"):
    layout = build_extension_layout(mode)
    print(mode, "copies", layout.copied_system, "dims", layout.extension_dims,
          len(layout.sym_basis), "symmetric terms,", len(layout.free_indices), "free")

# the lift keeps the marginal fixed
layout = build_extension_layout("rr")
rho = np.eye(6) / 6
print("Tr_copy(lift(1/6)) == 1/6:", np.allclose(partial_trace(lift_map(rho, layout), (2, 3, 2), 2), rho))

spec = get_protocol("four-state")
for e in (0.25, 0.28, 0.30):
    ec = build_equivalence_class(correlations(spec, apply_channel(spec, ChannelParams(0.0, e))))
    line = [f"e={e}"]
    for mode in ("rr", "dr"):
        r = one_way_check(ec, mode)
        line.append(f"{mode}: {r.decision.value} (t*={r.t_star:+.2e}, LMI min "
                    f"{r.witness.certificate_min_eigenvalues['lmi']:.1e})")
    print("  ".join(line))

# with loss the two directions separate for the two-state protocol
spec = get_protocol("two-state", 0.4)
ec = build_equivalence_class(correlations(spec, apply_channel(spec, ChannelParams(0.3, 0.03))))
print("two-state alpha=0.4 p=0.3 e=0.03:",
      {m: one_way_check(ec, m).decision.value for m in ("rr", "dr")})
