# The embedded interior-point solver on toy feasibility problems.
# min t  s.t.  F0 + sum_i x_i F_i + t*1 >= 0 ; t* > 0 certifies infeasibility.
import numpy as np

from lossyqkd.sdp import SdpProblem, check_feasibility, feasibility_transform, solve

F0 = np.diag([-1.0, 3.0])
prob = SdpProblem(np.zeros(0), F0, np.zeros((0, 2, 2)))
res = solve(feasibility_transform(prob))
print("t* =", res.x[-1], " status", res.status.value, " iterations", res.iterations)
print("dual Z concentrates on the negative direction:\n", res.Z.round(8))
print("d* = -Tr(F0 Z) =", res.dual_value)

# a traceless free direction can repair a negative eigenvalue
F1 = np.diag([1.0, -1.0])
verdict = check_feasibility(SdpProblem(np.zeros(1), F0, F1[None]))
print("\nwith free direction diag(1,-1):", verdict.decision.value, "t* =", round(verdict.t_star, 9),
      "x =", verdict.x.round(6))

# per-iteration history, including the weak duality residual
for h in res.history[:4]:
    print({k: float(f"{v:.3e}") for k, v in h.items()})
