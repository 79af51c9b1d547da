# Two-way check: is there a separable (PPT) state matching the observed data?
# If not, the dual solution is a decomposable witness with negative value.
from lossyqkd.channel import ChannelParams, apply_channel, correlations
from lossyqkd.protocols import get_protocol
from lossyqkd.verifier import build_equivalence_class, two_way_check, witness_value

spec = get_protocol("six-state")
for e in (0.5, 0.6, 0.7):
    data = correlations(spec, apply_channel(spec, ChannelParams(0.0, e)))
    ec = build_equivalence_class(data)
    report = two_way_check(ec)
    w = report.witness
    print(f"e={e}: {report.decision.value:17s} t*={report.t_star:+.5f}  Tr W={w.trace:.6f}  "
          f"<W>={w.value:+.5f}  free overlap {w.max_free_overlap:.1e}")

# the witness found at e=0.5 evaluated on other data, using only measured values
data = correlations(spec, apply_channel(spec, ChannelParams(0.0, 0.5)))
w = two_way_check(build_equivalence_class(data)).witness
for e in (0.3, 0.5, 0.6, 0.66, 0.7):
    other = correlations(spec, apply_channel(spec, ChannelParams(0.0, e)))
    print(f"  witness on e={e}: {witness_value(w, other):+.5f}")

coeffs = w.to_dict()["coefficients"]
print("nonzero witness coefficients:", {k: round(v, 4) for k, v in coeffs.items() if abs(v) > 1e-8})
