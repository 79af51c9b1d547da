# Threshold curves e*(p): bisection in e at fixed loss, written as CSV.
import sys

from lossyqkd.scan import ScanConfig, loss_cutoff, rows_to_csv, threshold_scan

for mode in ("two-way", "rr", "dr"):
    cfg = ScanConfig("two-state", mode, alpha=0.3, p_min=0.0, p_max=0.8, p_steps=5, tol=1e-3)
    print(f"# two-state alpha=0.3, {mode}")
    sys.stdout.write(rows_to_csv(threshold_scan(cfg)))

# past 1 - 2 alpha^2 unambiguous discrimination breaks every two-way key
for alpha in (0.2, 0.3, 0.4):
    print(f"alpha={alpha}: curve reaches zero at p={loss_cutoff('two-state', alpha=alpha, e_level=0.0):.4f}"
          f" (1 - 2 alpha^2 = {1 - 2 * alpha**2:.2f})")
