"""Comparing measurement designs by their slope-information sums.

For straight-line regression the precision of the slope estimate is
proportional to S_x = sum of squared design points. Two ways to double a
ten-point design on [0, 1]: repeat every point, or interlace new points
between the old ones. The interlaced design looks richer but carries
slightly less slope information.
"""

from relinfo import base_design, doubled_design, interlaced_design, sx, variance_ratio

base = base_design()
doubled = doubled_design()
interlaced = interlaced_design()

for name, d in [("base", base), ("doubled", doubled), ("interlaced", interlaced)]:
    value = sx(d)
    print(f"S_x({name:10s}) = {value}  ({float(value):.6f})")

ratio = variance_ratio(doubled, interlaced)
print(f"\ninterlaced precision relative to doubled: {float(ratio):.4f} "
      f"({float(ratio) * 100:.0f}%)")
print("interlacing spreads points toward the middle, where they pin the "
      "line down less.")
