"""
Start/end handshape chart
=========================

Load the shipped start/end counts, render the chart and look at how
additive smoothing moves the conditional probabilities.
"""

import numpy as np

from signphon.inventory import load_default_inventory
from signphon.transitions import SmoothingConfig, cond_matrix, cond_prob, load_shipped_stats, report

inv = load_default_inventory()
table = load_shipped_stats(inv)
print(report(table).render())

# %%
# Most signs keep their handshape. The exact ratio is available as a fraction.
print(cond_prob(table, "B-L", "B-L", SmoothingConfig(0), exact=True))

# %%
# Smoothing spreads mass over all 40 end handshapes; the identity transition
# loses a little as alpha grows.
for alpha in (0.0, 0.1, 1.0, 10.0):
    p = cond_matrix(table, SmoothingConfig(alpha))
    i = table.labels.index("B-L")
    print(f"alpha {alpha:5.1f}  P(B-L -> B-L) {p[i, i]:.4f}  "
          f"entropy {-(p[i] * np.log2(np.where(p[i] > 0, p[i], 1))).sum():.3f} bits")
