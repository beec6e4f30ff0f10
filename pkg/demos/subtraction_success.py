"""Joint probability that the two arms first succeed at cycles (i, j).

Later successes are rarer: each extra waiting cycle multiplies in another
failed-attempt branch. The matrix is symmetric in the two arms.
"""

import numpy as np

from distillery import (
    LossChannelParams,
    SubtractionParams,
    TruncationConfig,
    subtraction_probability_matrix,
)

LAM = 0.1
N = 8

p = subtraction_probability_matrix(
    LAM,
    LossChannelParams.from_tau(100.0),
    SubtractionParams(0.99),
    TruncationConfig(7),
    N,
    N,
)

print(f"P(i, j) for success cycles i, j = 1..{N}  (lambda={LAM}, tau=100, t_s=0.99)")
header = "      " + "".join(f"j={j + 1:<9d}" for j in range(N))
print(header)
for i in range(N):
    print(f"i={i + 1:<2d}  " + "".join(f"{p[i, j]:.3e} " for j in range(N)))
print(f"max asymmetry: {np.abs(p - p.T).max():.2e}")
print(f"total probability in this window: {p.sum():.3e}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not installed, skipping the figure")
else:
    fig, ax = plt.subplots(figsize=(4.5, 4))
    im = ax.imshow(np.log10(p), origin="lower", extent=(0.5, N + 0.5, 0.5, N + 0.5))
    ax.set_xlabel("arm B success cycle j")
    ax.set_ylabel("arm A success cycle i")
    fig.colorbar(im, label="log10 P(i, j)")
    fig.tight_layout()
    fig.savefig("subtraction_success.png", dpi=150)
    print("wrote subtraction_success.png")
