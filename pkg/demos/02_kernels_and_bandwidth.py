"""Boundary kernels and bandwidth selection on a toy similarity sequence."""
import numpy as np

from dyncasc import build_kernel, kernel_for, lepski_bandwidth, smooth_similarity

for r in range(6):
    k = kernel_for(r, 4)
    print(r, [str(w) for w in k.exact], "moments", np.round(k.moments(), 12))

# noisy copies of one matrix: smoothing over more periods helps
rng = np.random.default_rng(0)
M = np.kron(np.eye(2), np.ones((10, 10)))
S = np.array([M + 0.5 * rng.normal(size=M.shape) for _ in range(8)])
for r in (0, 3, 5, 7):
    k = build_kernel(r, 1)  # flat kernel
    err = np.linalg.norm(smooth_similarity(S, 7, k) - M, 2)
    print(f"flat kernel r={r}: error {err:.2f}")

# an abrupt change two periods back stops the bandwidth from growing past it
lab = np.tile([0, 1], 10)
Z = np.eye(2)[lab]
broken = np.array([1e5 * M] * 5 + [1e5 * Z @ Z.T] * 3)
print("constant sequence r_hat:", lepski_bandwidth(np.array([M] * 8), 7, 4, 5))
print("structural break r_hat:", lepski_bandwidth(broken, 7, 4, 5))
