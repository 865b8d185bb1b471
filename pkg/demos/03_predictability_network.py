"""Infer a lead-lag network from returns and test community momentum."""
import numpy as np

from dyncasc import (LassoConfig, MembershipSequence, ReturnPanel, infer_network, run_backtest,
                     split_by_regime)

rng = np.random.default_rng(1)
T, k, size = 600, 4, 8
N = k * size
lab = np.repeat(np.arange(k), size)

# returns load on yesterday's mean return of the same community (a spillover)
R = np.zeros((T, N))
for t in range(1, T):
    tot = np.bincount(lab, weights=R[t - 1], minlength=k)[lab]
    R[t] = 0.4 * (tot - R[t - 1]) / (size - 1) + 0.02 * rng.normal(size=N)
panel = ReturnPanel.from_array(R, symbols=[f"C{j:02d}" for j in range(N)])

A = infer_network(panel, LassoConfig(window=360), t_end=T)
same = lab[:, None] == lab[None]
print("edges inside communities:", int(A[same].sum()), " across:", int(A[~same].sum()))

mem = MembershipSequence(np.tile(lab, (T, 1)), np.tile(lab, (T, 1)), k, k)
res = run_backtest(panel, mem)
for row in res.table():
    if row["portfolio"] == "WML":
        print(f"h={row['horizon']}  mean {row['mean']:+.5f}  t {row['tstat']:+.2f}")

# split formation days by a made-up volatility indicator
days = res.days
vol = np.abs(R[days]).mean(axis=1)
low, high = split_by_regime(panel, mem, vol, days=days)
print("WML(1) low-vol", round(low.mean_long_short[0], 5), "high-vol", round(high.mean_long_short[0], 5))
