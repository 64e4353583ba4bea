# %% [markdown]
# # Structured estimation of a Markov chain
#
# With indicator features the Koopman matrix of a finite Markov chain is its
# transition matrix.  NSDMD constrains the estimate to be nonnegative and
# row-stochastic, and the Perron-Frobenius matrix is its transpose.

# %%
import numpy as np

from robust_koopman.nsdmd import nsdmd_robust, pf_estimate
from robust_koopman.simulators import streams
from robust_koopman.snapshots import assemble_features

T = np.array([[0.9, 0.1], [0.2, 0.8]])
u = streams(0, 1)[0].uniform(size=5000)
s = np.zeros(5000, dtype=int)
for t in range(4999):
    s[t + 1] = int(u[t] > T[s[t], 0])

# %%
Psi = np.eye(2)[s]
res = nsdmd_robust(assemble_features(Psi[:-1], Psi[1:]), np.eye(2))
print("estimated transition matrix\n", np.round(res.markov, 4))
print("row sums", res.markov.sum(axis=1), "violation", res.constraint_violation)
print("Perron-Frobenius matrix\n", np.round(pf_estimate(res), 4))
