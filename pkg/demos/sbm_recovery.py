"""Sample a block model, threshold its adjacency matrix and compare the
estimate with the raw adjacency as an estimator of the edge probabilities."""

import numpy as np

from graphon_usvt import (from_sbm, mse, probability_matrix, sample_adjacency, sample_latents,
                          stream_rng, usvt_estimate)

B = np.array([[0.8, 0.1, 0.2],
              [0.1, 0.6, 0.1],
              [0.2, 0.1, 0.7]])
W = from_sbm(B)
print("operator eigenvalues:", np.round(W.eigenvalues, 4))
print("eig(B) / 3:          ", np.round(np.sort(np.linalg.eigvalsh(B))[::-1] / 3, 4))

for n in (150, 300, 600, 1200):
    rng = stream_rng(7, n)
    M = probability_matrix(W, sample_latents(n, rng))
    A = sample_adjacency(M, rng)
    est = usvt_estimate(A)
    print(f"n={n:5d}  kept {est.retained_rank} components  "
          f"MSE(estimate) {mse(est.M_hat, M):.4f}  MSE(adjacency) {mse(A, M):.4f}")
