"""From a directed graph to structural shocks and impulse responses.

Once every edge is directed, the innovations admit a recursive
structural representation.  Impulse responses on the observed scale are
computed by Monte Carlo, pushing simulated latent paths through the
empirical quantile transform; the linearized response is the small-shock
closed form.  With Gaussian data the two coincide up to simulation
noise.
"""

import numpy as np

import copulavar as cv
from copulavar.irf import EmpiricalMarginal, IrfRequest

design = cv.SimDesign("v_structure", a=0.25, n_clusters=1, n=5000, seed=3)
panel, truth = cv.generate_cluster_var(design)

# structural model on the true innovation covariance and reference DAG
model = cv.structural_coefficients(truth.sigma_eps_true, truth.reference, truth.a_true)
print("topological order:", [panel.names[i] for i in model.order])
print("contemporaneous coefficients (row = equation):")
print(np.round(model.delta, 3))
print("structural shock variances:", np.round(model.sigma_xi, 3))

# impulse response of x3 to a one-sigma shock in x1
horizons = tuple(range(9))
request = IrfRequest(
    shock_index=0, response_index=2, delta=0.5,
    horizons=horizons, mc_draws=20_000, seed=42,
)
marginals = [EmpiricalMarginal(panel.values[:, j]) for j in range(panel.k)]
mc, stderr = cv.irf_mc(model, marginals, request)
linearized = cv.irf_linearized(
    model,
    IrfRequest(0, 2, 0.5, horizons=horizons, mode="linearized"),
)

print("\n horizon   monte-carlo   (stderr)    linearized")
for s, value, se, lin in zip(horizons, mc, stderr, linearized):
    print(f"  {s:5d}   {value:11.4f}   ({se:.4f})   {lin:10.4f}")

request0 = IrfRequest(0, 2, 0.0, horizons=horizons, mc_draws=1000, seed=42)
zeros, _ = cv.irf_mc(model, marginals, request0)
print("\nzero-size shock responds exactly zero:", bool(np.all(zeros == 0.0)))
print("(shocked and baseline paths share every random draw)")
