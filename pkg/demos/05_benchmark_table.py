"""Reproduce a row of the finite-sample benchmark table at desk scale.

Compares the full estimator against two naive baselines on the same
replications: "lambda=0" drops sparsity (dense inverse), "A=0" drops the
time-series step and runs causal discovery straight on the observed
panel.  Strong persistence makes the second baseline collapse.
"""

import warnings

import copulavar as cv

# the misspecified baseline produces orientation conflicts by design
warnings.filterwarnings("ignore", message="conflicting orientation")

design = cv.SimDesign("v_structure", a=0.75, n_clusters=3, n=2000, seed=29)
print(f"design: {design.structure}, persistence {design.a}, "
      f"{design.k} variables, n={design.n}, 10 replications\n")

print(f"{'policy':>10} | {'SHD':>12} | {'FP':>10} | {'FN':>10} | {'|A-Ahat|op':>12}")
print("-" * 68)
for policy in ("cv", "cv/2", "lambda=0", "A=0"):
    row = cv.run_benchmark(design, method="lasso", reps=10, policy=policy)
    m, se = row.means, row.stderrs

    def cell(key, width=10):
        if m[key] != m[key]:  # A=0 reports the graph distance only
            return " " * (width - 1) + "-"
        return f"{m[key]:{width - 6}.2f} ({se[key]:.2f})"

    print(f"{policy:>10} | {cell('shd', 12)} | {cell('fp')} | {cell('fn')} "
          f"| {cell('dist_a', 12)}")

print("\nthe A=0 baseline mistakes persistence for contemporaneous causation;")
print("the dense baseline keeps every false positive the threshold would drop")
