import pytest

import copulavar as cv

# One 50-replication run of the low-dimensional benchmark design is shared
# by several acceptance criteria (class recovery, support recovery, and
# parameter distances are all read off the same replications).

LOW_DIM = dict(structure="v_structure", n_clusters=3, n=5000)
REPS = 50


@pytest.fixture(scope="session")
def bench_a025_cv():
    design = cv.SimDesign(a=0.25, seed=101, **LOW_DIM)
    return cv.run_benchmark(design, method="lasso", reps=REPS, policy="cv")


@pytest.fixture(scope="session")
def bench_a025_dense():
    design = cv.SimDesign(a=0.25, seed=101, **LOW_DIM)
    return cv.run_benchmark(design, method="lasso", reps=REPS, policy="lambda=0")


@pytest.fixture(scope="session")
def bench_a075_cv_half():
    design = cv.SimDesign(a=0.75, seed=202, **LOW_DIM)
    return cv.run_benchmark(design, method="lasso", reps=REPS, policy="cv/2")


@pytest.fixture(scope="session")
def bench_a075_static():
    design = cv.SimDesign(a=0.75, seed=202, **LOW_DIM)
    return cv.run_benchmark(design, method="lasso", reps=REPS, policy="A=0")
