"""Exception hierarchy shared by all estimation modules.

Numerical failures (singular systems, non-convergence, degenerate inputs)
and identification failures (a partially directed graph where a DAG is
required) are kept distinct so that callers, in particular the CLI, can
map them to different exit codes.
"""


class CopulaVarError(Exception):
    """Base class for all errors raised by this package."""


class NumericalError(CopulaVarError):
    """A computation failed for numerical reasons (singularity, divergence)."""


class IdentificationError(CopulaVarError):
    """The causal structure is not identified (undirected edges remain)."""
