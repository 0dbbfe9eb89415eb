from qeck.oracle.density import (
    DensityMatrix,
    apply_unitary,
    measure_z,
    partial_trace,
    tableau_to_density,
)

__all__ = [
    "DensityMatrix",
    "apply_unitary",
    "measure_z",
    "partial_trace",
    "tableau_to_density",
]
