from qeck.stabilizer.tableau import (
    MeasurementOutcome,
    Tableau,
    apply_gate,
    canonicalize,
    fresh,
    measure,
    states_equal,
    subset_separable,
)

__all__ = [
    "MeasurementOutcome",
    "Tableau",
    "apply_gate",
    "canonicalize",
    "fresh",
    "measure",
    "states_equal",
    "subset_separable",
]
