# Generators Package
from generators.synthetic_generator import (
    AdjacencyMode,
    AdjacentPair,
    CovariateFamily,
    ModelSpec,
    SyntheticGenerator,
    generate,
    make_adjacent,
    redraw_labels,
)
