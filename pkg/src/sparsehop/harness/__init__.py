from .patterns import (
    corrupt,
    load_patterns,
    read_matrix_csv,
    retrieval_success,
    save_patterns,
    synthesize_patterns,
)
from .sweeps import (
    ExperimentConfig,
    SweepRow,
    capacity_bound_cells,
    capacity_bound_table,
    capacity_sweep,
    robustness_sweep,
    sweep_csv,
)
