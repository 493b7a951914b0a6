"""Interactive diverse itemset mining with XOR-cell sampling and
preference learning."""

from .data import (
    DatasetFormatError,
    Pattern,
    TransactionDatabase,
    closure_of,
    cover_of,
    database_from_transactions,
    load_database,
    pattern_of,
    rel_freq,
)
from .diversity import (
    DiversityConfig,
    History,
    enumerate_closed,
    jaccard,
    lower_bound,
)
from .preference import (
    AggregationConfig,
    FeatureLayout,
    RankedQuery,
    aggregate_weights,
    disc_features,
    extract_features,
    icv,
    learn_discriminating_pattern,
    learn_weights,
    pairwise_examples,
    phi_logistic,
)
from .session import (
    ReferenceSet,
    Session,
    SessionConfig,
    mine_reference_set,
    regret,
    run_experiment,
    simulated_rank,
    surprisingness,
)
from .xor import (
    CellSample,
    XorSystem,
    cdflexics_draw,
    estimate_cell_exponent,
    random_xor_system,
    sample_cell,
)

__all__ = [name for name in dir() if not name.startswith("_")]
