"""Active learning for bipartite matching via adversarial zero-sum games."""

from .abm import (
    ModelParams,
    TrainConfig,
    TrainTelemetry,
    information_profile,
    load_model,
    mutual_information,
    node_entropy,
    potentials,
    predict,
    sample_information,
    save_model,
    train,
    value_of_information,
)
from .active import (
    ActiveLoopEngine,
    CurveRecord,
    LoopConfig,
    PoolState,
    curve_csv,
    evaluate_hamming,
    oracle_answer,
    run_active_loop,
    run_curves,
    score_pool,
    select_sample,
    summarize_curves,
)
from .data import (
    Dataset,
    MatchingInstance,
    extract_features,
    gen_synthetic,
    ingest_mot,
    load_dataset,
    save_dataset,
    split,
)
from .game import (
    Equilibrium,
    GameConfig,
    MixedStrategy,
    adversary_best_response,
    double_oracle_equilibrium,
    pairwise_marginals,
    predictor_best_response,
    solve_matrix_game,
    unary_marginals,
)
from .matching import (
    Permutation,
    WeightMatrix,
    brute_force_matching,
    hamming_distance,
    matching_weight,
    max_weight_matching,
)
from .ssvm import (
    PlattParams,
    platt_fit,
    platt_prob,
    ssvm_predict,
    ssvm_train,
    ssvm_uncertainty,
)

__version__ = "0.1.0"
