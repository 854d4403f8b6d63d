"""Exact small-scale laboratory for decision-tree query complexity:
distributional and randomized complexity, composed problems, a
block-structured simulator, and exhaustive verification sweeps.
"""

from .core import (
    Dist,
    FullBiasReport,
    Relation,
    Subcube,
    TruthTable,
    QclabError,
    ArityMismatch,
    CapExceeded,
    ZeroConditioningMass,
    NotARefinement,
    HypothesisViolated,
    Unachievable,
    InnerComplexityZero,
    ParseError,
    and_fn,
    bias,
    caps,
    check_fullbias,
    cond_prob,
    constant_fn,
    identity1,
    maj3,
    or_fn,
    restrict_dist,
    subcube_prob,
    xor_fn,
)
from .dtree import (
    BlockStructure,
    DecisionTree,
    InternalNode,
    Leaf,
    block_subcubes,
    make_tree,
    path_subcube,
    reach_probs_product,
)
from .complexity import (
    DPResult,
    GameResult,
    best_success,
    dist_complexity,
    hard_distribution,
    rand_complexity,
)
from .compose import (
    ComposedInstance,
    MixtureDist,
    ProductDist,
    build_instance,
    compose_relation,
    default_epsilon,
    default_theta,
    gamma,
    gamma_z,
    inner_values,
    xor_stack,
)
from .simulate import (
    AprimeSimulator,
    ChainReport,
    LeafReport,
    LilsnipReport,
    RbiasReport,
    SimileafReport,
    SimulationTrace,
    UnbiasReport,
    best_fixed_seed,
    exact_p,
    exact_q,
    leaf_reports,
    run_Aprime,
    snip_labels,
    success_chain,
    verify_lilsnip,
    verify_rbias,
    verify_simileaf,
    verify_unbias,
)
from .sweeps import (
    SweepReport,
    sweep_fullbias,
    sweep_rbias,
    sweep_unbias,
)

__all__ = [name for name in dir() if not name.startswith("_")]
