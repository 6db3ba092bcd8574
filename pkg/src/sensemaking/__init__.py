"""Sensemaking engine: frames and sign relations compiled to a Bayesian
network, a content-addressable memory settled by relaxation, and the loop
that turns a cue into evidence and a decision."""

from .bayesnet import (
    BayesNet,
    Cpt,
    Distribution,
    Variable,
    build_network,
    elimination_order,
    posterior,
    posteriors,
    prior_marginals,
)
from .frames import Frame, SignRelation, classify_relations, compile_to_bn, interpret_sign
from .loop import (
    Binding,
    DecisionRule,
    LoopParams,
    ScenarioSpec,
    SensemakingDecision,
    decide,
    extract_evidence,
    run_sensemaking,
)
from .memory import (
    CamNetwork,
    Clamp,
    Dynamics,
    Input,
    WeightConfig,
    build_cam,
    clamp,
    energy,
    settle,
    synthesize_sign,
)
from .oracle import enumerate_joint, min_energy_states
from .scenario import load, load_fixture, parse_scenario, serialize

__version__ = "0.1.0"
