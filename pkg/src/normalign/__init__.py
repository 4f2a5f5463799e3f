"""Measure how well norms over a finite world align with values."""

__version__ = "0.1.0"

from normalign.alignment import (
    AlignmentMatrix,
    AlignmentReport,
    AlignmentRequest,
    Weighting,
    aggregated_alignment,
    alignment_matrix,
    degree_of_alignment,
    relative_alignment,
)
from normalign.norms import Norm, NormRule, NormativeWorld, apply_norm, apply_norm_set
from normalign.preferences import (
    Agent,
    Catalog,
    aggregate_agents,
    aggregate_values,
    eval_pref,
    validate_specs,
)
from normalign.world import Path, PathSet, State, Transition, World, enumerate_paths, successors, validate_world
