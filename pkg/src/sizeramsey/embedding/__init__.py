"""Embedding engines: trees in expanders, tree blow-ups, cycles in candidate sets, orchestration."""
from .blowup import (BlowupResult, LiftResult, dense_pairs_lift, layer_host, lift_blue_tree,
                     monochromatic_tree_blowup, tree_blowup_pattern)
from .cycles import CandidateAssignment, CyclePipelineResult, embed_cycle, embed_cycles_pipeline
from .expansion import ExpansionReport, JointReport, PruneReport, alpha_joint_check, expansion_check, prune_to_expander
from .pattern import SearchResult, embed_pattern
from .ramsey import QPartitionResult, RamseyResult, qpartition_or_cliques, ramsey_embed
from .trees import DichotomyResult, embed_tree_fp, tree_or_qpartite

__all__ = [
    "BlowupResult", "LiftResult", "dense_pairs_lift", "layer_host", "lift_blue_tree", "monochromatic_tree_blowup",
    "tree_blowup_pattern", "CandidateAssignment", "CyclePipelineResult", "embed_cycle", "embed_cycles_pipeline",
    "ExpansionReport", "JointReport", "PruneReport", "alpha_joint_check", "expansion_check", "prune_to_expander",
    "SearchResult", "embed_pattern", "QPartitionResult", "RamseyResult", "qpartition_or_cliques", "ramsey_embed",
    "DichotomyResult", "embed_tree_fp", "tree_or_qpartite",
]
