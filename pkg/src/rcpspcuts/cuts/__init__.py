"""Separation routines for the five cut families and the shared cut pool."""

from .cg import (assemble_cg_rows, best_interval, cg_certificate, find_cg_window, separate_cg, separate_scg,
                 strengthen_cg_rhs, strengthening_rows)
from .clique import is_clique, lift_clique, max_weight_clique, separate_cliques
from .cover import cover_counterpart, separate_cover, separate_lcv_all, separate_lifted_cover
from .oddhole import is_odd_hole, separate_odd_holes
from .pool import (FAMILIES, INSERT_ORDER, LCV_MIN_VIOLATION, MIN_VIOLATION, Cut, CutPool, merge_batches,
                   top_violated, zeta_for)
from .precedence import lpr_cut, pr_cut, separate_lifted_precedence

__all__ = [
    "Cut", "CutPool", "FAMILIES", "INSERT_ORDER", "MIN_VIOLATION", "LCV_MIN_VIOLATION", "merge_batches",
    "top_violated", "zeta_for", "separate_cover", "separate_lifted_cover", "separate_lcv_all",
    "cover_counterpart", "separate_lifted_precedence", "lpr_cut", "pr_cut", "separate_cliques",
    "max_weight_clique", "lift_clique", "is_clique", "separate_odd_holes", "is_odd_hole", "find_cg_window",
    "best_interval", "assemble_cg_rows", "separate_cg", "separate_scg", "strengthen_cg_rhs",
    "strengthening_rows", "cg_certificate",
]
