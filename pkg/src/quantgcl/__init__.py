"""Quantitative pre/post transformers for guarded commands.

Quantities map program states to extended reals.  Four transformers move
them through programs: wp and wlp backward (what a postquantity is worth
before running the program, valuing nontermination at -inf resp. +inf),
sp and slp forward (what a prequantity was worth in the initial states
that can reach a given final state, valuing unreachability at -inf resp.
+inf).  On top of the transformers sit proof rules (orders, loop
induction, triples, adjunction checks), an information-flow report, a
reference interpreter to test against, and randomized law suites.
"""

from .lattice import (
    ExtReal, IndeterminateFormError, NEG_INF, POS_INF, add, join, join_all,
    meet, meet_all, negate, parse_extreal, scale,
)
from .syntax import (
    Add, AExpr, And, Assign, BExpr, BoolLit, Choice, Cmp, Const, Diverge,
    DomainSpec, If, IntLit, Inf, Iverson, MissingVariableError, Mod, Mul,
    Not, Or, Program, QAdd, QMax, QMin, QNeg, QScale, Quantity, Seq, Skip,
    State, Sub, Sup, Var, While, aexpr_to_str, bexpr_to_str, eval_aexpr,
    eval_bexpr, eval_quantity, fv_quantity, program_to_str, program_vars,
    quantity_key, quantity_to_str, subst_aexpr, subst_quantity,
)
from .parser import (
    ParseError, parse_aexpr, parse_bexpr, parse_domain, parse_program,
    parse_quantity,
)
from .simplify import collapse_guards, normalize_bexpr, simplify
from .oracle import (
    DomainEscapeError, EscapePolicy, FuelExhaustedError, collect,
    reachable_from_box, ref_slp, ref_sp, ref_wlp, ref_wp,
)
from .transformers import (
    AnalysisResult, ConvergedAt, Exact, Mode, Status, TransformConfig,
    TruncatedAt, char_step, iverson_embed, transform,
)
from .proofs import (
    InternalSoundnessError, OneShotOutcome, Triple, TripleKind, Verdict,
    check_galois, check_induction, check_one_shot, check_order,
    check_triple, load_triples,
)
from .infoflow import (
    LeakEntry, LeakReport, ReachableStates, leak, leak_report_table,
    leak_report_text, reachable_states,
)
from .generators import (
    GenConfig, domain_for, gen_bounded_loop, gen_loop_free, gen_predicate,
    gen_quantity, gen_vars,
)
from .props import ALL_SUITES, SuiteResult, run_all, run_suite

__all__ = [name for name in dir() if not name.startswith("_")]
