"""Combinatorial laboratory for the 3-CNF formula space."""

from .formula import (Clause, Formula, FormulaError, clause_from_signature, clause_universe,
                      emit_dimacs, falsify_set, formula_signature, parse_dimacs, signature_of,
                      size_of)
from .sat import (InsBounds, InsCertificate, covering_clauses, ins_bounds, ins_certificate,
                  is_ins_by_deletion, is_unsat_bruteforce, is_unsat_cover)

__all__ = [
    "Clause", "Formula", "FormulaError", "clause_from_signature", "clause_universe",
    "emit_dimacs", "falsify_set", "formula_signature", "parse_dimacs", "signature_of",
    "size_of", "InsBounds", "InsCertificate", "covering_clauses", "ins_bounds",
    "ins_certificate", "is_ins_by_deletion", "is_unsat_bruteforce", "is_unsat_cover",
]
__version__ = "0.1.0"
