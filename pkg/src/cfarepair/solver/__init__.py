from .evaluate import ArrayValue, Evaluator, Undefined, evaluate
from .session import (SAT, TIMEOUT, UNKNOWN, UNSAT, ModelValidationError, Session, SolverCrash,
                      SolverProtocolError, Verdict, WeightedQuery, validate_model)

__all__ = [
    "SAT", "UNSAT", "UNKNOWN", "TIMEOUT", "Session", "Verdict", "WeightedQuery",
    "SolverCrash", "SolverProtocolError", "ModelValidationError", "validate_model",
    "ArrayValue", "Evaluator", "Undefined", "evaluate",
]
