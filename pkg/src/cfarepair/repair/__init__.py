from .edge import (Budget, Change, CounterExample, EdgeResult, EdgeTask, FAILED, REPAIRED, VERIFIED,
                   repair_edge, verify_edge)
from .program import Config, RepairReport, SCHEMA, concretize, repair_program, unified_diff
from .sketch import RepairSketchForm, Position, extend, impl_space, repair_sketch
from .soundness import Domain, Evidence, Slot, soundness_check

__all__ = [
    "Budget", "Change", "CounterExample", "EdgeResult", "EdgeTask", "FAILED", "REPAIRED", "VERIFIED",
    "repair_edge", "verify_edge", "Config", "RepairReport", "SCHEMA", "concretize", "repair_program",
    "unified_diff", "RepairSketchForm", "Position", "extend", "impl_space", "repair_sketch",
    "Domain", "Evidence", "Slot", "soundness_check",
]
