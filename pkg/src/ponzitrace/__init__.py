"""ponzitrace: static invest/reward flow analysis of EVM bytecode.

Disassembles a contract, recovers its control-flow graph, stack-executes the
entry-to-terminator paths with provenance tracking, and reports whether the
contract shows the two structural Ponzi characteristics: a shared
invest/reward path on one storage slot, and a rewarding loop containing an
Ether transfer.
"""

from .bytecode import Bytecode, Instruction, disassemble, parse_hex
from .cfg import BasicBlock, Cfg, CfgEdge, build_cfg, find_back_edges, partition_blocks
from .detect import (
    AnalysisReport,
    C1Verdict,
    C2Verdict,
    NO_PONZI_EVIDENCE,
    PONZI_CANDIDATE,
    SUSPICIOUS,
    evaluate_c1,
    evaluate_c2,
)
from .opcodes import OpcodeSpec, opcode_spec
from .paths import (
    AggregatedPath,
    Bounds,
    ExecutionPath,
    LoopAnnotation,
    aggregate_paths,
    classify_path,
    detect_call_loops,
    enumerate_paths,
    path_signature,
)
from .pipeline import analyze_bytecode, opcode_listing
from .report import from_json, report_to_dict, to_json
from .symexec import (
    MachineState,
    PathEffects,
    SlotCanonicalizer,
    StorageSlot,
    SymValue,
    canonical_slot,
    execute_path,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "AggregatedPath",
    "AnalysisReport",
    "BasicBlock",
    "Bounds",
    "Bytecode",
    "C1Verdict",
    "C2Verdict",
    "Cfg",
    "CfgEdge",
    "ExecutionPath",
    "Instruction",
    "LoopAnnotation",
    "MachineState",
    "NO_PONZI_EVIDENCE",
    "OpcodeSpec",
    "PONZI_CANDIDATE",
    "PathEffects",
    "SUSPICIOUS",
    "SlotCanonicalizer",
    "StorageSlot",
    "SymValue",
    "aggregate_paths",
    "analyze_bytecode",
    "build_cfg",
    "canonical_slot",
    "classify_path",
    "detect_call_loops",
    "disassemble",
    "enumerate_paths",
    "evaluate_c1",
    "evaluate_c2",
    "execute_path",
    "find_back_edges",
    "from_json",
    "opcode_listing",
    "opcode_spec",
    "parse_hex",
    "partition_blocks",
    "path_signature",
    "report_to_dict",
    "step",
    "to_json",
]
