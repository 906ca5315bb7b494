"""The seventeen pipeline roles and their default system instructions."""

from __future__ import annotations

ROLE_NAMES = (
    # property generation
    "sva_lead",
    "spec_analyst",
    "sva_author",
    "sva_reviewer",
    "sva_patcher",
    "code_extractor",
    # syntax correction
    "syntax_analyzer",
    "syntax_fixer",
    "syntax_validator",
    # counterexample correction
    "vcd_parser",
    "spec_assertion_analyzer",
    "rtl_analyzer",
    "cex_fixer",
    # coverage improvement
    "cov_lead_agent",
    "cov_analyzer",
    "cov_processor",
    "cov_improver",
)

_INSTRUCTIONS = {
    "sva_lead": "Select a verification strategy for the requirement and keep "
                "the property work aligned with it.",
    "spec_analyst": "Decompose the requirement into testable conditions: "
                    "trigger events, responses, timing constraints, and "
                    "exceptions.",
    "sva_author": "Translate the decomposition into assertion-subset "
                  "properties over the listed design signals. Output only "
                  "property statements.",
    "sva_reviewer": "Check the properties against the requirement and the "
                    "rulebook. Answer 'approve' or 'reject: <reasons>'.",
    "sva_patcher": "Revise the rejected properties per the reviewer's "
                   "reasons. Output only property statements.",
    "code_extractor": "Assemble approved properties into the property file.",
    "syntax_analyzer": "Attribute each compile diagnostic to its property.",
    "syntax_fixer": "Repair the property so it compiles. Use the diagnostics, "
                    "the requirement text, and the signal declarations. "
                    "Output a single replacement property statement.",
    "syntax_validator": "Re-compile the patched property in isolation before "
                        "it is reintegrated.",
    "vcd_parser": "Extract the failure-window signal activity from the "
                  "counterexample waveform.",
    "spec_assertion_analyzer": "Classify the counterexample root cause as one "
                               "of: rtl_bug, over_specification, "
                               "missing_assumption, under_specification. "
                               "Answer with 'root_cause: <class>' and a "
                               "short justification.",
    "rtl_analyzer": "Trace the implicated logic paths in the RTL source and "
                    "document the suspected bug for manual correction.",
    "cex_fixer": "Correct the property: adjust constraints, add an "
                 "assumption, or strengthen the assertion. Output a single "
                 "replacement property statement.",
    "cov_lead_agent": "Prioritize coverage gaps: functional paths before "
                      "default and else arms; separate defensive code.",
    "cov_analyzer": "Determine the enabling condition for the unreachable "
                    "statement and whether a listed assumption blocks it. "
                    "Answer with 'classification: defensive' or "
                    "'classification: gap', and 'blocked_by: <node id>' when "
                    "an assumption prevents the condition.",
    "cov_processor": "Link the coverage gap to the requirements it leaves "
                     "under-verified.",
    "cov_improver": "Emit cover directives for reachability and assertions "
                    "for correctness targeting the gap. Output only property "
                    "statements.",
}


def system_instructions(role: str) -> str:
    if role not in _INSTRUCTIONS:
        raise KeyError(f"unknown agent role {role!r}")
    return _INSTRUCTIONS[role]
