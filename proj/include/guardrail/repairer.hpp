#pragma once

#include <string>

#include "guardrail/backends.hpp"

namespace guardrail::repairer {

// Inputs for one fixing pass: the original question, the retrieved context,
// the hallucinated answer, and the detector's hallucination reason. All
// fields must be non-empty (the reason may be the indeterminate marker).
struct RepairRequest {
    std::string question;
    std::string context;
    std::string answer;
    std::string reason;
};

// Throws std::invalid_argument when a field is empty.
void validate_request(const RepairRequest& req);

struct RepairResult {
    std::string corrected_answer;
    bool repaired = false;  // false -> corrected_answer equals the input answer
};

// Deterministic fixing-prompt layout. Field values go in verbatim; consumers
// must tolerate arbitrary text.
std::string build_repair_prompt(const RepairRequest& req);

// One fixing pass, no retry. The backend completion is trimmed; when it
// echoes the original answer (exact equality after trimming), the result is
// marked unrepaired.
RepairResult repair(const RepairRequest& req, FixingBackend& fixing);

}  // namespace guardrail::repairer
