#include "guardrail/repairer.hpp"

#include <stdexcept>

#include "guardrail/types.hpp"

namespace guardrail::repairer {

void validate_request(const RepairRequest& req) {
    if (req.question.empty()) throw std::invalid_argument("repair request: empty question");
    if (req.context.empty()) throw std::invalid_argument("repair request: empty context");
    if (req.answer.empty()) throw std::invalid_argument("repair request: empty answer");
    if (req.reason.empty()) throw std::invalid_argument("repair request: empty reason");
}

std::string build_repair_prompt(const RepairRequest& req) {
    validate_request(req);
    std::string prompt = "#Question#: ";
    prompt += req.question;
    prompt += "\n#Context#: ";
    prompt += req.context;
    prompt += "\n#Answer#: ";
    prompt += req.answer;
    prompt += "\n#Hallucination Reason#: ";
    prompt += req.reason;
    prompt +=
        "\nRewrite the answer so it is faithful to the context and free of the described "
        "hallucination.\n#Corrected Answer#:";
    return prompt;
}

RepairResult repair(const RepairRequest& req, FixingBackend& fixing) {
    std::string prompt = build_repair_prompt(req);
    std::string completion = trim(fixing.complete(prompt));

    RepairResult result;
    if (completion == trim(req.answer)) {
        result.corrected_answer = req.answer;
        result.repaired = false;
    } else {
        result.corrected_answer = completion;
        result.repaired = true;
    }
    return result;
}

}  // namespace guardrail::repairer
