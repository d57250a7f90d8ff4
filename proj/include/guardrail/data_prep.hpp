#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "guardrail/backends.hpp"

namespace guardrail::dataprep {

// One row of a labeled hallucination classification dataset.
struct RawHaluRecord {
    std::string question;
    std::string context;
    std::string llm_answer;
    bool label = false;  // true = hallucinated
};

// A prompt/response pair ready for fine-tuning exchange.
struct TrainingRecord {
    std::string prompt;
    std::string response;
};

// Detection prompt shared between training-data prep and detector inference.
// Field values are inserted verbatim; no escaping.
std::string render_detection_prompt(const std::string& question, const std::string& context,
                                    const std::string& answer);

// Prompt sent to the reasoning service to obtain a hallucination explanation.
std::string render_reasoning_prompt(const std::string& question, const std::string& context,
                                    const std::string& answer);

struct DetectionPromptFields {
    std::string question;
    std::string context;
    std::string answer;
};

// Inverse of render_detection_prompt. Throws std::invalid_argument when the
// text does not match the template. Fields that themselves contain the literal
// block markers are not recoverable.
DetectionPromptFields parse_detection_prompt(const std::string& prompt);

enum class FailureMode {
    kAbort,  // rethrow BackendFailure with the record index
    kSkip,   // drop the failing record and continue
};

// Transforms labeled records into training records: hallucinated rows obtain
// a reason from the reasoning backend and get a "Yes, <reason>" response,
// clean rows get "No.". Output order equals input order.
std::vector<TrainingRecord> process_dataset(const std::vector<RawHaluRecord>& records,
                                            ReasoningBackend& reasoning,
                                            FailureMode mode = FailureMode::kAbort);

// JSONL exchange: {"question","context","llm_answer","label"} per line in,
// {"prompt","response"} per line out. Blank lines are skipped.
std::vector<RawHaluRecord> read_raw_records(std::istream& in);
std::vector<RawHaluRecord> read_raw_records_file(const std::string& path);
void write_training_records(std::ostream& out, const std::vector<TrainingRecord>& records);
void write_training_records_file(const std::string& path,
                                 const std::vector<TrainingRecord>& records);
std::vector<TrainingRecord> read_training_records(std::istream& in);

}  // namespace guardrail::dataprep
