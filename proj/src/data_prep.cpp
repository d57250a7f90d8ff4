#include "guardrail/data_prep.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace guardrail::dataprep {

namespace {

const std::string kDetectionHeader =
    "You are a hallucination detector. Given a question, a context, and an answer, "
    "decide whether the answer contains hallucination.\n#Question#: ";
const std::string kContextMarker = "\n#Context#: ";
const std::string kAnswerMarker = "\n#Answer#: ";
const std::string kDetectionTail =
    "\nDoes the answer contain hallucination? Answer Yes or No, and explain if Yes.\n";

}  // namespace

std::string render_detection_prompt(const std::string& question, const std::string& context,
                                    const std::string& answer) {
    std::string prompt;
    prompt.reserve(kDetectionHeader.size() + question.size() + kContextMarker.size() +
                   context.size() + kAnswerMarker.size() + answer.size() +
                   kDetectionTail.size());
    prompt += kDetectionHeader;
    prompt += question;
    prompt += kContextMarker;
    prompt += context;
    prompt += kAnswerMarker;
    prompt += answer;
    prompt += kDetectionTail;
    return prompt;
}

std::string render_reasoning_prompt(const std::string& question, const std::string& context,
                                    const std::string& answer) {
    std::string prompt =
        "The answer below is known to contain hallucination. Explain briefly why the "
        "answer is inaccurate or unfaithful to the context.\n#Question#: ";
    prompt += question;
    prompt += kContextMarker;
    prompt += context;
    prompt += kAnswerMarker;
    prompt += answer;
    prompt += "\n#Reason#:";
    return prompt;
}

DetectionPromptFields parse_detection_prompt(const std::string& prompt) {
    if (prompt.rfind(kDetectionHeader, 0) != 0) {
        throw std::invalid_argument("not a detection prompt: bad header");
    }
    if (prompt.size() < kDetectionHeader.size() + kDetectionTail.size() ||
        prompt.compare(prompt.size() - kDetectionTail.size(), kDetectionTail.size(),
                       kDetectionTail) != 0) {
        throw std::invalid_argument("not a detection prompt: bad tail");
    }
    size_t body_begin = kDetectionHeader.size();
    size_t body_end = prompt.size() - kDetectionTail.size();

    size_t context_pos = prompt.find(kContextMarker, body_begin);
    if (context_pos == std::string::npos || context_pos > body_end) {
        throw std::invalid_argument("not a detection prompt: no context block");
    }
    size_t answer_pos = prompt.find(kAnswerMarker, context_pos + kContextMarker.size());
    if (answer_pos == std::string::npos || answer_pos > body_end) {
        throw std::invalid_argument("not a detection prompt: no answer block");
    }

    DetectionPromptFields fields;
    fields.question = prompt.substr(body_begin, context_pos - body_begin);
    size_t context_begin = context_pos + kContextMarker.size();
    fields.context = prompt.substr(context_begin, answer_pos - context_begin);
    size_t answer_begin = answer_pos + kAnswerMarker.size();
    fields.answer = prompt.substr(answer_begin, body_end - answer_begin);
    return fields;
}

std::vector<TrainingRecord> process_dataset(const std::vector<RawHaluRecord>& records,
                                            ReasoningBackend& reasoning, FailureMode mode) {
    std::vector<TrainingRecord> out;
    out.reserve(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.question.empty() || r.llm_answer.empty()) {
            throw std::invalid_argument("record " + std::to_string(i) +
                                        ": question and llm_answer must be non-empty");
        }
        TrainingRecord t;
        t.prompt = render_detection_prompt(r.question, r.context, r.llm_answer);
        if (r.label) {
            try {
                t.response = "Yes, " + reasoning.explain(r.question, r.context, r.llm_answer);
            } catch (const BackendFailure& e) {
                if (mode == FailureMode::kSkip) continue;
                throw BackendFailure("record " + std::to_string(i) + ": " + e.what());
            }
        } else {
            t.response = "No.";
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<RawHaluRecord> read_raw_records(std::istream& in) {
    std::vector<RawHaluRecord> records;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
        }
        RawHaluRecord r;
        r.question = j.at("question").get<std::string>();
        r.context = j.value("context", std::string{});
        r.llm_answer = j.at("llm_answer").get<std::string>();
        r.label = j.at("label").get<bool>();
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<RawHaluRecord> read_raw_records_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_raw_records(in);
}

void write_training_records(std::ostream& out, const std::vector<TrainingRecord>& records) {
    for (const auto& r : records) {
        nlohmann::json j{{"prompt", r.prompt}, {"response", r.response}};
        out << j.dump() << '\n';
    }
}

void write_training_records_file(const std::string& path,
                                 const std::vector<TrainingRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    write_training_records(out, records);
}

std::vector<TrainingRecord> read_training_records(std::istream& in) {
    std::vector<TrainingRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        records.push_back({j.at("prompt").get<std::string>(),
                           j.at("response").get<std::string>()});
    }
    return records;
}

}  // namespace guardrail::dataprep
