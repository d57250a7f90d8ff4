#include <doctest.h>

#include <sstream>

#include "guardrail/data_prep.hpp"
#include "guardrail/mock_backends.hpp"

using namespace guardrail;
using namespace guardrail::dataprep;

TEST_CASE("render_detection_prompt matches the frozen layout") {
    CHECK(render_detection_prompt("Who wrote it?", "The book was written by Ada.",
                                  "Bob wrote it.") ==
          "You are a hallucination detector. Given a question, a context, and an answer, "
          "decide whether the answer contains hallucination.\n"
          "#Question#: Who wrote it?\n"
          "#Context#: The book was written by Ada.\n"
          "#Answer#: Bob wrote it.\n"
          "Does the answer contain hallucination? Answer Yes or No, and explain if Yes.\n");
}

TEST_CASE("detection prompts differ only in the changed block") {
    std::string a = render_detection_prompt("q", "ctx one", "ans");
    std::string b = render_detection_prompt("q", "ctx two", "ans");
    CHECK(a != b);
    CHECK(a.substr(0, a.find("ctx one")) == b.substr(0, b.find("ctx two")));
    CHECK(a.substr(a.find("\n#Answer#: ")) == b.substr(b.find("\n#Answer#: ")));
}

TEST_CASE("empty context is permitted and keeps its block") {
    std::string prompt = render_detection_prompt("q", "", "a");
    CHECK(prompt.find("#Context#: \n#Answer#: ") != std::string::npos);
    auto fields = parse_detection_prompt(prompt);
    CHECK(fields.context.empty());
}

TEST_CASE("detection prompt round-trips through the parser") {
    std::vector<std::array<std::string, 3>> cases = {
        {"Who?", "Some context.", "An answer."},
        {"multi\nline question", "multi\nline context", "answer with trailing space "},
        {"q", "", "a"},
    };
    for (const auto& [q, c, a] : cases) {
        auto fields = parse_detection_prompt(render_detection_prompt(q, c, a));
        CHECK(fields.question == q);
        CHECK(fields.context == c);
        CHECK(fields.answer == a);
    }
    CHECK_THROWS_AS(parse_detection_prompt("not a prompt"), std::invalid_argument);
}

TEST_CASE("reasoning prompt carries the same field blocks") {
    std::string prompt = render_reasoning_prompt("q1", "c1", "a1");
    CHECK(prompt.find("#Question#: q1\n") != std::string::npos);
    CHECK(prompt.find("#Context#: c1\n") != std::string::npos);
    CHECK(prompt.find("#Answer#: a1\n") != std::string::npos);
    CHECK(prompt.rfind("#Reason#:") == prompt.size() - 9);
}

TEST_CASE("process_dataset: clean records take the No branch without a backend call") {
    MockReasoningBackend reasoning;
    std::vector<RawHaluRecord> records = {{"q", "c", "a", false}};
    auto out = process_dataset(records, reasoning);
    REQUIRE(out.size() == 1);
    CHECK(out[0].response == "No.");
    CHECK(out[0].prompt == render_detection_prompt("q", "c", "a"));
    CHECK(reasoning.call_count() == 0);
}

TEST_CASE("process_dataset: hallucinated records get a reason-backed Yes response") {
    MockReasoningBackend reasoning;
    reasoning.script("q", "c", "a", "answer contradicts the given context");
    std::vector<RawHaluRecord> records = {{"q", "c", "a", true}};
    auto out = process_dataset(records, reasoning);
    REQUIRE(out.size() == 1);
    CHECK(out[0].response == "Yes, answer contradicts the given context");
    CHECK(reasoning.call_count() == 1);
}

TEST_CASE("process_dataset preserves order and calls reasoning once per true label") {
    MockReasoningBackend reasoning;
    std::vector<RawHaluRecord> records;
    int true_count = 0;
    for (int i = 0; i < 10; ++i) {
        bool label = i % 3 == 0;
        true_count += label ? 1 : 0;
        records.push_back({"q" + std::to_string(i), "c", "a" + std::to_string(i), label});
    }
    auto out = process_dataset(records, reasoning);
    REQUIRE(out.size() == 10);
    CHECK(reasoning.call_count() == true_count);
    for (size_t i = 0; i < out.size(); ++i) {
        auto fields = parse_detection_prompt(out[i].prompt);
        CHECK(fields.question == records[i].question);
        bool is_yes = out[i].response.rfind("Yes, ", 0) == 0;
        bool is_no = out[i].response == "No.";
        CHECK(is_yes != is_no);  // exactly one of the two shapes
        CHECK(is_yes == records[i].label);
    }
}

TEST_CASE("process_dataset validates records") {
    MockReasoningBackend reasoning;
    std::vector<RawHaluRecord> bad = {{"", "c", "a", false}};
    CHECK_THROWS_AS(process_dataset(bad, reasoning), std::invalid_argument);
}

TEST_CASE("process_dataset failure modes: abort vs skip") {
    MockReasoningBackend strict(MockMissPolicy::kFail);
    std::vector<RawHaluRecord> records = {{"q0", "c", "a", false},
                                          {"q1", "c", "a", true},
                                          {"q2", "c", "a", false}};
    try {
        process_dataset(records, strict, FailureMode::kAbort);
        FAIL("expected BackendFailure");
    } catch (const BackendFailure& e) {
        CHECK(std::string(e.what()).find("record 1") != std::string::npos);
    }

    auto skipped = process_dataset(records, strict, FailureMode::kSkip);
    REQUIRE(skipped.size() == 2);
    CHECK(skipped[0].response == "No.");
    CHECK(skipped[1].response == "No.");
}

TEST_CASE("raw and training records round-trip as JSONL") {
    std::string raw_jsonl =
        R"({"question":"q1","context":"c1","llm_answer":"a1","label":true})"
        "\n"
        R"({"question":"q2","llm_answer":"a2","label":false})"
        "\n";
    std::istringstream in(raw_jsonl);
    auto records = read_raw_records(in);
    REQUIRE(records.size() == 2);
    CHECK(records[0].label);
    CHECK(records[1].context.empty());  // context is optional on input

    MockReasoningBackend reasoning;
    auto training = process_dataset(records, reasoning);
    std::ostringstream out;
    write_training_records(out, training);

    std::istringstream back(out.str());
    auto reloaded = read_training_records(back);
    REQUIRE(reloaded.size() == training.size());
    for (size_t i = 0; i < training.size(); ++i) {
        CHECK(reloaded[i].prompt == training[i].prompt);
        CHECK(reloaded[i].response == training[i].response);
    }
}

TEST_CASE("malformed raw JSONL reports the line") {
    std::istringstream in("{\"question\": \"q\"\n");
    try {
        read_raw_records(in);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
}
