#include <doctest.h>

#include "guardrail/mock_backends.hpp"
#include "guardrail/repairer.hpp"

using namespace guardrail;
using namespace guardrail::repairer;

TEST_CASE("build_repair_prompt matches the frozen layout") {
    RepairRequest req{"Where is the Eiffel Tower?", "The Eiffel Tower is in Paris.",
                      "It is in London.", "the answer names the wrong city"};
    CHECK(build_repair_prompt(req) ==
          "#Question#: Where is the Eiffel Tower?\n"
          "#Context#: The Eiffel Tower is in Paris.\n"
          "#Answer#: It is in London.\n"
          "#Hallucination Reason#: the answer names the wrong city\n"
          "Rewrite the answer so it is faithful to the context and free of the described "
          "hallucination.\n"
          "#Corrected Answer#:");
}

TEST_CASE("prompts differing only in reason differ only in the reason block") {
    RepairRequest a{"q", "c", "a", "reason one"};
    RepairRequest b{"q", "c", "a", "reason two"};
    std::string pa = build_repair_prompt(a);
    std::string pb = build_repair_prompt(b);

    size_t prefix = 0;
    while (prefix < pa.size() && prefix < pb.size() && pa[prefix] == pb[prefix]) ++prefix;
    // common prefix runs through the reason label
    CHECK(pa.substr(0, prefix).find("#Hallucination Reason#: ") != std::string::npos);
    // identical tail after the reason text
    std::string tail =
        "\nRewrite the answer so it is faithful to the context and free of the described "
        "hallucination.\n#Corrected Answer#:";
    CHECK(pa.substr(pa.size() - tail.size()) == tail);
    CHECK(pb.substr(pb.size() - tail.size()) == tail);
}

TEST_CASE("field values with newlines survive verbatim") {
    RepairRequest req{"line1\nline2", "ctx\nwith\nbreaks", "ans", "reason"};
    std::string prompt = build_repair_prompt(req);
    CHECK(prompt.find("#Question#: line1\nline2\n#Context#: ") != std::string::npos);
    CHECK(prompt.find("#Context#: ctx\nwith\nbreaks\n#Answer#: ") != std::string::npos);
}

TEST_CASE("prompt determinism") {
    RepairRequest req{"q", "c", "a", "r"};
    CHECK(build_repair_prompt(req) == build_repair_prompt(req));
}

TEST_CASE("empty fields are rejected") {
    CHECK_THROWS_AS(build_repair_prompt({"", "c", "a", "r"}), std::invalid_argument);
    CHECK_THROWS_AS(build_repair_prompt({"q", "", "a", "r"}), std::invalid_argument);
    CHECK_THROWS_AS(build_repair_prompt({"q", "c", "", "r"}), std::invalid_argument);
    CHECK_THROWS_AS(build_repair_prompt({"q", "c", "a", ""}), std::invalid_argument);
}

TEST_CASE("repair returns the scripted correction") {
    RepairRequest req{"Where is the Eiffel Tower?", "The Eiffel Tower is in Paris.",
                      "It is in London.", "wrong city"};
    MockFixingBackend fixing;
    fixing.script(build_repair_prompt(req), "Paris");

    auto result = repair(req, fixing);
    CHECK(result.repaired);
    CHECK(result.corrected_answer == "Paris");
}

TEST_CASE("repair trims the completion") {
    RepairRequest req{"q", "c", "wrong answer", "r"};
    MockFixingBackend fixing;
    fixing.script(build_repair_prompt(req), "  padded correction \n");
    auto result = repair(req, fixing);
    CHECK(result.repaired);
    CHECK(result.corrected_answer == "padded correction");
}

TEST_CASE("repair detects an echoed answer") {
    RepairRequest req{"q", "c", "the same answer", "r"};
    MockFixingBackend echo(MockFixingMode::kEcho);
    auto result = repair(req, echo);
    CHECK_FALSE(result.repaired);
    CHECK(result.corrected_answer == "the same answer");

    // echo detection is equality after trimming
    MockFixingBackend padded;
    padded.script(build_repair_prompt(req), "  the same answer  ");
    auto padded_result = repair(req, padded);
    CHECK_FALSE(padded_result.repaired);
    CHECK(padded_result.corrected_answer == "the same answer");
}
