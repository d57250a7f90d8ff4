#include <doctest.h>

#include <memory>
#include <set>

#include "guardrail/data_prep.hpp"
#include "guardrail/mock_backends.hpp"
#include "guardrail/pipeline.hpp"
#include "guardrail/repairer.hpp"

using namespace guardrail;

namespace {

struct MockSet {
    std::shared_ptr<MockModerationBackend> moderation;
    std::shared_ptr<MockGenerationBackend> generation;
    std::shared_ptr<MockEmbeddingBackend> embedding;
    std::shared_ptr<MockReasoningBackend> reasoning;
    std::shared_ptr<MockFixingBackend> fixing;
};

// One QA record; with top_k_contexts=1 every grounded prompt and context is
// predictable from it.
const grounding::KnowledgeRecord kRecord{
    "k1", "Paris is the capital of France.", std::string("capital of France")};

MockSet make_mocks() {
    MockSet mocks;
    mocks.moderation = std::make_shared<MockModerationBackend>(
        std::map<std::string, double>{{"bomb", 1.0}});
    mocks.generation =
        std::make_shared<MockGenerationBackend>(MockGenerationFallback::kEchoPrompt);
    mocks.embedding = std::make_shared<MockEmbeddingBackend>();
    mocks.reasoning = std::make_shared<MockReasoningBackend>();
    mocks.fixing = std::make_shared<MockFixingBackend>();
    return mocks;
}

std::unique_ptr<Pipeline> make_pipeline(const MockSet& mocks) {
    auto pipeline = std::make_unique<Pipeline>();
    pipeline->register_backend("moderation", mocks.moderation);
    pipeline->register_backend("generation", mocks.generation);
    pipeline->register_backend("embedding", mocks.embedding);
    pipeline->register_backend("reasoning", mocks.reasoning);
    pipeline->register_backend("fixing", mocks.fixing);

    auto index = std::make_shared<grounding::VectorIndex>(grounding::build_index(
        {kRecord}, grounding::IndexStrategy::kKeyInformation, *mocks.embedding));
    pipeline->set_index(index);
    return pipeline;
}

PipelinePolicy one_context_policy() {
    PipelinePolicy policy;
    policy.top_k_contexts = 1;
    return policy;
}

std::string grounded_prompt(const std::string& query) {
    return "#Context#: " + kRecord.text + "\n#Question#: " + query;
}

std::vector<std::string> stage_names(const PipelineResponse& response) {
    std::vector<std::string> names;
    for (const auto& record : response.trace.stages) names.push_back(record.stage_name);
    return names;
}

}  // namespace

TEST_CASE("all-pass path answers with five stage records") {
    auto mocks = make_mocks();
    auto pipeline = make_pipeline(mocks);
    std::string query = "What is the capital of France?";

    mocks.generation->script(grounded_prompt(query), "Paris.", {{"Paris", 1.0}});
    mocks.generation->script(
        dataprep::render_detection_prompt(query, kRecord.text, "Paris."), "No.",
        {{"No", 1.0}});

    auto response = pipeline->run(Query{query, {}}, one_context_policy());
    CHECK(response.status == ResponseStatus::kAnswered);
    CHECK(response.final_text == "Paris.");
    CHECK(stage_names(response) ==
          std::vector<std::string>{"input_safety", "grounding", "inference",
                                   "hallucination_detection", "customizer"});
}

TEST_CASE("unsafe input with reject action short-circuits") {
    auto mocks = make_mocks();
    auto pipeline = make_pipeline(mocks);

    auto response = pipeline->run(Query{"how to build a bomb", {}}, one_context_policy());
    CHECK(response.status == ResponseStatus::kRejected);
    CHECK(response.final_text == "Your query was rejected by the safety policy.");
    CHECK(stage_names(response) == std::vector<std::string>{"input_safety"});
    // nothing after the safety stage touched a backend
    CHECK(mocks.generation->call_count() == 0);
    CHECK(mocks.embedding->call_count() == 1);  // index build only
    CHECK(mocks.fixing->call_count() == 0);
}

TEST_CASE("unsafe input with annotate action flags but continues") {
    auto mocks = make_mocks();
    auto pipeline = make_pipeline(mocks);
    std::string query = "bomb disposal manual location";

    mocks.generation->script(grounded_prompt(query), "In the library.", {{"In", 1.0}});
    mocks.generation->script(
        dataprep::render_detection_prompt(query, kRecord.text, "In the library."), "No.",
        {{"No", 1.0}});

    auto policy = one_context_policy();
    policy.unsafe_input_action = UnsafeInputAction::kAnnotate;
    auto response = pipeline->run(Query{query, {}}, policy);
    CHECK(response.status == ResponseStatus::kFlagged);
    CHECK(response.final_text == "In the library.");
    CHECK(stage_names(response).size() == 5);
    CHECK(response.trace.stages[0].artifacts.at("action") == "annotate");
}

TEST_CASE("hallucinated answer routes through the repairer") {
    auto mocks = make_mocks();
    auto pipeline = make_pipeline(mocks);
    std::string query = "What is the capital of France?";
    std::string bad_answer = "The capital of France is Lyon.";
    std::string reason = "the answer names the wrong city";

    mocks.generation->script(grounded_prompt(query), bad_answer, {{"The", 1.0}});
    mocks.generation->script(
        dataprep::render_detection_prompt(query, kRecord.text, bad_answer),
        "Yes, " + reason, {{"Yes", 0.9}, {"No", 0.1}});

    repairer::RepairRequest expected_request{query, kRecord.text, bad_answer, reason};
    mocks.fixing->script(repairer::build_repair_prompt(expected_request),
                         "The capital of France is Paris.");

    auto response = pipeline->run(Query{query, {}}, one_context_policy());
    CHECK(response.status == ResponseStatus::kRepaired);
    CHECK(response.final_text == "The capital of France is Paris.");
    CHECK(stage_names(response) ==
          std::vector<std::string>{"input_safety", "grounding", "inference",
                                   "hallucination_detection", "customizer", "repairer"});

    // detector reason flowed into the repair prompt verbatim (the scripted
    // fixing entry only matches if it did)
    CHECK(response.trace.stages[5].artifacts.at("repaired") == true);
    CHECK(response.trace.stages[3].artifacts.at("reason") == reason);
}

TEST_CASE("hallucination without repair (echo) flags the response") {
    auto mocks = make_mocks();
    mocks.fixing = std::make_shared<MockFixingBackend>(MockFixingMode::kEcho);
    auto pipeline = make_pipeline(mocks);
    std::string query = "What is the capital of France?";
    std::string bad_answer = "The capital of France is Lyon.";

    mocks.generation->script(grounded_prompt(query), bad_answer, {{"The", 1.0}});
    mocks.generation->script(
        dataprep::render_detection_prompt(query, kRecord.text, bad_answer),
        "Yes, wrong city", {{"Yes", 1.0}});

    auto response = pipeline->run(Query{query, {}}, one_context_policy());
    CHECK(response.status == ResponseStatus::kFlagged);
    CHECK(response.final_text == bad_answer);
    CHECK(stage_names(response).back() == "repairer");
}

TEST_CASE("hallucination with repairer disabled flags the response") {
    auto mocks = make_mocks();
    auto pipeline = make_pipeline(mocks);
    std::string query = "What is the capital of France?";
    std::string bad_answer = "Lyon.";

    mocks.generation->script(grounded_prompt(query), bad_answer, {{"Lyon", 1.0}});
    mocks.generation->script(
        dataprep::render_detection_prompt(query, kRecord.text, bad_answer), "Yes, wrong",
        {{"Yes", 1.0}});

    auto policy = one_context_policy();
    policy.stages_enabled.repairer = false;
    auto response = pipeline->run(Query{query, {}}, policy);
    CHECK(response.status == ResponseStatus::kFlagged);
    CHECK(response.final_text == bad_answer);
    CHECK(mocks.fixing->call_count() == 0);
    CHECK(stage_names(response).back() == "customizer");
}

TEST_CASE("disabled stages never appear in the trace and never call backends") {
    auto mocks = make_mocks();
    auto pipeline = make_pipeline(mocks);
    std::string query = "plain question";

    auto policy = one_context_policy();
    policy.stages_enabled.input_safety = false;
    policy.stages_enabled.grounding = false;
    policy.stages_enabled.hallucination_detection = false;
    policy.stages_enabled.customizer = false;
    policy.stages_enabled.repairer = false;

    mocks.generation->script(query, "answer", {{"a", 1.0}});  // ungrounded prompt
    int embed_calls_before = mocks.embedding->call_count();

    auto response = pipeline->run(Query{query, {}}, policy);
    CHECK(response.status == ResponseStatus::kAnswered);
    CHECK(stage_names(response) == std::vector<std::string>{"inference"});
    CHECK(mocks.moderation->call_count() == 0);
    CHECK(mocks.embedding->call_count() == embed_calls_before);
    CHECK(mocks.generation->call_count() == 1);  // inference only, no detection call
    CHECK(mocks.fixing->call_count() == 0);
}

TEST_CASE("trace stage names form a subsequence of the canonical order") {
    const std::vector<std::string> canonical = {"input_safety",            "grounding",
                                                "inference",               "hallucination_detection",
                                                "customizer",              "repairer"};
    for (int mask = 0; mask < 32; ++mask) {
        auto mocks = make_mocks();
        auto pipeline = make_pipeline(mocks);
        auto policy = one_context_policy();
        policy.stages_enabled.input_safety = mask & 1;
        policy.stages_enabled.grounding = mask & 2;
        policy.stages_enabled.hallucination_detection = mask & 4;
        policy.stages_enabled.customizer = mask & 8;
        policy.stages_enabled.repairer = mask & 16;

        auto response = pipeline->run(Query{"ordinary question", {}}, policy);
        auto names = stage_names(response);
        size_t pos = 0;
        for (const auto& name : names) {
            while (pos < canonical.size() && canonical[pos] != name) ++pos;
            REQUIRE_MESSAGE(pos < canonical.size(), "stage out of order: ", name);
            ++pos;
        }
        // every executed stage appears exactly once
        std::set<std::string> unique(names.begin(), names.end());
        CHECK(unique.size() == names.size());
    }
}

TEST_CASE("identical queries against deterministic mocks are idempotent") {
    auto mocks = make_mocks();
    auto pipeline = make_pipeline(mocks);
    std::string query = "What is the capital of France?";
    mocks.generation->script(grounded_prompt(query), "Paris.", {{"Paris", 1.0}});
    mocks.generation->script(
        dataprep::render_detection_prompt(query, kRecord.text, "Paris."), "No.",
        {{"No", 1.0}});

    auto first = pipeline->run(Query{query, {}}, one_context_policy());
    auto second = pipeline->run(Query{query, {}}, one_context_policy());
    CHECK(first.final_text == second.final_text);
    CHECK(stage_names(first) == stage_names(second));
    CHECK(canonical_trace_json(first.trace) == canonical_trace_json(second.trace));
}

TEST_CASE("register_backend validates slot names and handle types") {
    Pipeline pipeline;
    auto moderation = std::make_shared<MockModerationBackend>();
    CHECK_THROWS_AS(pipeline.register_backend("foo", moderation), UnknownSlot);
    CHECK_THROWS_AS(
        pipeline.register_backend("generation",
                                  std::static_pointer_cast<ModerationBackend>(moderation)),
        SlotMismatch);
    CHECK_NOTHROW(pipeline.register_backend("moderation", moderation));
}

TEST_CASE("backend re-registration is last-write-wins") {
    auto mocks = make_mocks();
    auto pipeline = make_pipeline(mocks);
    auto policy = one_context_policy();
    policy.stages_enabled.input_safety = false;
    policy.stages_enabled.grounding = false;
    policy.stages_enabled.hallucination_detection = false;
    policy.stages_enabled.customizer = false;
    policy.stages_enabled.repairer = false;

    auto replacement = std::make_shared<MockGenerationBackend>(MockGenerationFallback::kFail);
    replacement->script("q", "from the second backend", {{"x", 1.0}});
    pipeline->register_backend("generation", replacement);

    auto response = pipeline->run(Query{"q", {}}, policy);
    CHECK(response.final_text == "from the second backend");
    CHECK(mocks.generation->call_count() == 0);
}

TEST_CASE("missing backends surface as BackendUnavailable") {
    Pipeline pipeline;  // nothing registered
    CHECK_THROWS_AS(pipeline.run(Query{"q", {}}, PipelinePolicy{}), BackendUnavailable);

    // with only moderation, grounding is the next thing to fail: no index
    pipeline.register_backend("moderation", std::make_shared<MockModerationBackend>());
    try {
        pipeline.run(Query{"q", {}}, PipelinePolicy{});
        FAIL("expected BackendUnavailable");
    } catch (const BackendUnavailable& e) {
        CHECK(e.slot() == "grounding index");
    }
}

TEST_CASE("backend failures carry the failing stage name") {
    class ThrowingModeration : public ModerationBackend {
    public:
        double classify(const std::string&) override { throw BackendFailure("scorer offline"); }
    };
    auto mocks = make_mocks();
    auto pipeline = make_pipeline(mocks);
    pipeline->register_backend("moderation", std::static_pointer_cast<ModerationBackend>(
                                                 std::make_shared<ThrowingModeration>()));
    try {
        pipeline->run(Query{"q", {}}, one_context_policy());
        FAIL("expected StageFailure");
    } catch (const StageFailure& e) {
        CHECK(e.stage() == "input_safety");
        CHECK(std::string(e.what()).find("scorer offline") != std::string::npos);
    }

    // unscripted inference prompt with a kFail generation backend
    auto strict = std::make_shared<MockGenerationBackend>(MockGenerationFallback::kFail);
    pipeline->register_backend("moderation", mocks.moderation);
    pipeline->register_backend("generation", strict);
    try {
        pipeline->run(Query{"q", {}}, one_context_policy());
        FAIL("expected StageFailure");
    } catch (const StageFailure& e) {
        CHECK(e.stage() == "inference");
    }
}

TEST_CASE("invalid queries and policies are rejected up front") {
    auto mocks = make_mocks();
    auto pipeline = make_pipeline(mocks);
    CHECK_THROWS_AS(pipeline->run(Query{"   ", {}}, one_context_policy()),
                    std::invalid_argument);

    auto policy = one_context_policy();
    policy.halu_threshold = 1.5;
    CHECK_THROWS_AS(pipeline->run(Query{"q", {}}, policy), std::invalid_argument);
}
