// guardrail: command-line front end for the pipeline modules and the HTTP
// service. Exit codes: 0 success, 2 usage error, 1 runtime failure.

#include <algorithm>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "guardrail/config.hpp"
#include "guardrail/customizer.hpp"
#include "guardrail/data_prep.hpp"
#include "guardrail/grounding.hpp"
#include "guardrail/mock_backends.hpp"
#include "guardrail/pipeline.hpp"
#include "guardrail/repairer.hpp"
#include "guardrail/safety.hpp"
#include "guardrail/service.hpp"

namespace {

using namespace guardrail;

ServiceConfig load_or_default(const std::string& config_path) {
    ServiceConfig config;
    if (!config_path.empty()) {
        config = load_config_file(config_path);
    }
    apply_env_overrides(config);
    return config;
}

// One-shot subcommands fall back to plain mocks for any slot the config does
// not define, so the tool works out of the box.
BackendRegistry registry_with_defaults(const ServiceConfig& config) {
    BackendRegistry registry;
    registry.register_backend("moderation", std::make_shared<MockModerationBackend>());
    registry.register_backend("generation", std::make_shared<MockGenerationBackend>(
                                                MockGenerationFallback::kEchoPrompt));
    registry.register_backend("embedding", std::make_shared<MockEmbeddingBackend>());
    registry.register_backend("reasoning", std::make_shared<MockReasoningBackend>());
    registry.register_backend("fixing", std::make_shared<MockFixingBackend>());
    for (const auto& [slot, desc] : config.backends) {
        registry.register_backend(slot, make_backend(slot, desc));
    }
    return registry;
}

std::vector<int> parse_k_list(const std::string& csv) {
    std::vector<int> ks;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        ks.push_back(std::stoi(item));
    }
    if (ks.empty()) throw CLI::ValidationError("--k", "expected a comma-separated list");
    return ks;
}

std::vector<std::string> read_texts_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::string> texts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        texts.push_back(nlohmann::json::parse(line).at("text").get<std::string>());
    }
    return texts;
}

GuardrailService* g_service = nullptr;

void handle_signal(int) {
    if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LLM inference guardrail pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "Service config JSON file")->capture_default_str();

    // check-input
    auto* check_input = app.add_subcommand("check-input", "Run the input safety check");
    std::string ci_text;
    check_input->add_option("--text", ci_text, "Query text")->required();

    // detect-halu
    auto* detect = app.add_subcommand("detect-halu", "Score an answer for hallucination");
    std::string dh_question, dh_context, dh_answer;
    detect->add_option("--question", dh_question)->required();
    detect->add_option("--context", dh_context)->default_val("");
    detect->add_option("--answer", dh_answer)->required();

    // ground
    auto* ground = app.add_subcommand("ground", "Retrieve context for a query");
    std::string g_corpus, g_strategy = "whole_knowledge", g_text;
    int g_k = 3;
    ground->add_option("--corpus", g_corpus, "Corpus JSONL")->required();
    ground->add_option("--strategy", g_strategy, "whole_knowledge|key_information");
    ground->add_option("--text", g_text, "Query text")->required();
    ground->add_option("--k", g_k, "Context blocks to retrieve");

    // repair
    auto* repair_cmd = app.add_subcommand("repair", "Fix a hallucinated answer");
    std::string r_question, r_context, r_answer, r_reason;
    repair_cmd->add_option("--question", r_question)->required();
    repair_cmd->add_option("--context", r_context)->required();
    repair_cmd->add_option("--answer", r_answer)->required();
    repair_cmd->add_option("--reason", r_reason)->required();

    // prep-data
    auto* prep = app.add_subcommand("prep-data", "Build hallucination training records");
    std::string p_in, p_out;
    bool p_skip = false;
    prep->add_option("--in", p_in, "Raw records JSONL")->required();
    prep->add_option("--out", p_out, "Training records JSONL")->required();
    prep->add_flag("--skip-on-failure", p_skip, "Skip records whose reasoning call fails");

    // eval-callback
    auto* eval = app.add_subcommand("eval-callback", "Callback metric over an index");
    std::string e_corpus, e_strategy = "key_information", e_klist = "1,3,5,10";
    std::string e_mode = "original", e_out;
    std::uint64_t e_seed = 42;
    int e_sample = 50;
    eval->add_option("--corpus", e_corpus, "Corpus JSONL")->required();
    eval->add_option("--strategy", e_strategy, "whole_knowledge|key_information|both");
    eval->add_option("--k", e_klist, "Comma-separated k values");
    eval->add_option("--mode", e_mode, "original|rephrased|both");
    eval->add_option("--seed", e_seed, "Sampling/rephrasing seed");
    eval->add_option("--sample", e_sample, "Question sample size");
    eval->add_option("--out", e_out, "CSV output path (default stdout)");

    // bench-wrapper
    auto* bench = app.add_subcommand("bench-wrapper", "URL wrapper latency over a text corpus");
    std::string b_input, b_blocklist, b_status_map;
    bench->add_option("--input", b_input, "Texts JSONL ({\"text\": ...} per line)")->required();
    bench->add_option("--blocklist", b_blocklist, "File of malicious URLs, one per line");
    bench->add_option("--status-map", b_status_map, "JSON file {url: status}");

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        ServiceConfig config = load_or_default(config_path);

        if (*check_input) {
            auto registry = registry_with_defaults(config);
            auto verdict = safety::check_input(Query{ci_text, {}}, *registry.moderation(),
                                               config.policy.input_unsafe_threshold);
            nlohmann::json out{
                {"label",
                 verdict.label == safety::SafetyVerdict::Label::kUnsafe ? "unsafe" : "safe"},
                {"score", verdict.score}};
            std::cout << out.dump(2) << "\n";
        } else if (*detect) {
            auto registry = registry_with_defaults(config);
            auto assessment = safety::detect_hallucination(dh_question, dh_context, dh_answer,
                                                           config.policy,
                                                           *registry.generation());
            nlohmann::json out{{"p_halu", assessment.p_halu},
                               {"is_hallucinated", assessment.is_hallucinated},
                               {"reason", assessment.reason}};
            std::cout << out.dump(2) << "\n";
        } else if (*ground) {
            auto registry = registry_with_defaults(config);
            auto corpus = grounding::read_corpus_file(g_corpus);
            auto index = grounding::build_index(
                corpus, grounding::index_strategy_from_string(g_strategy),
                *registry.embedding());
            auto grounded = grounding::ground_query(Query{g_text, {}}, index, g_k,
                                                    *registry.embedding());
            nlohmann::json hits = nlohmann::json::array();
            for (const auto& hit : grounded.hits) {
                hits.push_back({{"id", hit.record.id},
                                {"text", hit.record.text},
                                {"similarity", hit.similarity}});
            }
            nlohmann::json out{{"prompt", grounded.prompt}, {"hits", hits}};
            std::cout << out.dump(2) << "\n";
        } else if (*repair_cmd) {
            auto registry = registry_with_defaults(config);
            repairer::RepairRequest request{r_question, r_context, r_answer, r_reason};
            auto result = repairer::repair(request, *registry.fixing());
            nlohmann::json out{{"corrected_answer", result.corrected_answer},
                               {"repaired", result.repaired}};
            std::cout << out.dump(2) << "\n";
        } else if (*prep) {
            auto registry = registry_with_defaults(config);
            auto records = dataprep::read_raw_records_file(p_in);
            auto training = dataprep::process_dataset(
                records, *registry.reasoning(),
                p_skip ? dataprep::FailureMode::kSkip : dataprep::FailureMode::kAbort);
            dataprep::write_training_records_file(p_out, training);
            std::cout << nlohmann::json{{"records", training.size()}}.dump(2) << "\n";
        } else if (*eval) {
            auto registry = registry_with_defaults(config);
            auto corpus = grounding::read_corpus_file(e_corpus);
            auto ks = parse_k_list(e_klist);

            std::vector<grounding::IndexStrategy> strategies;
            if (e_strategy == "both") {
                strategies = {grounding::IndexStrategy::kWholeKnowledge,
                              grounding::IndexStrategy::kKeyInformation};
            } else {
                strategies = {grounding::index_strategy_from_string(e_strategy)};
            }
            std::vector<grounding::QueryMode> modes;
            if (e_mode == "both") {
                modes = {grounding::QueryMode::kOriginal, grounding::QueryMode::kRephrased};
            } else {
                modes = {grounding::query_mode_from_string(e_mode)};
            }

            std::vector<grounding::ExperimentRow> rows;
            for (auto strategy : strategies) {
                for (auto mode : modes) {
                    auto part = grounding::run_callback_experiment(
                        corpus, strategy, mode, ks, *registry.embedding(), e_seed, e_sample);
                    rows.insert(rows.end(), part.begin(), part.end());
                }
            }
            if (e_out.empty()) {
                grounding::write_experiment_csv(std::cout, rows);
            } else {
                std::ofstream out(e_out);
                if (!out) throw std::runtime_error("cannot open " + e_out);
                grounding::write_experiment_csv(out, rows);
            }
        } else if (*bench) {
            auto texts = read_texts_jsonl(b_input);
            std::set<std::string> blocked;
            if (!b_blocklist.empty()) {
                std::ifstream in(b_blocklist);
                if (!in) throw std::runtime_error("cannot open " + b_blocklist);
                std::string line;
                while (std::getline(in, line)) {
                    if (!line.empty()) blocked.insert(line);
                }
            }
            std::map<std::string, int> statuses;
            if (!b_status_map.empty()) {
                std::ifstream in(b_status_map);
                if (!in) throw std::runtime_error("cannot open " + b_status_map);
                nlohmann::json j;
                in >> j;
                for (const auto& [url, status] : j.items()) statuses[url] = status.get<int>();
            }
            customizer::MockBlocklistClient blocklist(blocked);
            customizer::MockReachabilityClient reachability(statuses);

            std::vector<double> micros;
            micros.reserve(texts.size());
            size_t warned = 0;
            for (const auto& text : texts) {
                auto start = std::chrono::steady_clock::now();
                auto outcome = customizer::url_warning_wrapper(text, blocklist, reachability);
                auto end = std::chrono::steady_clock::now();
                micros.push_back(
                    std::chrono::duration_cast<std::chrono::nanoseconds>(end - start).count() /
                    1000.0);
                if (outcome.modified) ++warned;
            }
            std::sort(micros.begin(), micros.end());
            auto percentile = [&](double p) {
                if (micros.empty()) return 0.0;
                size_t idx = static_cast<size_t>(p * (micros.size() - 1));
                return micros[idx];
            };
            double mean = 0.0;
            for (double m : micros) mean += m;
            if (!micros.empty()) mean /= static_cast<double>(micros.size());
            nlohmann::json out{{"texts", texts.size()},
                               {"warned", warned},
                               {"mean_micros", mean},
                               {"p50_micros", percentile(0.50)},
                               {"p95_micros", percentile(0.95)},
                               {"max_micros", micros.empty() ? 0.0 : micros.back()}};
            std::cout << out.dump(2) << "\n";
        } else if (*serve) {
            if (config_path.empty()) {
                std::cerr << "serve requires --config\n";
                return 2;
            }
            GuardrailService service(config);
            g_service = &service;
            std::signal(SIGINT, handle_signal);
            std::signal(SIGTERM, handle_signal);
            std::cout << "listening on " << config.listen_address << "\n";
            service.serve();
            g_service = nullptr;
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
