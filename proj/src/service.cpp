#include "guardrail/service.hpp"

#include <stdexcept>

#include "guardrail/http_support.hpp"
#include "guardrail/repairer.hpp"
#include "guardrail/safety.hpp"

namespace guardrail {

namespace {

void send_error(httplib::Response& res, int status, const std::string& message) {
    res.status = status;
    res.set_content(nlohmann::json{{"error", message}}.dump(), "application/json");
}

void send_json(httplib::Response& res, const nlohmann::json& body) {
    res.status = 200;
    res.set_content(body.dump(), "application/json");
}

// Parses the request body and runs the handler, mapping exceptions to HTTP
// statuses: schema problems 400, missing backends 503, the rest 500.
template <typename Handler>
void json_endpoint(const httplib::Request& req, httplib::Response& res, Handler&& handler) {
    nlohmann::json body;
    try {
        body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
        send_error(res, 400, std::string("invalid JSON body: ") + e.what());
        return;
    }
    try {
        send_json(res, handler(body));
    } catch (const nlohmann::json::exception& e) {
        send_error(res, 400, std::string("bad request: ") + e.what());
    } catch (const std::invalid_argument& e) {
        send_error(res, 400, e.what());
    } catch (const BackendUnavailable& e) {
        send_error(res, 503, e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, e.what());
    }
}

}  // namespace

GuardrailService::GuardrailService(ServiceConfig config)
    : config_(std::move(config)),
      runtime_(build_runtime(config_)),
      server_(std::make_unique<httplib::Server>()) {
    setup_routes();
}

GuardrailService::~GuardrailService() { stop(); }

void GuardrailService::setup_routes() {
    server_->Post("/v1/chat", [this](const httplib::Request& req, httplib::Response& res) {
        json_endpoint(req, res, [this, &req](const nlohmann::json& body) {
            Query query;
            query.text = body.at("text").get<std::string>();
            if (body.contains("metadata")) {
                for (const auto& [key, value] : body.at("metadata").items()) {
                    query.metadata[key] = value.get<std::string>();
                }
            }
            PipelineResponse response = runtime_.pipeline->run(query, runtime_.policy);
            nlohmann::json out = to_json(response);
            if (req.get_param_value("trace") == "false") out.erase("trace");
            return out;
        });
    });

    server_->Post("/v1/detect/input",
                  [this](const httplib::Request& req, httplib::Response& res) {
        json_endpoint(req, res, [this](const nlohmann::json& body) {
            Query query;
            query.text = body.at("text").get<std::string>();
            auto verdict = safety::check_input(query, *runtime_.registry.moderation(),
                                               runtime_.policy.input_unsafe_threshold);
            return nlohmann::json{
                {"label",
                 verdict.label == safety::SafetyVerdict::Label::kUnsafe ? "unsafe" : "safe"},
                {"score", verdict.score}};
        });
    });

    server_->Post("/v1/detect/hallucination",
                  [this](const httplib::Request& req, httplib::Response& res) {
        json_endpoint(req, res, [this](const nlohmann::json& body) {
            auto assessment = safety::detect_hallucination(
                body.at("question").get<std::string>(), body.at("context").get<std::string>(),
                body.at("answer").get<std::string>(), runtime_.policy,
                *runtime_.registry.generation());
            return nlohmann::json{{"p_halu", assessment.p_halu},
                                  {"is_hallucinated", assessment.is_hallucinated},
                                  {"reason", assessment.reason}};
        });
    });

    server_->Post("/v1/ground", [this](const httplib::Request& req, httplib::Response& res) {
        json_endpoint(req, res, [this](const nlohmann::json& body) {
            if (!runtime_.index) throw BackendUnavailable("grounding index");
            Query query;
            query.text = body.at("text").get<std::string>();
            int k = body.value("k", runtime_.policy.top_k_contexts);
            auto grounded = grounding::ground_query(query, *runtime_.index, k,
                                                    *runtime_.registry.embedding());
            nlohmann::json hits = nlohmann::json::array();
            for (const auto& hit : grounded.hits) {
                hits.push_back({{"id", hit.record.id},
                                {"text", hit.record.text},
                                {"similarity", hit.similarity}});
            }
            return nlohmann::json{
                {"query_text", grounded.query_text}, {"prompt", grounded.prompt}, {"hits", hits}};
        });
    });

    server_->Post("/v1/repair", [this](const httplib::Request& req, httplib::Response& res) {
        json_endpoint(req, res, [this](const nlohmann::json& body) {
            repairer::RepairRequest request;
            request.question = body.at("question").get<std::string>();
            request.context = body.at("context").get<std::string>();
            request.answer = body.at("answer").get<std::string>();
            request.reason = body.at("reason").get<std::string>();
            auto result = repairer::repair(request, *runtime_.registry.fixing());
            return nlohmann::json{{"corrected_answer", result.corrected_answer},
                                  {"repaired", result.repaired}};
        });
    });

    server_->Post("/v1/customize", [this](const httplib::Request& req, httplib::Response& res) {
        json_endpoint(req, res, [this](const nlohmann::json& body) {
            auto outcome = customizer::run_chain(body.at("text").get<std::string>(),
                                                 runtime_.wrappers);
            nlohmann::json annotations = nlohmann::json::array();
            for (const auto& a : outcome.annotations) {
                annotations.push_back({{"wrapper_name", a.wrapper_name}, {"payload", a.payload}});
            }
            return nlohmann::json{{"text", outcome.text},
                                  {"modified", outcome.modified},
                                  {"annotations", annotations}};
        });
    });
}

void GuardrailService::serve() {
    size_t colon = config_.listen_address.rfind(':');
    std::string host = config_.listen_address.substr(0, colon);
    int port = std::stoi(config_.listen_address.substr(colon + 1));
    if (!server_->listen(host, port)) {
        throw BindError(config_.listen_address);
    }
}

int GuardrailService::start_async() {
    int port = server_->bind_to_any_port("127.0.0.1");
    if (port <= 0) throw BindError("127.0.0.1:0");
    server_thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port;
}

void GuardrailService::stop() {
    if (server_ && server_->is_running()) server_->stop();
    if (server_thread_.joinable()) server_thread_.join();
}

}  // namespace guardrail
