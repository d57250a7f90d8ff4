#pragma once

#include <memory>
#include <string>
#include <thread>

#include "guardrail/config.hpp"

namespace httplib {
class Server;
}

namespace guardrail {

// HTTP JSON API over the pipeline. One endpoint per capability:
//   POST /v1/chat                  full pipeline (?trace=false drops the trace)
//   POST /v1/detect/input          input safety check
//   POST /v1/detect/hallucination  hallucination assessment
//   POST /v1/ground                retrieval grounding
//   POST /v1/repair                one fixing pass
//   POST /v1/customize             wrapper chain
// Malformed or schema-invalid request bodies get 400, missing backends 503,
// other failures 500; every error body is {"error": "..."}.
class GuardrailService {
public:
    explicit GuardrailService(ServiceConfig config);
    ~GuardrailService();

    GuardrailService(const GuardrailService&) = delete;
    GuardrailService& operator=(const GuardrailService&) = delete;

    // Blocking listen on config.listen_address. Throws BindError.
    void serve();

    // Binds to an OS-assigned free port on 127.0.0.1 and serves from a
    // background thread; returns the port. Used by tests and harnesses.
    int start_async();

    // Graceful stop: no new connections, in-flight handlers complete.
    void stop();

    const Runtime& runtime() const { return runtime_; }

private:
    void setup_routes();

    ServiceConfig config_;
    Runtime runtime_;
    std::unique_ptr<httplib::Server> server_;
    std::thread server_thread_;
};

}  // namespace guardrail
