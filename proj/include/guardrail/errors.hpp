#pragma once

#include <stdexcept>
#include <string>

namespace guardrail {

// Base class for everything this library throws on purpose.
class GuardrailError : public std::runtime_error {
public:
    explicit GuardrailError(const std::string& msg) : std::runtime_error(msg) {}
};

// A required backend slot has no registered handle.
class BackendUnavailable : public GuardrailError {
public:
    explicit BackendUnavailable(const std::string& slot)
        : GuardrailError("backend unavailable: " + slot), slot_(slot) {}
    const std::string& slot() const { return slot_; }

private:
    std::string slot_;
};

// A backend call failed (network error, bad payload, scripted failure).
class BackendFailure : public GuardrailError {
public:
    explicit BackendFailure(const std::string& msg) : GuardrailError("backend failure: " + msg) {}
};

// A pipeline stage failed; carries the stage name plus the propagated cause.
class StageFailure : public GuardrailError {
public:
    StageFailure(const std::string& stage, const std::string& cause)
        : GuardrailError("stage '" + stage + "' failed: " + cause), stage_(stage) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

class UnknownSlot : public GuardrailError {
public:
    explicit UnknownSlot(const std::string& slot)
        : GuardrailError("unknown backend slot: " + slot) {}
};

// Registering a handle whose type does not match the slot name.
class SlotMismatch : public GuardrailError {
public:
    explicit SlotMismatch(const std::string& slot)
        : GuardrailError("backend handle type does not match slot: " + slot) {}
};

// Grounding
class MissingKeyText : public GuardrailError {
public:
    explicit MissingKeyText(const std::string& record_id)
        : GuardrailError("record '" + record_id + "' has no key_text (key_information index)") {}
};

class EmptyCorpus : public GuardrailError {
public:
    EmptyCorpus() : GuardrailError("corpus is empty") {}
};

class EmptyIndex : public GuardrailError {
public:
    EmptyIndex() : GuardrailError("index is empty") {}
};

class UnknownRecordId : public GuardrailError {
public:
    explicit UnknownRecordId(const std::string& id)
        : GuardrailError("record id not in index: " + id) {}
};

class EmptyQuerySet : public GuardrailError {
public:
    EmptyQuerySet() : GuardrailError("query set is empty") {}
};

// Customizer
class DuplicateWrapperName : public GuardrailError {
public:
    explicit DuplicateWrapperName(const std::string& name)
        : GuardrailError("duplicate wrapper name in chain: " + name) {}
};

class WrapperFailure : public GuardrailError {
public:
    WrapperFailure(const std::string& wrapper, const std::string& cause)
        : GuardrailError("wrapper '" + wrapper + "' failed: " + cause), wrapper_(wrapper) {}
    const std::string& wrapper() const { return wrapper_; }

private:
    std::string wrapper_;
};

// URL blocklist / reachability clients.
class ClientFailure : public GuardrailError {
public:
    explicit ClientFailure(const std::string& msg) : GuardrailError("client failure: " + msg) {}
};

// Configuration problems carry the offending field path.
class ConfigError : public GuardrailError {
public:
    ConfigError(const std::string& field_path, const std::string& msg)
        : GuardrailError("config error at " + field_path + ": " + msg), field_path_(field_path) {}
    const std::string& field_path() const { return field_path_; }

private:
    std::string field_path_;
};

class BindError : public GuardrailError {
public:
    explicit BindError(const std::string& address)
        : GuardrailError("cannot bind to " + address) {}
};

}  // namespace guardrail
