#pragma once

#include <string>
#include <vector>

namespace qcl {

// Shortest-footprint decimal form that still round-trips a double
// exactly ("%.17g"). Every float we persist goes through this so that
// reruns produce byte-identical files.
std::string fmt_double(double v);

std::string json_escape(const std::string& s);

// Minimal JSON emitter with caller-controlled key order and fmt_double
// numbers. Parsing is delegated to a real JSON library; this exists only
// because we need canonical bytes on the write side.
class JsonWriter {
public:
    explicit JsonWriter(int indent_step = 2) : indent_step_(indent_step) {}

    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array();
    JsonWriter& end_array();
    JsonWriter& key(const std::string& name);
    JsonWriter& value(double v);
    JsonWriter& value(long long v);
    JsonWriter& value(int v) { return value(static_cast<long long>(v)); }
    JsonWriter& value(std::size_t v) { return value(static_cast<long long>(v)); }
    JsonWriter& value(bool v);
    JsonWriter& value(const std::string& v);
    JsonWriter& value(const char* v) { return value(std::string(v)); }
    JsonWriter& null();
    JsonWriter& value(const std::vector<double>& v);

    std::string str() const { return out_; }

private:
    void before_value();
    void newline_indent();

    std::string out_;
    int indent_step_;
    int depth_ = 0;
    // Per-depth flag: has anything been written at this level yet.
    std::vector<bool> has_items_{false};
    bool pending_key_ = false;
};

} // namespace qcl
