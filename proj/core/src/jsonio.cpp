#include "qcl/jsonio.hpp"

#include <cmath>
#include <cstdio>

#include "qcl/errors.hpp"

namespace qcl {

std::string fmt_double(double v) {
    if (!std::isfinite(v))
        throw invalid_argument("fmt_double: non-finite value");
    if (v == 0.0)
        v = 0.0; // normalise -0.0, it has no meaning in our outputs
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (unsigned char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default:
            if (c < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                out += buf;
            } else {
                out += static_cast<char>(c);
            }
        }
    }
    return out;
}

void JsonWriter::newline_indent() {
    out_ += '\n';
    out_.append(static_cast<std::size_t>(depth_ * indent_step_), ' ');
}

void JsonWriter::before_value() {
    if (pending_key_) {
        pending_key_ = false;
        return;
    }
    if (depth_ > 0) {
        if (has_items_.back())
            out_ += ',';
        newline_indent();
    }
    if (!has_items_.empty())
        has_items_.back() = true;
}

JsonWriter& JsonWriter::begin_object() {
    before_value();
    out_ += '{';
    ++depth_;
    has_items_.push_back(false);
    return *this;
}

JsonWriter& JsonWriter::end_object() {
    bool had = has_items_.back();
    has_items_.pop_back();
    --depth_;
    if (had)
        newline_indent();
    out_ += '}';
    if (!has_items_.empty())
        has_items_.back() = true;
    return *this;
}

JsonWriter& JsonWriter::begin_array() {
    before_value();
    out_ += '[';
    ++depth_;
    has_items_.push_back(false);
    return *this;
}

JsonWriter& JsonWriter::end_array() {
    bool had = has_items_.back();
    has_items_.pop_back();
    --depth_;
    if (had)
        newline_indent();
    out_ += ']';
    if (!has_items_.empty())
        has_items_.back() = true;
    return *this;
}

JsonWriter& JsonWriter::key(const std::string& name) {
    if (has_items_.back())
        out_ += ',';
    newline_indent();
    has_items_.back() = true;
    out_ += '"';
    out_ += json_escape(name);
    out_ += "\": ";
    pending_key_ = true;
    return *this;
}

JsonWriter& JsonWriter::value(double v) {
    before_value();
    out_ += fmt_double(v);
    return *this;
}

JsonWriter& JsonWriter::value(long long v) {
    before_value();
    out_ += std::to_string(v);
    return *this;
}

JsonWriter& JsonWriter::value(bool v) {
    before_value();
    out_ += v ? "true" : "false";
    return *this;
}

JsonWriter& JsonWriter::value(const std::string& v) {
    before_value();
    out_ += '"';
    out_ += json_escape(v);
    out_ += '"';
    return *this;
}

JsonWriter& JsonWriter::null() {
    before_value();
    out_ += "null";
    return *this;
}

JsonWriter& JsonWriter::value(const std::vector<double>& v) {
    begin_array();
    for (double x : v)
        value(x);
    end_array();
    return *this;
}

} // namespace qcl
