#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace lelab {

/// Tiny ordered JSON emitter. Doubles are written with 17 significant digits so that
/// output bytes are a deterministic function of the values.
class JsonWriter {
public:
    JsonWriter& begin_object() { open('{'); return *this; }
    JsonWriter& end_object() { close('}'); return *this; }
    JsonWriter& begin_array() { open('['); return *this; }
    JsonWriter& end_array() { close(']'); return *this; }

    JsonWriter& key(std::string_view k) {
        comma();
        quote(k);
        out_ += ": ";
        after_key_ = true;
        return *this;
    }

    JsonWriter& value(double v) {
        comma();
        out_ += format_double(v);
        return *this;
    }
    JsonWriter& value(int v) {
        comma();
        out_ += std::to_string(v);
        return *this;
    }
    JsonWriter& value(long long v) {
        comma();
        out_ += std::to_string(v);
        return *this;
    }
    JsonWriter& value(unsigned long long v) {
        comma();
        out_ += std::to_string(v);
        return *this;
    }
    JsonWriter& value(bool v) {
        comma();
        out_ += v ? "true" : "false";
        return *this;
    }
    JsonWriter& value(std::string_view s) {
        comma();
        quote(s);
        return *this;
    }
    JsonWriter& value(const char* s) { return value(std::string_view(s)); }
    JsonWriter& null() {
        comma();
        out_ += "null";
        return *this;
    }

    template <class T>
    JsonWriter& field(std::string_view k, const T& v) {
        key(k);
        return value(v);
    }

    template <class T>
    JsonWriter& array(std::string_view k, const std::vector<T>& xs) {
        key(k);
        begin_array();
        for (const auto& x : xs) value(x);
        return end_array();
    }

    const std::string& str() const { return out_; }

    static std::string format_double(double v) {
        if (!std::isfinite(v)) return "null";
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

private:
    void open(char c) {
        comma();
        out_ += c;
        first_.push_back(true);
    }
    void close(char c) {
        first_.pop_back();
        out_ += c;
    }
    void comma() {
        if (after_key_) {
            after_key_ = false;
            return;
        }
        if (!first_.empty()) {
            if (!first_.back()) out_ += ", ";
            first_.back() = false;
        }
    }
    void quote(std::string_view s) {
        out_ += '"';
        for (char c : s) {
            switch (c) {
                case '"': out_ += "\\\""; break;
                case '\\': out_ += "\\\\"; break;
                case '\n': out_ += "\\n"; break;
                case '\t': out_ += "\\t"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof buf, "\\u%04x", c);
                        out_ += buf;
                    } else {
                        out_ += c;
                    }
            }
        }
        out_ += '"';
    }

    std::string out_;
    std::vector<bool> first_;
    bool after_key_ = false;
};

}  // namespace lelab
