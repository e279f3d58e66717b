#pragma once

// Dataset CSV codec. Schema: 21 feature columns named exactly as
// kFeatureNames, then an integer `label` column; UTF-8, LF line endings,
// floats at up to 15 significant digits.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "floodwatch/errors.hpp"
#include "floodwatch/features.hpp"

namespace floodwatch {

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

inline double parse_double(const std::string& token) {
    if (token.empty()) throw UnparseableNumber("empty numeric field");
    const char* begin = token.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + token.size()) throw UnparseableNumber("bad number: " + token);
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch != '\r') {
            field.push_back(ch);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

} // namespace detail

inline std::string dataset_to_csv(const LabeledDataset& dataset) {
    std::string out;
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
        out += kFeatureNames[c];
        out += ',';
    }
    out += "label\n";
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        for (std::size_t c = 0; c < kFeatureCount; ++c) {
            out += detail::format_double(dataset.X(r, c));
            out += ',';
        }
        out += std::to_string(static_cast<int>(dataset.y[r]));
        out += '\n';
    }
    return out;
}

inline LabeledDataset dataset_from_csv(const std::string& text) {
    LabeledDataset out;
    out.X = Matrix(0, kFeatureCount);

    std::size_t pos = 0;
    bool saw_header = false;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        const std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty() || line == "\r") continue;

        const std::vector<std::string> fields = detail::split_csv_line(line);
        if (fields.size() != kFeatureCount + 1)
            throw SchemaMismatch("expected " + std::to_string(kFeatureCount + 1) +
                                 " columns, got " + std::to_string(fields.size()));

        if (!saw_header) {
            for (std::size_t c = 0; c < kFeatureCount; ++c)
                if (fields[c] != kFeatureNames[c])
                    throw SchemaMismatch("column " + std::to_string(c) + " named '" + fields[c] +
                                         "', expected '" + std::string(kFeatureNames[c]) + "'");
            if (fields.back() != "label") throw SchemaMismatch("last column must be 'label'");
            saw_header = true;
            continue;
        }

        FeatureVector fv{};
        for (std::size_t c = 0; c < kFeatureCount; ++c) fv[c] = detail::parse_double(fields[c]);
        char* end = nullptr;
        const long code = std::strtol(fields.back().c_str(), &end, 10);
        if (end != fields.back().c_str() + fields.back().size())
            throw SchemaMismatch("bad label: " + fields.back());
        out.push(fv, class_from_code(code));
    }
    if (!saw_header) throw SchemaMismatch("missing header row");
    return out;
}

} // namespace floodwatch
