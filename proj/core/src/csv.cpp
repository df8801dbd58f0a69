#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "faae/data.hpp"
#include "faae/format.hpp"

namespace faae {

namespace {

std::vector<std::string> expected_header() {
    std::vector<std::string> cols;
    cols.reserve(kNumRegions + 5);
    cols.push_back("subject_id");
    for (std::size_t i = 0; i < kNumRegions; ++i) cols.push_back("roi_" + std::to_string(i));
    cols.push_back("age");
    cols.push_back("gender");
    cols.push_back("icv");
    cols.push_back("label");
    return cols;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_real(const std::string& field, const std::string& column, std::size_t row) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw std::invalid_argument("could not parse '" + field + "' as a number in column " +
                                    column + " at row " + std::to_string(row));
    return value;
}

}  // namespace

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("dataset file is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> expected = expected_header();
    const std::vector<std::string> header = split_fields(line);
    if (header != expected) {
        for (const std::string& col : expected) {
            if (std::find(header.begin(), header.end(), col) == header.end())
                throw std::invalid_argument("column " + col + " missing from header");
        }
        for (const std::string& col : header) {
            if (std::find(expected.begin(), expected.end(), col) == expected.end())
                throw std::invalid_argument("unexpected column " + col + " in header");
        }
        throw std::invalid_argument("header columns are out of order");
    }

    Dataset dataset;
    dataset.region_names.assign(expected.begin() + 1,
                                expected.begin() + 1 + static_cast<std::ptrdiff_t>(kNumRegions));

    std::size_t row = 1;  // header is row 1
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != expected.size())
            throw std::invalid_argument("expected " + std::to_string(expected.size()) +
                                        " fields but found " + std::to_string(fields.size()) +
                                        " at row " + std::to_string(row));
        Sample s;
        s.subject_id = fields[0];
        s.features.reserve(kNumRegions);
        for (std::size_t i = 0; i < kNumRegions; ++i)
            s.features.push_back(parse_real(fields[1 + i], expected[1 + i], row));
        s.age = parse_real(fields[1 + kNumRegions], "age", row);
        const std::string& gender = fields[2 + kNumRegions];
        if (gender == "F")
            s.gender = Gender::F;
        else if (gender == "M")
            s.gender = Gender::M;
        else
            throw std::invalid_argument("unknown gender '" + gender + "' at row " +
                                        std::to_string(row) + " (expected F or M)");
        s.icv = parse_real(fields[3 + kNumRegions], "icv", row);
        const std::string& label = fields[4 + kNumRegions];
        if (label == "HC")
            s.label = Label::HC;
        else if (label == "AD")
            s.label = Label::AD;
        else
            throw std::invalid_argument("unknown label '" + label + "' at row " +
                                        std::to_string(row) + " (expected HC or AD)");
        dataset.samples.push_back(std::move(s));
    }
    return dataset;
}

void save_csv(const std::string& path, const Dataset& dataset) {
    std::string out;
    const std::vector<std::string> header = expected_header();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out.push_back(',');
        out += header[i];
    }
    out.push_back('\n');

    for (const Sample& s : dataset.samples) {
        if (s.features.size() != kNumRegions)
            throw std::invalid_argument("sample " + s.subject_id + " has " +
                                        std::to_string(s.features.size()) + " features, expected " +
                                        std::to_string(kNumRegions));
        out += s.subject_id;
        for (double f : s.features) {
            out.push_back(',');
            append_real(out, f);
        }
        out.push_back(',');
        append_real(out, s.age);
        out.push_back(',');
        out += to_string(s.gender);
        out.push_back(',');
        append_real(out, s.icv);
        out.push_back(',');
        out += to_string(s.label);
        out.push_back('\n');
    }

    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write dataset file: " + path);
    file << out;
    if (!file) throw std::runtime_error("failed while writing dataset file: " + path);
}

}  // namespace faae
