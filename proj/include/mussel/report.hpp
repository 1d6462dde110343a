#pragma once

// Byte-stable serialisation: every float goes through 12 significant digits,
// tables keep insertion order, and nothing touches the disk until a command
// has produced all of its outputs.

#include "mussel/error.hpp"

#include "json.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace mussel {

using json = nlohmann::ordered_json;

inline std::string fmt12(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v); // folds -0 into 0
    return buf;
}

/// v rounded to 12 significant digits; JSON then prints the shortest round-trip form.
inline json num(double v) {
    if (!std::isfinite(v)) return fmt12(v);
    return std::strtod(fmt12(v).c_str(), nullptr);
}

inline json num(std::complex<double> z) { return json{{"re", num(z.real())}, {"im", num(z.imag())}}; }

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    template <class... Cells>
    void add(const Cells&... cells) {
        std::vector<std::string> row;
        row.reserve(sizeof...(cells));
        (row.push_back(cell(cells)), ...);
        if (row.size() != header_.size()) throw InvalidArgument("csv row width does not match header");
        rows_.push_back(std::move(row));
    }

    void add_row(std::vector<std::string> row) {
        if (row.size() != header_.size()) throw InvalidArgument("csv row width does not match header");
        rows_.push_back(std::move(row));
    }

    std::size_t rows() const noexcept { return rows_.size(); }

    std::string str() const {
        std::string out;
        append_line(out, header_);
        for (const auto& r : rows_) append_line(out, r);
        return out;
    }

    static std::string cell(double v) { return fmt12(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(long v) { return std::to_string(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(bool v) { return v ? "1" : "0"; }
    static std::string cell(const char* v) { return v; }
    static std::string cell(const std::string& v) { return v; }

private:
    static void append_line(std::string& out, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            const std::string& c = cells[i];
            if (c.find_first_of(",\"\n") != std::string::npos) {
                out += '"';
                for (char ch : c) {
                    if (ch == '"') out += '"';
                    out += ch;
                }
                out += '"';
            } else {
                out += c;
            }
        }
        out += '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Named in-memory files produced by one command.
struct OutputBundle {
    std::vector<std::pair<std::string, std::string>> files;

    void add(std::string name, std::string contents) { files.emplace_back(std::move(name), std::move(contents)); }
    void add_json(std::string name, const json& doc) { add(std::move(name), doc.dump(2) + "\n"); }
};

inline void write_bundle(const OutputBundle& bundle, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoFailure("cannot create output directory '" + dir.string() + "': " + ec.message());
    for (const auto& [name, contents] : bundle.files) {
        const auto path = dir / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoFailure("cannot open '" + path.string() + "' for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw IoFailure("error writing '" + path.string() + "'");
    }
}

} // namespace mussel
