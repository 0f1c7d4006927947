#include "sismon/csv.hpp"

#include <sstream>

#include "sismon/errors.hpp"

namespace sismon {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    auto idx = find_column(name);
    if (!idx) throw data_error("missing required column '" + name + "'");
    return *idx;
}

std::optional<std::size_t> CsvTable::find_column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::nullopt;
}

std::optional<std::string> CsvTable::meta(const std::string& key) const {
    for (const auto& [k, v] : metadata) {
        if (k == key) return v;
    }
    return std::nullopt;
}

CsvTable read_csv(std::istream& in, const std::string& context) {
    CsvTable table;
    std::string line;
    bool have_header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            std::string body = line.substr(1);
            if (!body.empty() && body.front() == ' ') body = body.substr(1);
            auto eq = body.find('=');
            if (eq != std::string::npos) {
                table.metadata.emplace_back(body.substr(0, eq), body.substr(eq + 1));
            }
            continue;
        }
        auto fields = split_fields(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw data_error(context + " line " + std::to_string(lineno) + ": expected " +
                             std::to_string(table.header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (!have_header) throw data_error(context + ": no header row");
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path.string() + "'");
    return read_csv(in, path.string());
}

CsvFile::CsvFile(const std::filesystem::path& path) : out_(path), path_(path) {
    if (!out_) throw data_error("cannot write '" + path.string() + "'");
}

void CsvFile::comment(const std::string& key, const std::string& value) {
    out_ << "# " << key << '=' << value << '\n';
}

void CsvFile::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << fields[i];
    }
    out_ << '\n';
}

void CsvFile::close() {
    out_.close();
    if (!out_) throw data_error("error writing '" + path_.string() + "'");
}

}  // namespace sismon
