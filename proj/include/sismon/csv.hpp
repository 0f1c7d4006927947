#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sismon {

// Comma-separated table with one header row. Lines starting with '#' before
// the header are metadata and are exposed as key=value pairs. Fields are
// split on ',' verbatim; the formats written by this project never quote.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;

    std::size_t column(const std::string& name) const;
    std::optional<std::size_t> find_column(const std::string& name) const;
    std::optional<std::string> meta(const std::string& key) const;
};

CsvTable read_csv(std::istream& in, const std::string& context);
CsvTable read_csv(const std::filesystem::path& path);

// Streaming writer for the same dialect.
class CsvFile {
  public:
    explicit CsvFile(const std::filesystem::path& path);

    void comment(const std::string& key, const std::string& value);
    void row(const std::vector<std::string>& fields);
    void close();

  private:
    std::ofstream out_;
    std::filesystem::path path_;
};

}  // namespace sismon
