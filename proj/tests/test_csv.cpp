#include <cstdio>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "sismon/csv.hpp"
#include "sismon/errors.hpp"

using namespace sismon;
namespace fs = std::filesystem;

TEST_CASE("read_csv parses metadata, header, and rows") {
    std::istringstream in(
        "# format=demo-v1\n"
        "# seed=42\n"
        "id,score\n"
        "1,0.5\n"
        "2,0.75\n");
    CsvTable t = read_csv(in, "demo");
    REQUIRE(t.header.size() == 2);
    CHECK(t.header[1] == "score");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1][0] == "2");
    CHECK(t.meta("format").value() == "demo-v1");
    CHECK(t.meta("seed").value() == "42");
    CHECK_FALSE(t.meta("missing").has_value());
    CHECK(t.column("id") == 0);
    CHECK(t.find_column("nope") == std::nullopt);
    CHECK_THROWS_AS((void)t.column("nope"), data_error);
}

TEST_CASE("read_csv strips carriage returns") {
    std::istringstream in("a,b\r\n1,2\r\n");
    CsvTable t = read_csv(in, "crlf");
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    CHECK(t.rows[0][1] == "2");
}

TEST_CASE("read_csv rejects ragged rows with a line number") {
    std::istringstream in("a,b\n1,2\n3\n");
    try {
        read_csv(in, "ragged");
        FAIL("expected data_error");
    } catch (const data_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("ragged") != std::string::npos);
        CHECK(msg.find("3") != std::string::npos);  // offending line number
    }
}

TEST_CASE("read_csv rejects an empty input and a missing file") {
    std::istringstream in("");
    CHECK_THROWS_AS(read_csv(in, "empty"), data_error);
    CHECK_THROWS_AS(read_csv(fs::path("/nonexistent/nowhere.csv")), data_error);
}

TEST_CASE("csv writer round-trips through the reader") {
    fs::path path = fs::temp_directory_path() / "sismon_test_roundtrip.csv";
    {
        CsvFile out(path);
        out.comment("format", "demo-v1");
        out.row({"id", "value"});
        out.row({"1", "0.25"});
        out.row({"2", "0.5"});
        out.close();
    }
    CsvTable t = read_csv(path);
    CHECK(t.meta("format").value() == "demo-v1");
    CHECK(t.rows.size() == 2);
    CHECK(t.rows[0] == std::vector<std::string>{"1", "0.25"});
    fs::remove(path);
}
