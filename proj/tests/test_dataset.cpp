#include <doctest/doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "entgrove/dataset.hpp"
#include "entgrove/rng.hpp"
#include "entgrove/serial.hpp"
#include "testutil.hpp"

using namespace entgrove;
using testutil::table_from_csv;
using testutil::TempDir;

namespace {

const char* kFlows =
    "duration,protocol,bytes,label\n"
    "1.5,tcp,100,Normal\n"
    "2.5,udp,200,Attack\n"
    "0.5,tcp,50,Normal\n"
    "3.5,icmp,300,Attack\n";

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("splitmix64 matches the published reference stream") {
    SplitMix64 rng(0);
    CHECK(rng.next() == 0xe220a8397b1dcdafULL);
    CHECK(rng.next() == 0x6e789e6aa1b965f4ULL);
    CHECK(rng.next() == 0x06c45d188009454fULL);

    SplitMix64 rng42(42);
    CHECK(rng42.next() == 0xbdd732262feb6e95ULL);
    CHECK(rng42.next() == 0x28efe333b266f103ULL);
    CHECK(rng42.next() == 0x47526757130f9f52ULL);
}

TEST_CASE("fisher-yates permutation is reproducible") {
    std::vector<int> a{0, 1, 2, 3, 4, 5, 6, 7};
    std::vector<int> b = a;
    SplitMix64 r1(7), r2(7);
    fisher_yates_shuffle(a, r1);
    fisher_yates_shuffle(b, r2);
    CHECK(a == b);
    std::sort(a.begin(), a.end());
    CHECK(a == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("load_csv infers kinds and keeps cell values") {
    DatasetTable t = table_from_csv(kFlows, "label");
    REQUIRE(t.schema.size() == 4);
    CHECK(t.schema[0].kind == ColumnKind::numeric);
    CHECK(t.schema[1].kind == ColumnKind::categorical);
    CHECK(t.schema[2].kind == ColumnKind::numeric);
    CHECK(t.schema[3].kind == ColumnKind::label);
    CHECK(t.label_index == 3);
    REQUIRE(t.rows.size() == 4);
    CHECK(t.rows[0][0].number == doctest::Approx(1.5));
    CHECK(t.schema[1].observed_categories ==
          std::vector<std::string>{"tcp", "udp", "icmp"});
    CHECK(t.label_token(1) == "Attack");
    CHECK(t.dropped_row_count == 0);
}

TEST_CASE("a numeric-looking column with one symbolic value becomes categorical") {
    DatasetTable t = table_from_csv(
        "x,label\n1,A\n2,A\nhigh,B\n3,B\n", "label");
    CHECK(t.schema[0].kind == ColumnKind::categorical);
    CHECK(t.schema[0].observed_categories == std::vector<std::string>{"1", "2", "high", "3"});
}

TEST_CASE("missing markers: empty cell and question mark") {
    DatasetTable t = table_from_csv(
        "x,c,label\n1.0,tcp,A\n,udp,A\n?, ,B\n2.0,?,B\n", "label");
    CHECK(t.rows[1][0].is_missing());
    CHECK(t.rows[2][0].is_missing());
    CHECK(t.rows[3][1].is_missing());
    CHECK(t.schema[0].missing_count == 2);
    CHECK(t.schema[1].missing_count == 1);
    // " " (a single space) is a real token, not a missing marker
    CHECK_FALSE(t.rows[2][1].is_missing());
}

TEST_CASE("malformed and unlabeled rows are dropped and counted") {
    DatasetTable t = table_from_csv(
        "x,label\n1,A\n2\n3,B,extra\n4,?\n5,B\n", "label");
    CHECK(t.rows.size() == 2);
    CHECK(t.dropped_row_count == 3);
}

TEST_CASE("rfc-4180 quoting: embedded delimiter, quote, and newline") {
    DatasetTable t = table_from_csv(
        "name,label\n\"a,b\",X\n\"say \"\"hi\"\"\",X\n\"two\nlines\",Y\nplain,Y\n",
        "label");
    REQUIRE(t.rows.size() == 4);
    const auto& cats = t.schema[0].observed_categories;
    CHECK(cats[0] == "a,b");
    CHECK(cats[1] == "say \"hi\"");
    CHECK(cats[2] == "two\nlines");
    CHECK(cats[3] == "plain");
}

TEST_CASE("crlf line endings parse like lf") {
    DatasetTable t = table_from_csv("x,label\r\n1,A\r\n2,B\r\n", "label");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1][0].number == doctest::Approx(2.0));
}

TEST_CASE("alternate delimiter") {
    DatasetTable t = table_from_csv("x;label\n1;A\n2;B\n", "label", ';');
    CHECK(t.rows.size() == 2);
}

TEST_CASE("load errors: missing file, missing label column, zero rows") {
    CHECK_THROWS(load_csv("/nonexistent/nope.csv", "label"));
    CHECK_THROWS(table_from_csv("x,y\n1,2\n", "label"));
    CHECK_THROWS(table_from_csv("x,label\n1\n2\n", "label"));  // every row malformed
}

TEST_CASE("class_manifest is sorted by name with exact counts") {
    DatasetTable t = table_from_csv(
        "x,label\n1,Worm\n2,Adware\n3,Worm\n4,Trojan\n5,Worm\n6,Adware\n", "label");
    ClassManifest m = class_manifest(t);
    REQUIRE(m.entries.size() == 3);
    CHECK(m.entries[0] == std::pair<std::string, std::size_t>{"Adware", 2});
    CHECK(m.entries[1] == std::pair<std::string, std::size_t>{"Trojan", 1});
    CHECK(m.entries[2] == std::pair<std::string, std::size_t>{"Worm", 3});
    CHECK(m.total == 6);
}

TEST_CASE("stratified_split: determinism, coverage, per-class floor counts") {
    const std::string csv = testutil::synthetic_csv(11, 120, 2, 1, 3);
    DatasetTable t = table_from_csv(csv, "family");
    ClassManifest m = class_manifest(t);

    SplitResult s1 = stratified_split(t, 0.75, 99);
    SplitResult s2 = stratified_split(t, 0.75, 99);
    CHECK(s1.train_indices == s2.train_indices);
    CHECK(s1.validation_indices == s2.validation_indices);

    SplitResult s3 = stratified_split(t, 0.75, 100);
    CHECK(s1.train_indices != s3.train_indices);

    // disjoint cover of all rows
    std::set<std::size_t> seen(s1.train_indices.begin(), s1.train_indices.end());
    for (std::size_t v : s1.validation_indices) {
        CHECK(seen.insert(v).second);
    }
    CHECK(seen.size() == t.rows.size());

    CHECK(std::is_sorted(s1.train_indices.begin(), s1.train_indices.end()));
    CHECK(std::is_sorted(s1.validation_indices.begin(), s1.validation_indices.end()));

    // per class, exactly floor(n_c * fraction) rows land in train
    for (const auto& [name, count] : m.entries) {
        std::size_t in_train = 0;
        for (std::size_t r : s1.train_indices) {
            if (t.label_token(r) == name) ++in_train;
        }
        CHECK(in_train == static_cast<std::size_t>(
                              std::floor(static_cast<double>(count) * 0.75)));
    }
}

TEST_CASE("stratified_split rejects bad fractions and tiny classes") {
    DatasetTable t = table_from_csv("x,label\n1,A\n2,A\n3,B\n4,B\n", "label");
    CHECK_THROWS_AS(stratified_split(t, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(stratified_split(t, 1.5, 1), std::invalid_argument);
    DatasetTable lone = table_from_csv("x,label\n1,A\n2,A\n3,B\n", "label");
    CHECK_THROWS_AS(stratified_split(lone, 0.75, 1), std::runtime_error);
}

TEST_CASE("subset preserves schema and recounts missing") {
    DatasetTable t = table_from_csv("x,label\n1,A\n,A\n3,B\n,B\n", "label");
    DatasetTable s = subset(t, {0, 2});
    CHECK(s.rows.size() == 2);
    CHECK(s.schema[0].missing_count == 0);
    DatasetTable s2 = subset(t, {1, 3});
    CHECK(s2.schema[0].missing_count == 2);
}

TEST_CASE("project keeps requested features in order plus the label") {
    DatasetTable t = table_from_csv(kFlows, "label");
    DatasetTable p = project(t, {"bytes", "duration"});
    REQUIRE(p.schema.size() == 3);
    CHECK(p.schema[0].name == "bytes");
    CHECK(p.schema[1].name == "duration");
    CHECK(p.schema[2].name == "label");
    CHECK(p.rows[0][0].number == doctest::Approx(100.0));
}

TEST_CASE("write_csv round-trips through load_csv, quoting included") {
    DatasetTable t = table_from_csv(
        "name,v,label\n\"a,b\",1.25,X\n\"q\"\"q\",,X\nplain,3.5,Y\n\"nl\nnl\",4,Y\n",
        "label");
    TempDir dir;
    const std::string path = dir.file("again.csv");
    write_csv(t, path);
    DatasetTable back = load_csv(path, "label");
    REQUIRE(back.rows.size() == t.rows.size());
    CHECK(back.schema[0].observed_categories == t.schema[0].observed_categories);
    CHECK(back.rows[1][1].is_missing());
    CHECK(back.rows[2][1].number == 3.5);
}

TEST_CASE("load_csv_with_schema forces kinds and appends unseen tokens") {
    DatasetTable base = table_from_csv(kFlows, "label");
    std::vector<ColumnSchema> schema;
    for (std::size_t c : base.feature_indices()) schema.push_back(base.schema[c]);

    TempDir dir;
    const std::string path = dir.file("deploy.csv");
    // new protocol token, a non-parsing numeric, an extra ignored column,
    // and a different column order
    write_text_file(path,
                    "extra,protocol,bytes,duration,label\n"
                    "9,sctp,high,2.0,Attack\n"
                    "9,tcp,700,1.0,Normal\n");
    DatasetTable t = load_csv_with_schema(path, schema, "label");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.column_index("protocol") == 1);
    CHECK(t.schema[1].observed_categories ==
          std::vector<std::string>{"tcp", "udp", "icmp", "sctp"});
    CHECK(t.rows[0][1].category == 3);       // sctp appended after schema tokens
    CHECK(t.rows[0][2].is_missing());        // "high" in a forced-numeric column
    CHECK(t.rows[1][2].number == 700.0);

    SUBCASE("label column optional") {
        write_text_file(path, "protocol,bytes,duration\ntcp,1,1\n");
        DatasetTable u = load_csv_with_schema(path, schema, "label");
        CHECK_FALSE(u.has_label());
        CHECK(u.rows.size() == 1);
    }
    SUBCASE("schema column absent from header throws") {
        write_text_file(path, "protocol,duration,label\ntcp,1,Normal\n");
        CHECK_THROWS(load_csv_with_schema(path, schema, "label"));
    }
}

TEST_CASE("manifest and split serialize to stable json") {
    DatasetTable t = table_from_csv("x,label\n1,A\n2,A\n3,B\n4,B\n", "label");
    ClassManifest m = class_manifest(t);
    nlohmann::json jm = manifest_to_json(m);
    CHECK(jm.at("total") == 4);
    ClassManifest m2 = manifest_from_json(jm);
    CHECK(m2.entries == m.entries);
    CHECK(m2.total == m.total);

    SplitResult s = stratified_split(t, 0.5, 3);
    nlohmann::json js = split_to_json(s);
    CHECK(js.at("seed") == 3);
    CHECK(js.at("train_indices").size() == s.train_indices.size());
}

}  // TEST_SUITE
