#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "ddesc/io.hpp"

using namespace ddesc;
namespace fs = std::filesystem;

namespace {

struct temp_dir {
    fs::path path;
    temp_dir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("ddesc-io-" + hex64((std::uint64_t{rd()} << 32) | rd()));
        fs::create_directories(path);
    }
    ~temp_dir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& s) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    os << s;
}

} // namespace

TEST(CanonicalJson, SortedKeysAndRoundTripDoubles) {
    json j;
    j["zeta"] = 1;
    j["alpha"] = {{"y", 0.1}, {"b", true}};
    j["mid"] = json::array({3, "x", nullptr});
    EXPECT_EQ(canonical_dump(j),
              R"({"alpha":{"b":true,"y":0.10000000000000001},"mid":[3,"x",null],"zeta":1})");
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(CanonicalJson, ReparseIsStable) {
    const json j = to_json(exact_distribution(5, descent_spec::uniform(2)));
    const auto once = canonical_dump(j);
    EXPECT_EQ(canonical_dump(json::parse(once)), once);
}

TEST(Checksum, KnownVectors) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(BigInt, DecimalStringRoundTrip) {
    std::mt19937_64 g(5);
    for (int k = 0; k < 200; ++k) {
        big_int x = 1;
        const int words = 1 + static_cast<int>(g() % 6);
        for (int w = 0; w < words; ++w) x = (x << 64) + g();
        EXPECT_EQ(parse_big_int(x.str()), x);
    }
    EXPECT_EQ(parse_big_int("0"), big_int(0));
    EXPECT_THROW(parse_big_int(""), input_error);
    EXPECT_THROW(parse_big_int("12a"), input_error);
    EXPECT_THROW(parse_big_int("1.5"), input_error);
    EXPECT_THROW(parse_big_int("-3"), input_error);
}

TEST(TableJson, RoundTrip) {
    for (const auto& spec : {descent_spec::uniform(2), descent_spec::vector({1, 3, 2, 1, 1})}) {
        const auto t = exact_distribution(6, spec);
        const auto j = to_json(t);
        EXPECT_EQ(j.at("counts").at(0), "1");
        EXPECT_EQ(j.at("total"), "720");
        EXPECT_EQ(table_from_json(json::parse(canonical_dump(j))), t);
    }
    EXPECT_EQ(table_from_json(to_json(oracle_inversions(25))), oracle_inversions(25));
}

TEST(TableJson, RejectsInconsistentTotals) {
    auto j = to_json(exact_distribution(4, descent_spec::uniform(1)));
    j["total"] = "25";
    EXPECT_THROW(table_from_json(j), input_error);
}

TEST(TableCsv, Layout) {
    EXPECT_EQ(table_csv(exact_distribution(3, descent_spec::uniform(2))), "k,count\n0,1\n1,2\n2,2\n3,1\n");
}

TEST(SpecJson, RoundTrip) {
    for (const auto& s : {descent_spec::uniform(4), descent_spec::vector({2, 2, 1})}) {
        EXPECT_EQ(spec_from_json(to_json(s)), s);
    }
    EXPECT_THROW(spec_from_json(json{{"kind", "other"}, {"d", 1}}), input_error);
}

TEST(Manifest, Shape) {
    run_manifest m;
    m.command = "simulate";
    m.parameters["n"] = "10";
    m.seed = 7;
    m.timestamp = rfc3339_now();
    const auto j = with_manifest(m, json{{"x", 1}});
    EXPECT_EQ(j.at("manifest").at("command"), "simulate");
    EXPECT_EQ(j.at("manifest").at("seed"), 7);
    EXPECT_EQ(j.at("manifest").at("tool_version"), tool_version);
    EXPECT_EQ(j.at("manifest").at("timestamp").get<std::string>().size(), 20u);
    EXPECT_EQ(j.at("result").at("x"), 1);
}

TEST(TableCache, StoreThenLookup) {
    temp_dir dir;
    table_cache cache(dir.path);
    const auto t = exact_distribution(8, descent_spec::uniform(2));
    EXPECT_FALSE(cache.lookup(8, descent_spec::uniform(2)).has_value());
    cache.store(t);
    const auto hit = cache.lookup(8, descent_spec::uniform(2));
    ASSERT_TRUE(hit.has_value());
    EXPECT_EQ(*hit, t);
    EXPECT_FALSE(cache.lookup(8, descent_spec::uniform(3)).has_value());
    EXPECT_FALSE(cache.lookup(7, descent_spec::uniform(2)).has_value());

    // no temp files left behind
    int files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++files;
    EXPECT_EQ(files, 1);
}

TEST(TableCache, EveryFlippedByteIsRejected) {
    temp_dir dir;
    std::vector<std::string> warnings;
    table_cache cache(dir.path, [&](const std::string& w) { warnings.push_back(w); });
    const auto spec = descent_spec::uniform(2);
    cache.store(exact_distribution(5, spec));
    const auto path = cache.path_for(5, spec);
    const auto original = slurp(path);

    for (std::size_t pos = 0; pos < original.size(); ++pos) {
        std::string bad = original;
        bad[pos] = static_cast<char>(bad[pos] ^ 0x01);
        spit(path, bad);
        warnings.clear();
        EXPECT_FALSE(cache.lookup(5, spec).has_value()) << "byte " << pos;
        EXPECT_EQ(warnings.size(), 1u) << "byte " << pos;
    }
    spit(path, original);
    EXPECT_TRUE(cache.lookup(5, spec).has_value());
}

TEST(TableCache, ForeignKeyIsRejected) {
    temp_dir dir;
    std::vector<std::string> warnings;
    table_cache cache(dir.path, [&](const std::string& w) { warnings.push_back(w); });
    cache.store(exact_distribution(5, descent_spec::uniform(1)));
    fs::copy_file(cache.path_for(5, descent_spec::uniform(1)), cache.path_for(5, descent_spec::uniform(3)));
    EXPECT_FALSE(cache.lookup(5, descent_spec::uniform(3)).has_value());
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_NE(warnings[0].find("key mismatch"), std::string::npos);
}

TEST(TableCache, FromEnvironment) {
    temp_dir dir;
    ::unsetenv(cache_dir_env);
    EXPECT_FALSE(table_cache::from_environment().has_value());
    ::setenv(cache_dir_env, dir.path.c_str(), 1);
    const auto c = table_cache::from_environment();
    ASSERT_TRUE(c.has_value());
    EXPECT_EQ(c->directory(), dir.path);
    ::unsetenv(cache_dir_env);
}
