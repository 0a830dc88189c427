#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

using namespace sdpoisson;
using namespace sdpoisson::cli;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "sdpoisson");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("config text round trip") {
        RunConfig cfg;
        cfg.command = Command::Table;
        cfg.lambda = 1.2;
        cfg.mu = 0.1 + 0.2;
        cfg.a = 1.0 / 3.0;
        cfg.seed = 18446744073709551615ULL;
        cfg.output = "out/run";
        cfg.format = OutputFormat::Json;
        cfg.method = Method::Quadrature;
        cfg.m_max = 17;
        cfg.copula = "raftery";
        const std::string text = serialize_config(cfg);
        CHECK(parse_config_text(text) == cfg);
        CHECK(text.find('\r') == std::string::npos);
        for (const auto& key : config_keys()) CHECK(text.find(key + "=") != std::string::npos);
        CHECK(parse_config_text("# comment\n\n  a = 0.25 \n").a == 0.25);
        CHECK_THROWS_AS(parse_config_text("nonsense=1\n"), UsageError);
        CHECK_THROWS_AS(parse_config_text("a 0.3\n"), UsageError);
        CHECK_THROWS_AS(parse_config_text("m=-1\n"), UsageError);
    }

    TEST_CASE("usage errors exit with 64") {
        CHECK(run_cli({"pmf", "--bogus", "1"}).code == kExitUsage);
        CHECK(run_cli({"verify", "--a", "1.5"}).code == kExitUsage);
        CHECK(run_cli({"pmf", "--a", "0"}).code == kExitUsage);
        CHECK(run_cli({"pmf", "--lambda", "-1"}).code == kExitUsage);
        CHECK(run_cli({"pmf", "--samples", "10"}).code == kExitUsage);
        CHECK(run_cli({"copula", "--copula", "clayton"}).code == kExitUsage);
        CHECK(run_cli({"table", "--renewals", "5"}).code == kExitUsage);
        CHECK(run_cli({}).code == kExitUsage);
        CHECK(run_cli({"pmf", "--config", "/nonexistent/cfg.txt"}).code == kExitIo);
    }

    TEST_CASE("pmf values") {
        const auto r = run_cli({"pmf", "--lambda", "1", "--mu", "1", "--a", "0.5", "--s", "1", "--t", "0.4"});
        REQUIRE(r.code == kExitOk);
        const auto lines = split(r.out, '\n');
        const auto header = split(lines[0], ',');
        const auto row = split(lines[1], ',');
        const auto col = std::find(header.begin(), header.end(), "value") - header.begin();
        CHECK(row[col] == "0.36787944117144233");
        CHECK(std::stod(row[col]) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

        const auto j = run_cli({"pmf", "--m", "0", "--n", "1", "--format", "json"});
        REQUIRE(j.code == kExitOk);
        const auto doc = nlohmann::json::parse(j.out);
        CHECK(doc["results"]["value"].get<double>() == 0.0);
        CHECK(doc["results"]["method"] == "lemma-exact");
    }

    TEST_CASE("pmf with monte carlo check") {
        const auto r = run_cli({"pmf", "--samples", "200000", "--seed", "3"});
        CHECK(r.code == kExitOk);
        CHECK(r.out.find("monte-carlo,pass") != std::string::npos);
    }

    TEST_CASE("json layout") {
        for (const char* cmd : {"pmf", "table", "copula", "simulate"}) {
            CAPTURE(cmd);
            std::vector<std::string> args{cmd, "--format", "json"};
            if (std::string(cmd) == "simulate") args.insert(args.end(), {"--renewals", "50"});
            if (std::string(cmd) == "copula") args.insert(args.end(), {"--grid", "5"});
            const auto r = run_cli(args);
            REQUIRE(r.code == kExitOk);
            const auto doc = nlohmann::ordered_json::parse(r.out);
            std::vector<std::string> keys;
            for (const auto& [k, v] : doc.items()) keys.push_back(k);
            CHECK(keys == std::vector<std::string>{"config", "results", "checks"});
            CHECK(doc["config"]["command"] == cmd);
        }
    }

    TEST_CASE("table output") {
        RunConfig cfg;
        cfg.command = Command::Table;
        cfg.m_max = cfg.n_max = 40;
        cfg.s = 2.0;
        cfg.t = 1.0;
        const auto out = execute(cfg);
        CHECK(out.exit_code == kExitOk);
        REQUIRE(out.artifacts.size() == 2);
        CHECK(out.artifacts[0].content.find("\ndeficit,") != std::string::npos);
        CHECK(out.artifacts[1].suffix == "_checks");
        CHECK(out.artifacts[1].content.find("normalization-deficit,pass") != std::string::npos);
    }

    TEST_CASE("csv uses LF and 17 significant digits") {
        RunConfig cfg;
        cfg.m = 1;
        cfg.n = 1;
        const auto out = execute(cfg);
        const std::string& csv = out.artifacts.at(0).content;
        CHECK(csv.find('\r') == std::string::npos);
        CHECK(csv.back() == '\n');
        CHECK(format_prob(0.1) == "0.10000000000000001");
        CHECK(format_prob(0.0) == "0");
        CHECK(format_double(0.1) == "0.1");
        CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    }

    TEST_CASE("simulate is deterministic and reports dependence") {
        for (double a : {0.01, 0.99}) {
            CAPTURE(a);
            RunConfig cfg;
            cfg.command = Command::Simulate;
            cfg.a = a;
            cfg.renewals = 20'000;
            cfg.seed = 77;
            const auto one = execute(cfg);
            const auto two = execute(cfg);
            REQUIRE(one.artifacts.size() == 4);
            for (std::size_t i = 0; i < one.artifacts.size(); ++i) {
                CHECK(one.artifacts[i].suffix == two.artifacts[i].suffix);
                CHECK(one.artifacts[i].content == two.artifacts[i].content);
            }
            CHECK(one.exit_code == kExitOk);
            const std::string& summary = one.artifacts[2].content;
            CHECK(one.artifacts[2].suffix == "_summary");
            double rel_gap = -1;
            for (const auto& line : split(summary, '\n')) {
                const auto kv = split(line, ',');
                if (kv.size() == 2 && kv[0] == "relative_t_s_gap") rel_gap = std::stod(kv[1]);
            }
            REQUIRE(rel_gap >= 0);
            // Near independence the two chains wander apart; near a = 1 they coincide.
            if (a > 0.5) CHECK(rel_gap < 0.02);
            else CHECK(rel_gap > 0.005);
        }
        RunConfig other;
        other.command = Command::Simulate;
        other.renewals = 100;
        other.seed = 1;
        const auto x = execute(other);
        other.seed = 2;
        CHECK(execute(other).artifacts[0].content != x.artifacts[0].content);
    }

    TEST_CASE("files are written next to the stem") {
        const auto dir = std::filesystem::temp_directory_path() / "sdpoisson_cli_test";
        std::filesystem::remove_all(dir);
        std::filesystem::create_directories(dir);
        const auto stem = (dir / "run").string();
        const auto r = run_cli({"simulate", "--renewals", "2000", "--output", stem + ".csv"});
        CHECK(r.code == kExitOk);
        CHECK(std::filesystem::exists(dir / "run.csv"));
        CHECK(std::filesystem::exists(dir / "run_trace.csv"));
        CHECK(std::filesystem::exists(dir / "run_summary.csv"));
        CHECK(std::filesystem::exists(dir / "run_checks.csv"));
        CHECK(slurp(dir / "run.csv").rfind("k,X,Y,T,S,T_centered,S_centered\n", 0) == 0);

        const auto cfg_path = dir / "cfg.txt";
        std::ofstream(cfg_path) << "a=0.3\nt=0.9\nm=2\n";
        const auto j = run_cli({"pmf", "--config", cfg_path.string(), "--t", "0.7", "--format", "json"});
        REQUIRE(j.code == kExitOk);
        const auto doc = nlohmann::json::parse(j.out);
        CHECK(doc["config"]["a"].get<double>() == 0.3);
        CHECK(doc["config"]["t"].get<double>() == 0.7);
        CHECK(doc["config"]["m"].get<unsigned>() == 2);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("unwritable output exits with 74") {
        const auto r = run_cli({"pmf", "--output", "/nonexistent-dir/sub/out.csv"});
        CHECK(r.code == kExitIo);
        CHECK(r.err.find("i/o error") != std::string::npos);
    }

    TEST_CASE("copula command") {
        const auto r = run_cli({"copula", "--copula", "raftery", "--a", "0.4", "--grid", "11"});
        CHECK(r.code == kExitOk);
        CHECK(r.out.rfind("u,v,C,lower,upper\n", 0) == 0);
        CHECK(r.out.find("two-increasing,pass") != std::string::npos);
    }
}
