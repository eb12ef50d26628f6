#include <catch2/catch.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cohwalk/cli.hpp"

using namespace cohwalk;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("cohwalk_test_" + tag + "_"
               + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& body) {
    const fs::path p = dir / name;
    std::ofstream out(p);
    out << body;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

const char* walk_body = R"({
  "walk": { "theta_deg": %THETA%, "N": %N%, "M": %M%, "x0": 0, "initial": "%INIT%" },
  "output": { "formats": ["csv"%SVG%] }
})";

std::string walk_config(double theta, int n, int m, const std::string& init,
                        bool svg = false) {
    std::string body = walk_body;
    const auto sub = [&](const std::string& key, const std::string& value) {
        body.replace(body.find(key), key.size(), value);
    };
    sub("%THETA%", csv::format(theta));
    sub("%N%", std::to_string(n));
    sub("%M%", std::to_string(m));
    sub("%INIT%", init);
    sub("%SVG%", svg ? ", \"svg\"" : "");
    return body;
}

} // namespace

TEST_CASE("config parsing", "[cli]") {
    SECTION("minimal walk section") {
        const auto cfg = parse_config(walk_config(23, 20, 10, "V"));
        CHECK(cfg.walk.theta_deg == 23.0);
        CHECK(cfg.walk.num_steps == 20);
        CHECK(cfg.walk.initial_h_weight == 0.0);
        CHECK(cfg.walk.bounds.min_x == -20);
        CHECK(cfg.output.csv);
        CHECK_FALSE(cfg.output.svg);
    }
    SECTION("mixture initial coin") {
        const auto cfg = parse_config(R"({"walk": {"theta_deg": 10, "N": 4, "M": 2,
                                                    "initial": 0.3}})");
        CHECK(cfg.walk.initial_h_weight == 0.3);
    }
    SECTION("missing walk section is named") {
        REQUIRE_THROWS_WITH(parse_config(R"({"output": {}})"),
                            Catch::Matchers::Contains("walk"));
    }
    SECTION("missing fields are named") {
        REQUIRE_THROWS_WITH(parse_config(R"({"walk": {"theta_deg": 10, "N": 4, "M": 2}})"),
                            Catch::Matchers::Contains("initial"));
        REQUIRE_THROWS_WITH(parse_config(R"({"walk": {"theta_deg": 10, "M": 2,
                                                      "initial": "V"}})"),
                            Catch::Matchers::Contains("'N'"));
    }
    SECTION("bad initial coin string") {
        REQUIRE_THROWS_WITH(parse_config(R"({"walk": {"theta_deg": 10, "N": 4, "M": 2,
                                                      "initial": "D"}})"),
                            Catch::Matchers::Contains("initial"));
    }
    SECTION("malformed JSON carries parser diagnostics") {
        REQUIRE_THROWS_WITH(parse_config("{\"walk\": "), Catch::Matchers::Contains("config"));
    }
    SECTION("loss and montecarlo sections") {
        const auto cfg = parse_config(R"({
          "walk": {"theta_deg": 11, "N": 20, "M": 10, "initial": "V"},
          "loss": {"eta_H": 0.97, "eta_V": 0.99, "residual_transmission": 0.02},
          "montecarlo": {"samples": 50, "seed": 9}
        })");
        CHECK(cfg.loss.eta_h == 0.97);
        CHECK(cfg.loss.residual_transmission == 0.02);
        CHECK(cfg.montecarlo.samples == 50);
        CHECK(cfg.montecarlo.seed == 9);
        CHECK(cfg.montecarlo.theta_jitter_deg == 0.5);  // default
    }
    SECTION("explicit lindblad matrices") {
        const auto cfg = parse_config(R"({
          "walk": {"theta_deg": 45, "N": 2, "M": 1, "initial": "V"},
          "lindblad": {
            "hamiltonian": [[[0,0],[1,0]],[[1,0],[0,0]]],
            "jump_operators": [[[[0,0],[1,0]],[[0,0],[0,0]]]],
            "rates": [0.5],
            "initial_populations": [0.5, 0.5],
            "s": 0.2, "t": 0.9
          }
        })");
        REQUIRE(cfg.lindblad.has_value());
        CHECK(cfg.lindblad->generator.dim() == 2);
        CHECK(cfg.lindblad->generator.jump_ops.size() == 1);
        CHECK(cfg.lindblad->basis.labels[0] == "0");
    }
    SECTION("broken complex matrix entries are rejected") {
        REQUIRE_THROWS_WITH(parse_config(R"({
          "walk": {"theta_deg": 45, "N": 2, "M": 1, "initial": "V"},
          "lindblad": {"hamiltonian": [[[0,0],[1]],[[1,0],[0,0]]],
                       "initial_populations": [1, 0], "s": 0, "t": 1}
        })"),
                            Catch::Matchers::Contains("[re, im]"));
    }
    SECTION("unknown output format") {
        REQUIRE_THROWS_WITH(parse_config(R"({
          "walk": {"theta_deg": 45, "N": 2, "M": 1, "initial": "V"},
          "output": {"formats": ["pdf"]}
        })"),
                            Catch::Matchers::Contains("pdf"));
    }
}

TEST_CASE("simulate command", "[cli]") {
    TempDir dir("simulate");

    SECTION("ballistic walk leaves a single row") {
        const auto config = write_config(dir.path, "c.json", walk_config(0, 20, 10, "V"));
        cli::Options opt{config.string(), (dir.path / "out").string()};
        REQUIRE(cli::run("simulate", opt) == cli::exit_ok);
        const auto rows = csv_rows(dir.path / "out" / "simulate.csv");
        REQUIRE(rows.size() == 2);
        CHECK(rows[0] == std::vector<std::string>{"position", "coin", "probability"});
        CHECK(rows[1] == std::vector<std::string>{"-20", "V", "1"});
    }
    SECTION("four quarter rows for the two-step Hadamard walk") {
        const auto config = write_config(dir.path, "c.json", walk_config(45, 2, 1, "H"));
        cli::Options opt{config.string(), (dir.path / "out").string()};
        REQUIRE(cli::run("simulate", opt) == cli::exit_ok);
        const auto rows = csv_rows(dir.path / "out" / "simulate.csv");
        REQUIRE(rows.size() == 5);
        for (std::size_t i = 1; i < rows.size(); ++i)
            CHECK(rows[i][2] == "0.25");
    }
    SECTION("probabilities sum to one and rows are position-sorted") {
        const auto config = write_config(dir.path, "c.json", walk_config(33, 12, 6, "V"));
        cli::Options opt{config.string(), (dir.path / "out").string()};
        REQUIRE(cli::run("simulate", opt) == cli::exit_ok);
        const auto rows = csv_rows(dir.path / "out" / "simulate.csv");
        double total = 0.0;
        int last_pos = -1000;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const int pos = std::stoi(rows[i][0]);
            CHECK(pos >= last_pos);
            last_pos = pos;
            total += std::stod(rows[i][2]);
        }
        CHECK(total == Approx(1.0).margin(1e-10));
    }
    SECTION("--steps and --dense") {
        const auto config = write_config(dir.path, "c.json", walk_config(45, 8, 4, "V"));
        cli::Options opt{config.string(), (dir.path / "out").string()};
        opt.dense = true;
        opt.steps = 3;
        REQUIRE(cli::run("simulate", opt) == cli::exit_ok);
        const auto rows = csv_rows(dir.path / "out" / "simulate.csv");
        CHECK(rows.size() == 1 + 2 * (3 + 1));  // parity-allowed grid for 3 steps
    }
    SECTION("missing walk section exits with the config code") {
        const auto config = write_config(dir.path, "bad.json", R"({"output": {}})");
        cli::Options opt{config.string(), (dir.path / "out").string()};
        CHECK(cli::run("simulate", opt) == cli::exit_config);
    }
    SECTION("unreadable config exits with the config code") {
        cli::Options opt{(dir.path / "missing.json").string(), (dir.path / "out").string()};
        CHECK(cli::run("simulate", opt) == cli::exit_config);
    }
}

TEST_CASE("quantify command", "[cli]") {
    TempDir dir("quantify");

    SECTION("reference point") {
        const auto config = write_config(dir.path, "c.json", walk_config(7, 20, 10, "V"));
        cli::Options opt{config.string(), (dir.path / "out").string()};
        REQUIRE(cli::run("quantify", opt) == cli::exit_ok);
        const auto rows = csv_rows(dir.path / "out" / "quantify.csv");
        REQUIRE(rows.size() == 2);
        CHECK(std::stod(rows[1][4]) == Approx(0.237).margin(1e-3));
        CHECK(std::stod(rows[1][5]) == Approx(0.237).margin(1e-3));
        CHECK(std::stod(rows[1][6]) == Approx(0.237).margin(1e-3));
    }
    SECTION("sweep emits twelve rows and an SVG when asked") {
        const auto config = write_config(dir.path, "c.json", walk_config(7, 20, 10, "V", true));
        cli::Options opt{config.string(), (dir.path / "out").string()};
        opt.sweep = true;
        REQUIRE(cli::run("quantify", opt) == cli::exit_ok);
        CHECK(csv_rows(dir.path / "out" / "quantify.csv").size() == 13);
        CHECK(fs::exists(dir.path / "out" / "quantify.svg"));
        const std::string svg = slurp(dir.path / "out" / "quantify.svg");
        CHECK(svg.find("<svg") != std::string::npos);
        CHECK(svg.find("non-classicality") != std::string::npos);
    }
}

TEST_CASE("table1 command", "[cli]") {
    TempDir dir("table1");

    SECTION("requires the reference geometry") {
        const auto config = write_config(dir.path, "c.json", walk_config(7, 12, 6, "V"));
        cli::Options opt{config.string(), (dir.path / "out").string()};
        CHECK(cli::run("table1", opt) == cli::exit_config);
    }
    SECTION("reference rows") {
        const auto config = write_config(dir.path, "c.json", walk_config(7, 20, 10, "V"));
        cli::Options opt{config.string(), (dir.path / "out").string()};
        REQUIRE(cli::run("table1", opt) == cli::exit_ok);
        const auto rows = csv_rows(dir.path / "out" / "table1.csv");
        REQUIRE(rows.size() == 13);

        const auto find_row = [&](const std::string& theta, const std::string& init)
            -> std::vector<std::string> {
            for (const auto& r : rows)
                if (r[0] == theta && r[1] == init) return r;
            FAIL("row not found");
            return {};
        };
        const auto v7 = find_row("7", "V");
        CHECK(std::stod(v7[2]) == Approx(0.237).margin(1e-3));
        CHECK(std::stod(v7[3]) == Approx(1.477).margin(1e-3));
        const auto h34 = find_row("34", "H");
        CHECK(std::stod(h34[2]) == Approx(0.644).margin(1e-3));
        CHECK(std::stod(h34[3]) == Approx(1.085).margin(1e-3));

        SECTION("theory column identical across polarizations") {
            for (const std::string theta : {"0", "7", "11", "23", "34", "47"})
                CHECK(std::stod(find_row(theta, "V")[2])
                      == Approx(std::stod(find_row(theta, "H")[2])).margin(1e-12));
        }
    }
}

TEST_CASE("visualize command", "[cli]") {
    TempDir dir("visualize");

    SECTION("odd N is a config error") {
        const auto config = write_config(dir.path, "c.json", walk_config(45, 9, 4, "V"));
        cli::Options opt{config.string(), (dir.path / "out").string()};
        CHECK(cli::run("visualize", opt) == cli::exit_config);
    }
    SECTION("no differences at theta = 0") {
        const auto config = write_config(dir.path, "c.json", walk_config(0, 20, 10, "V"));
        cli::Options opt{config.string(), (dir.path / "out").string()};
        REQUIRE(cli::run("visualize", opt) == cli::exit_ok);
        CHECK(csv_rows(dir.path / "out" / "visualize_c.csv").size() == 1);  // header only
    }
    SECTION("emits three tables plus chart, all in the manifest") {
        const auto config = write_config(dir.path, "c.json", walk_config(45, 20, 10, "V", true));
        cli::Options opt{config.string(), (dir.path / "out").string()};
        REQUIRE(cli::run("visualize", opt) == cli::exit_ok);
        for (const char* name : {"visualize_a.csv", "visualize_b.csv", "visualize_c.csv",
                                 "visualize.svg"})
            CHECK(fs::exists(dir.path / "out" / name));

        const auto manifest = nlohmann::json::parse(slurp(dir.path / "out" / "manifest.json"));
        REQUIRE(manifest.at("files").size() == 4);
        for (const auto& f : manifest.at("files")) {
            const std::string bytes = slurp(dir.path / "out" / f.at("name").get<std::string>());
            CHECK(fnv1a64(bytes) == f.at("fnv1a64").get<std::string>());
            CHECK(bytes.size() == f.at("bytes").get<std::size_t>());
        }
        CHECK(manifest.at("tool_version").get<std::string>() == version);
    }
    SECTION("sum of |difference| equals the quantifier output") {
        const auto config = write_config(dir.path, "c.json", walk_config(45, 20, 10, "V"));
        cli::Options opt{config.string(), (dir.path / "out").string()};
        REQUIRE(cli::run("visualize", opt) == cli::exit_ok);
        double total = 0.0;
        const auto rows = csv_rows(dir.path / "out" / "visualize_c.csv");
        for (std::size_t i = 1; i < rows.size(); ++i)
            total += std::abs(std::stod(rows[i][2]));
        const auto cfg = make_walk_config(45.0, 20, 10, 0, 0.0);
        CHECK(total == Approx(coherence_C_prob(cfg)).margin(1e-12));
    }
}

TEST_CASE("montecarlo command", "[cli]") {
    TempDir dir("montecarlo");
    const std::string body = R"({
      "walk": { "theta_deg": 11, "N": 12, "M": 6, "x0": 0, "initial": "V" },
      "loss": { "eta_H": 1.0, "eta_V": 1.0, "residual_transmission": 0.02 },
      "montecarlo": { "samples": 25, "seed": 77 },
      "output": { "formats": ["csv"] }
    })";

    SECTION("zero jitter zeroes the spread columns") {
        const std::string zero = R"({
          "walk": { "theta_deg": 11, "N": 12, "M": 6, "initial": "V" },
          "montecarlo": { "samples": 10, "seed": 3, "theta_jitter": 0,
                          "coupling_jitter": 0, "extinction_jitter": 0 }
        })";
        const auto config = write_config(dir.path, "z.json", zero);
        cli::Options opt{config.string(), (dir.path / "out0").string()};
        REQUIRE(cli::run("montecarlo", opt) == cli::exit_ok);
        const auto rows = csv_rows(dir.path / "out0" / "montecarlo_summary.csv");
        CHECK(rows[1][1] == "0");
        CHECK(rows[1][3] == "0");
    }
    SECTION("reruns with one seed are byte-identical") {
        const auto config = write_config(dir.path, "c.json", body);
        cli::Options opt1{config.string(), (dir.path / "outA").string()};
        cli::Options opt2{config.string(), (dir.path / "outB").string()};
        REQUIRE(cli::run("montecarlo", opt1) == cli::exit_ok);
        REQUIRE(cli::run("montecarlo", opt2) == cli::exit_ok);
        CHECK(slurp(dir.path / "outA" / "montecarlo_samples.csv")
              == slurp(dir.path / "outB" / "montecarlo_samples.csv"));
        CHECK(slurp(dir.path / "outA" / "montecarlo_summary.csv")
              == slurp(dir.path / "outB" / "montecarlo_summary.csv"));
        const auto rows = csv_rows(dir.path / "outA" / "montecarlo_samples.csv");
        REQUIRE(rows.size() == 26);
        CHECK(rows[0] == std::vector<std::string>{"sample", "theta_deg", "eta_H", "eta_V",
                                                  "epsilon", "K", "C"});
    }
    SECTION("a degenerate loss model surfaces as a numerical error") {
        const std::string degenerate = R"({
          "walk": { "theta_deg": 45, "N": 12, "M": 6, "initial": "V" },
          "loss": { "eta_H": 1e-12, "eta_V": 1e-12 },
          "montecarlo": { "samples": 2, "seed": 1 }
        })";
        const auto config = write_config(dir.path, "d.json", degenerate);
        cli::Options opt{config.string(), (dir.path / "outd").string()};
        CHECK(cli::run("montecarlo", opt) == cli::exit_numerical);
    }
}

TEST_CASE("lindblad-check command", "[cli]") {
    TempDir dir("lindblad");

    SECTION("walk embedding matches the walk quantifier") {
        const std::string body = R"({
          "walk": { "theta_deg": 47, "N": 4, "M": 2, "initial": "V" },
          "lindblad": { "from_walk": true }
        })";
        const auto config = write_config(dir.path, "c.json", body);
        cli::Options opt{config.string(), (dir.path / "out").string()};
        REQUIRE(cli::run("lindblad-check", opt) == cli::exit_ok);
        const auto rows = csv_rows(dir.path / "out" / "lindblad_check.csv");
        const auto cfg = make_walk_config(47.0, 4, 2, 0, 0.0);
        CHECK(std::stod(rows[1][2]) == Approx(kolmogorov_K(cfg)).margin(1e-9));
        CHECK(std::abs(std::stod(rows[1][4])) < 1e-10);
    }
    SECTION("explicit dissipative generator satisfies the identity") {
        const std::string body = R"({
          "walk": { "theta_deg": 45, "N": 2, "M": 1, "initial": "V" },
          "lindblad": {
            "hamiltonian": [[[0.4,0],[0.3,-0.1]],[[0.3,0.1],[-0.2,0]]],
            "jump_operators": [[[[0,0],[0.8,0]],[[0,0],[0,0]]]],
            "rates": [0.6],
            "initial_populations": [0.35, 0.65],
            "s": 0.5, "t": 1.4
          }
        })";
        const auto config = write_config(dir.path, "c.json", body);
        cli::Options opt{config.string(), (dir.path / "out2").string()};
        REQUIRE(cli::run("lindblad-check", opt) == cli::exit_ok);
        const auto rows = csv_rows(dir.path / "out2" / "lindblad_check.csv");
        CHECK(std::abs(std::stod(rows[1][4])) < 1e-10);
    }
    SECTION("embedding guard on the walk size") {
        const std::string body = R"({
          "walk": { "theta_deg": 47, "N": 20, "M": 10, "initial": "V" },
          "lindblad": { "from_walk": true }
        })";
        const auto config = write_config(dir.path, "c.json", body);
        cli::Options opt{config.string(), (dir.path / "out3").string()};
        CHECK(cli::run("lindblad-check", opt) == cli::exit_config);
    }
}

TEST_CASE("output directory resolution", "[cli]") {
    TempDir dir("outdir");
    const auto config = write_config(dir.path, "c.json", walk_config(0, 4, 2, "V"));

    SECTION("environment variable is the fallback") {
        ::setenv("COHWALK_OUTPUT_DIR", (dir.path / "envout").string().c_str(), 1);
        cli::Options opt{config.string(), ""};
        REQUIRE(cli::run("simulate", opt) == cli::exit_ok);
        ::unsetenv("COHWALK_OUTPUT_DIR");
        CHECK(fs::exists(dir.path / "envout" / "simulate.csv"));
    }
    SECTION("explicit option wins over the environment") {
        ::setenv("COHWALK_OUTPUT_DIR", (dir.path / "envout2").string().c_str(), 1);
        cli::Options opt{config.string(), (dir.path / "flagout").string()};
        REQUIRE(cli::run("simulate", opt) == cli::exit_ok);
        ::unsetenv("COHWALK_OUTPUT_DIR");
        CHECK(fs::exists(dir.path / "flagout" / "simulate.csv"));
        CHECK_FALSE(fs::exists(dir.path / "envout2" / "simulate.csv"));
    }
    SECTION("unwritable output directory exits with the i/o code") {
        std::ofstream(dir.path / "blocker") << "file";
        cli::Options opt{config.string(), (dir.path / "blocker" / "sub").string()};
        CHECK(cli::run("simulate", opt) == cli::exit_io);
    }
}
