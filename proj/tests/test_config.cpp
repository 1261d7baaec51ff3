#include <catch2/catch.hpp>
#include <json.hpp>

#include "flatcrane/config.hpp"
#include "flatcrane/csv.hpp"

using namespace flatcrane;
using nlohmann::json;

namespace {

json minimal_config() {
    return json{{"plan", {{"start", {{"q1", 0.0}, {"q3", 1.0}}},
                          {"goal", {{"q1", 6.0}, {"q3", 8.0}}}}}};
}

} // namespace

TEST_CASE("minimal config gets the documented defaults") {
    const ExperimentConfig cfg = parse_config(minimal_config());
    CHECK(cfg.params.T_s == 0.05);
    CHECK(cfg.params.L == 10.0);
    CHECK(cfg.params.ansatz.is_default_cubic());
    CHECK(cfg.plan.N == 240);
    CHECK(cfg.plan.head_len == 10);
    CHECK(cfg.plan.tail_len == 10);
    CHECK(cfg.plan.blend_degree == 9);
    CHECK(cfg.plan.q3_min == Approx(0.5));
    CHECK(cfg.plan.q3_max == Approx(9.5));
    CHECK(cfg.variant == CoriolisVariant::Lagrange);
    CHECK(cfg.out_dir == std::filesystem::path("out"));
}

TEST_CASE("negative mass is rejected naming the field") {
    json j = minimal_config();
    j["params"]["m_h"] = -2.0;
    try {
        parse_config(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("m_h") != std::string::npos);
    }
}

TEST_CASE("unknown fields are rejected in strict mode") {
    json j = minimal_config();
    j["plan"]["blnd_degree"] = 9;
    try {
        parse_config(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("blnd_degree") != std::string::npos);
    }
    json top = minimal_config();
    top["paramz"] = json::object();
    CHECK_THROWS_AS(parse_config(top), ConfigError);
}

TEST_CASE("missing plan block or rest positions fail loudly") {
    CHECK_THROWS_AS(parse_config(json::object()), ConfigError);
    json j{{"plan", {{"start", {{"q1", 0.0}, {"q3", 1.0}}}}}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    json incomplete{{"plan", {{"start", {{"q1", 0.0}}},
                              {"goal", {{"q1", 1.0}, {"q3", 2.0}}}}}};
    CHECK_THROWS_AS(parse_config(incomplete), ConfigError);
}

TEST_CASE("variant, output and tolerance overrides are honored") {
    json j = minimal_config();
    j["variant"] = "printed";
    j["output"] = {{"dir", "results"}};
    j["tolerances"] = {{"open_loop", 1e-7}};
    const ExperimentConfig cfg = parse_config(j);
    CHECK(cfg.variant == CoriolisVariant::Printed);
    CHECK(cfg.out_dir == std::filesystem::path("results"));
    CHECK(cfg.tolerances.open_loop == 1e-7);
    CHECK(cfg.tolerances.affinity == 1e-9);

    j["variant"] = "midpoint";
    CHECK_THROWS_AS(parse_config(j), ConfigError);
}

TEST_CASE("custom ansatz coefficients flow into the model") {
    json j = minimal_config();
    const double L = 10.0;
    j["params"]["ansatz"] = {
        {"coeffs", {0.0, 0.0, 3.0 / (2.0 * L * L), -1.0 / (2.0 * L * L * L)}}};
    const ExperimentConfig cfg = parse_config(j);
    CHECK_FALSE(cfg.params.ansatz.is_default_cubic());
    CHECK(cfg.params.ansatz.eval(L).phi == Approx(1.0));

    j["params"]["ansatz"]["coeffs"] = {0.0, 1.0};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
}

TEST_CASE("parse errors carry line and column") {
    const auto path = std::filesystem::temp_directory_path() / "flatcrane_bad_config.json";
    {
        std::ofstream out(path);
        out << "{\n  \"plan\": [1,\n}";
    }
    try {
        load_config(path);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line") != std::string::npos);
        CHECK(msg.find("column") != std::string::npos);
    }
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_config(path), ConfigError);
}

TEST_CASE("config echo resolves every default") {
    const ExperimentConfig cfg = parse_config(minimal_config());
    const json echo = config_echo(cfg);
    CHECK(echo.at("params").at("T_s") == 0.05);
    CHECK(echo.at("plan").at("N") == 240);
    CHECK(echo.at("variant") == "lagrange");
    CHECK(echo.at("tolerances").contains("open_loop"));
    CHECK(echo.at("params").at("ansatz").at("coeffs").size() == 4);
}

TEST_CASE("double formatting round-trips and is stable") {
    CHECK(format_double(0.05) == format_double(0.05));
    const double v = 1.0 / 3.0;
    CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(240.0) == "240");
}
