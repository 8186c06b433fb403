#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "uavplan/params.hpp"

using namespace uavplan;

TEST_CASE("table-style config accepted with defaults") {
    const std::string cfg = R"(
# reference operating point
n_users = 30
n_subcarriers = 8
bandwidth_hz = 20e6
carrier_freq_hz = 900e6
pathloss_exponent = 4
h_min = 21
h_max = 100
max_power_w = 0.2
environment = urban
)";
    auto [p, env] = parse_config(cfg);
    CHECK(p.n_subcarriers == 8);
    CHECK(p.carrier_freq_hz == doctest::Approx(900e6));
    CHECK(p.subcarrier_bandwidth() == doctest::Approx(2.5e6));
    CHECK(env.b1 == doctest::Approx(9.61));
    CHECK(env.xi_nlos == doctest::Approx(20.0));
    // omitted keys fall back to documented defaults
    CHECK(p.penalty_weight == doctest::Approx(10.0));
    CHECK(p.c_min == 1);
    CHECK(p.min_separation_m == doctest::Approx(50.0));
}

TEST_CASE("inverted altitude bounds rejected with the offending key") {
    CHECK_THROWS_WITH_AS(parse_config("h_min = 100\nh_max = 21\n"),
                         doctest::Contains("altitude bounds inverted"), ConfigError);
}

TEST_CASE("unknown key and malformed value are reported") {
    CHECK_THROWS_AS(parse_config("frobnicate = 1\n"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("n_users = many\n"), doctest::Contains("n_users"),
                         ConfigError);
}

TEST_CASE("environment presets and overrides") {
    auto [p, env] = parse_config("environment = high-rise\n");
    (void)p;
    CHECK(env.b1 == doctest::Approx(27.23));
    CHECK(env.xi_nlos == doctest::Approx(34.0));

    auto [p2, env2] = parse_config("[environment]\nname = custom\nb1 = 5\nb2 = 0.3\n"
                                   "xi_los = 1.2\nxi_nlos = 25\n");
    (void)p2;
    CHECK(env2.name == "custom");
    CHECK(env2.b2 == doctest::Approx(0.3));
}

TEST_CASE("config round-trips through dump and parse") {
    SystemParams p;
    p.n_users = 17;
    p.serve_fraction = 0.8;
    p.los_threshold = 0.85;
    p.bandwidth_mode = BandwidthMode::LiteralB;
    p.mrt_gain = MrtGain::NormSquared;
    EnvironmentParams env = environment_preset("dense-urban");
    auto [q, env2] = parse_config(dump_config(p, env));
    CHECK(q.n_users == 17);
    CHECK(q.serve_fraction == doctest::Approx(0.8));
    CHECK(q.bandwidth_mode == BandwidthMode::LiteralB);
    CHECK(q.mrt_gain == MrtGain::NormSquared);
    CHECK(env2.name == "dense-urban");
    CHECK(env2.b1 == doctest::Approx(12.08));
}

TEST_CASE("mode flags parse") {
    auto [p, env] = parse_config("noise_mode = literal_fc_sigma\nxi_scale = db\n");
    (void)env;
    CHECK(p.noise_mode == NoiseMode::LiteralFcSigma);
    CHECK(p.xi_scale == XiScale::Db);
    // literal noise: f_c * psd
    CHECK(p.noise_power_w() == doctest::Approx(900e6 * 1e-20));
}

TEST_CASE("default noise power is psd times subcarrier bandwidth") {
    SystemParams p;
    CHECK(p.noise_power_w() == doctest::Approx(1e-20 * 2.5e6));
}
