#include <doctest.h>

#include <thread>

#include "evc/service.hpp"
#include "support.hpp"

// after Eigen: <resolv.h> defines a `_res` macro that clashes with it
#include <httplib.h>

using namespace evc;
using nlohmann::json;

namespace {

RunConfig small(const std::string &name, std::size_t n = 1000) {
    return load_config(support::small_config(support::scratch_dir(name), n));
}

/// Loaded once and shared: loading solves the default envelope.
Service &shared_service() {
    static Service svc(4);
    static const bool loaded = [] {
        svc.load(small("service_shared"));
        return true;
    }();
    (void)loaded;
    return svc;
}

std::vector<std::string> errors_of(const HttpReply &r) {
    return json::parse(r.body)["errors"].get<std::vector<std::string>>();
}

} // namespace

TEST_SUITE("service") {

TEST_CASE("handlers answer 503 before datasets are loaded") {
    Service svc;
    CHECK(svc.post_scenario(R"({"preset": "Mix"})").status == 503);
    CHECK(svc.get_capacity(std::nullopt).status == 503);
    CHECK(svc.get_meta().status == 503);
}

TEST_CASE("failed load keeps answering 503 with the reason") {
    Service svc;
    auto cfg = small("service_bad");
    cfg.network = "/nonexistent/network";
    CHECK_THROWS(svc.load(cfg));
    const auto r = svc.get_meta();
    CHECK(r.status == 503);
    CHECK(r.body.find("/nonexistent/network") != std::string::npos);
}

TEST_CASE("asynchronous load becomes ready") {
    Service svc;
    svc.load_async(small("service_async", 200));
    svc.wait_ready();
    CHECK(svc.ready());
    CHECK(svc.get_meta().status == 200);
}

TEST_CASE("meta describes the loaded datasets") {
    auto &svc = shared_service();
    const auto r = svc.get_meta();
    REQUIRE(r.status == 200);
    const auto j = json::parse(r.body);
    CHECK(j["population"]["size"] == 1000);
    CHECK(j["zones"].size() == 20);
    CHECK(j["presets"].size() == 5);
    CHECK(j["mode_specs"].size() == kModeCount);
    CHECK(j["network"]["designated_buses"].size() == 2);
    CHECK(j["hours"].size() == 24);
    CHECK(j["policies"] == json::array({"earliest", "latest", "distributed"}));
}

TEST_CASE("scenario request returns profiles, shares and headroom") {
    auto &svc = shared_service();
    const auto r = svc.post_scenario(R"({"preset": "CarFocused", "policy": "latest", "seed": 9})");
    REQUIRE(r.status == 200);
    const auto j = json::parse(r.body);
    CHECK(j["scenario"]["name"] == "CarFocused");
    CHECK(j["profiles"].size() == 1);
    CHECK(j["profiles"]["latest"]["total_mw"].size() == 24);
    CHECK(j["headroom"]["latest"].contains("utilization"));
    CHECK(j["capacity"]["capacity_mw"].size() == 24);
    double sum = 0.0;
    for (const auto &[k, v] : j["shares"]["by_trips"].items()) {
        sum += v.get<double>();
    }
    CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("repeated request is served from the cache") {
    auto &svc = shared_service();
    const std::string body = R"({"weights": {"Car": 1, "Transit": 2}, "seed": 3})";
    const auto first = svc.post_scenario(body);
    const auto second = svc.post_scenario(body);
    CHECK_FALSE(first.cache_hit);
    CHECK(second.cache_hit);
    CHECK(first.body == second.body);
    // key order does not matter
    CHECK(svc.post_scenario(R"({"seed": 3, "weights": {"Transit": 2, "Car": 1}})").cache_hit);
}

TEST_CASE("cache evicts the least recently used entry") {
    auto &svc = shared_service();
    const auto req = [](int seed) { return R"({"preset": "Mix", "seed": )" + std::to_string(seed) + "}"; };
    for (int s = 100; s < 104; ++s) {
        svc.post_scenario(req(s));
    }
    CHECK(svc.post_scenario(req(100)).cache_hit);
    svc.post_scenario(req(104)); // evicts 101
    CHECK_FALSE(svc.post_scenario(req(101)).cache_hit);
    CHECK(svc.post_scenario(req(104)).cache_hit);
}

TEST_CASE("invalid requests get 400 with field messages") {
    auto &svc = shared_service();
    CHECK(svc.post_scenario("{oops").status == 400);
    const auto r = svc.post_scenario(
        R"({"preset": "Everything", "wfh_level": "Low", "policy": "now", "colour": 1})");
    CHECK(r.status == 400);
    const auto e = errors_of(r);
    CHECK(e.size() == 4);
    const auto w = svc.post_scenario(R"({"weights": {"Car": 0}})");
    CHECK(w.status == 400);
    CHECK(errors_of(w)[0].rfind("weights", 0) == 0);
    CHECK(svc.post_scenario(R"({"preset": "Mix", "lambda": -2})").status == 400);
    CHECK(svc.post_scenario(R"({})").status == 400);
}

TEST_CASE("request parsing") {
    std::vector<std::string> errors;
    std::optional<double> lambda;
    const auto req = parse_scenario_request(
        json::parse(R"({"preset": "TransitFocused", "wfh_level": "Zero",
                        "policies": ["distributed", "earliest", "distributed"],
                        "seed": 5, "lambda": 0.1, "name": "t"})"),
        errors, lambda);
    REQUIRE(req);
    CHECK(errors.empty());
    CHECK(req->preset == Preset::TransitFocused);
    CHECK(req->wfh_level == WfhLevel::Zero);
    CHECK(req->policies ==
          std::vector<ChargingPolicy>{ChargingPolicy::Distributed, ChargingPolicy::Earliest});
    CHECK(req->seed == 5);
    CHECK(lambda == 0.1);
    CHECK(req->name == "t");

    errors.clear();
    CHECK_FALSE(parse_scenario_request(json::parse(R"({"preset": "Mix", "seed": -1})"), errors,
                                       lambda));
    CHECK(errors == std::vector<std::string>{"seed: expected a non-negative integer"});
}

TEST_CASE("capacity endpoint validates and caches lambda") {
    auto &svc = shared_service();
    const auto base = svc.get_capacity(std::nullopt);
    CHECK(base.status == 200);
    CHECK(base.cache_hit);
    const auto j = json::parse(base.body);
    CHECK(j["capacity_mw"].size() == 24);
    CHECK(j["lambda"] == 0.0);
    CHECK(svc.get_capacity(std::string("abc")).status == 400);
    CHECK(svc.get_capacity(std::string("-1")).status == 400);
    CHECK(svc.get_capacity(std::string("inf")).status == 400);
    const auto reg = svc.get_capacity(std::string("0.1"));
    CHECK(reg.status == 200);
    CHECK_FALSE(reg.cache_hit);
    CHECK(svc.get_capacity(std::string("0.1")).cache_hit);
}

TEST_CASE("concurrent requests agree") {
    auto &svc = shared_service();
    std::vector<std::string> bodies(6);
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < bodies.size(); ++i) {
        threads.emplace_back([&, i] {
            bodies[i] = svc.post_scenario(R"({"preset": "MicromobilityFocused", "seed": 77})").body;
        });
    }
    for (auto &t : threads) {
        t.join();
    }
    for (const auto &b : bodies) {
        CHECK(b == bodies.front());
    }
}

TEST_CASE("routes over HTTP") {
    auto &svc = shared_service();
    httplib::Server server;
    svc.mount(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    const auto meta = client.Get("/api/meta");
    REQUIRE(meta);
    CHECK(meta->status == 200);
    CHECK(meta->get_header_value("Access-Control-Allow-Origin") == "*");
    CHECK(meta->get_header_value("Content-Type") == "application/json");

    const std::string body = R"({"preset": "Mix", "policy": "earliest", "seed": 555})";
    const auto first = client.Post("/api/scenario", body, "application/json");
    REQUIRE(first);
    CHECK(first->status == 200);
    CHECK(first->get_header_value("X-Cache") == "MISS");
    const auto second = client.Post("/api/scenario", body, "application/json");
    REQUIRE(second);
    CHECK(second->get_header_value("X-Cache") == "HIT");

    const auto bad = client.Post("/api/scenario", R"({"preset": 3})", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);

    const auto cap = client.Get("/api/capacity?lambda=0");
    REQUIRE(cap);
    CHECK(cap->status == 200);

    const auto options = client.Options("/api/scenario");
    REQUIRE(options);
    CHECK(options->status == 204);

    server.stop();
    worker.join();
}

} // TEST_SUITE
