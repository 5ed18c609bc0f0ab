#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <omp.h>
#include <random>

#include "evc/csv.hpp"
#include "evc/population.hpp"
#include "support.hpp"

using namespace evc;

namespace {

const char *kHeader = "id,age,gender,disability,education,income_bucket,industry,home_zone,"
                      "work_zone,arrival_hour,hours_per_week,dwelling,baseline_mode\n";

std::filesystem::path write_file(const std::string &name, const std::string &text) {
    auto path = support::scratch_dir("population") / name;
    std::ofstream(path) << text;
    return path;
}

ZoneTable bundled_zones() { return load_zones(support::kData / "zones.csv"); }

} // namespace

TEST_SUITE("population") {

TEST_CASE("commute distance between centroids") {
    const auto a = support::zone("A", 0, 0);
    const auto b = support::zone("B", 3, 4);
    CHECK(commute_distance(a, b) == doctest::Approx(5.0));
    CHECK(commute_distance(a, a) == 0.0);
    CHECK(commute_distance(support::zone("C", 1, 1), support::zone("D", 4, 5)) ==
          doctest::Approx(5.0));
}

TEST_CASE("commute distance is symmetric and zero only for equal centroids") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int i = 0; i < 500; ++i) {
        const auto a = support::zone("A", u(rng), u(rng));
        const auto b = support::zone("B", u(rng), u(rng));
        CHECK(commute_distance(a, b) == commute_distance(b, a));
        CHECK(commute_distance(a, b) > 0.0);
    }
}

TEST_CASE("distance by individual resolves zones") {
    const auto zones = bundled_zones();
    auto ind = support::person(1, "BK01", "MN03");
    CHECK(commute_distance(ind, zones) == doctest::Approx(std::sqrt(1.0 + 49.0)));
    ind.work_zone = "nowhere";
    CHECK_THROWS_AS(commute_distance(ind, zones), Error);
}

TEST_CASE("zone table rejects duplicates and non-finite centroids") {
    CHECK_THROWS_AS(ZoneTable({support::zone("A", 0, 0), support::zone("A", 1, 1)}),
                    ValidationError);
    CHECK_THROWS_AS(ZoneTable({support::zone("A", NAN, 0)}), ValidationError);
    const auto zones = bundled_zones();
    CHECK(zones.size() == 20);
    CHECK(zones.at("MN03").region == RegionTag::Manhattan);
    CHECK_FALSE(zones.at("SI01").bike_accessible);
}

TEST_CASE("header-only population file gives an empty list") {
    const auto path = write_file("empty.csv", kHeader);
    CHECK(load_population(path, bundled_zones()).empty());
}

TEST_CASE("income bucket 7 is reported with row and field") {
    const auto path = write_file(
        "bad_income.csv",
        std::string(kHeader) + "1,30,Female,0,College,7,Service,MN01,MN02,8,40,Apartment,Subway\n");
    try {
        load_population(path, bundled_zones());
        FAIL("expected a validation error");
    } catch (const ValidationError &e) {
        REQUIRE(e.diagnostics().size() == 1);
        CHECK(e.diagnostics()[0].find("row 1") != std::string::npos);
        CHECK(e.diagnostics()[0].find("income_bucket") != std::string::npos);
    }
}

TEST_CASE("every bad field of every row is reported") {
    const auto path = write_file(
        "many_errors.csv",
        std::string(kHeader) + "1,12,Female,0,College,3,Service,MN01,MN02,8,40,Apartment,Subway\n" +
            "2,30,Female,2,College,3,Service,XX,MN02,25,40,Apartment,Hovercraft\n");
    try {
        load_population(path, bundled_zones());
        FAIL("expected a validation error");
    } catch (const ValidationError &e) {
        const auto &d = e.diagnostics();
        CHECK(d.size() == 5);
        CHECK(d[0].find("row 1, field age") != std::string::npos);
        CHECK(d[1].find("row 2, field disability") != std::string::npos);
        CHECK(d[2].find("row 2, field home_zone") != std::string::npos);
        CHECK(d[3].find("row 2, field arrival_hour") != std::string::npos);
        CHECK(d[4].find("row 2, field baseline_mode") != std::string::npos);
    }
}

TEST_CASE("missing population file names the path") {
    CHECK_THROWS_WITH_AS(load_population("/nonexistent/pop.csv", bundled_zones()),
                         doctest::Contains("/nonexistent/pop.csv"), Error);
}

TEST_CASE("bundled three-row fixture loads field by field") {
    const auto pop = load_population(support::kData / "population_fixture.csv", bundled_zones());
    REQUIRE(pop.size() == 3);
    CHECK(pop[0].id == 1);
    CHECK(pop[0].age == 34);
    CHECK(pop[0].gender == Gender::Female);
    CHECK_FALSE(pop[0].has_disability);
    CHECK(pop[0].education == Education::College);
    CHECK(pop[0].income_bucket == 5);
    CHECK(pop[0].industry == Industry::WhiteCollar);
    CHECK(pop[0].home_zone == "QN01");
    CHECK(pop[0].work_zone == "MN03");
    CHECK(pop[0].arrival_hour == 9);
    CHECK(pop[0].hours_per_week == 40.0);
    CHECK(pop[0].dwelling == Dwelling::Apartment);
    CHECK(pop[0].baseline_mode == Mode::Subway);

    CHECK(pop[1].age == 71);
    CHECK(pop[1].gender == Gender::Male);
    CHECK(pop[1].has_disability);
    CHECK(pop[1].education == Education::NotCollege);
    CHECK(pop[1].industry == Industry::BlueCollar);
    CHECK(pop[1].dwelling == Dwelling::SingleFamilyOwned);
    CHECK(pop[1].baseline_mode == Mode::PrivateEV);
    CHECK(pop[1].hours_per_week == 45.0);

    CHECK(pop[2].gender == Gender::Other);
    CHECK(pop[2].industry == Industry::Service);
    CHECK(pop[2].home_zone == "BK01");
    CHECK(pop[2].baseline_mode == Mode::EBike);
}

TEST_CASE("population round-trips through CSV") {
    const auto zones = bundled_zones();
    const auto params = load_synthesis_params(support::kData / "synthesis.json");
    const auto pop = synthesize_population(200, params, 3);
    const auto path = support::scratch_dir("population_rt") / "pop.csv";
    write_population(path, pop);
    CHECK(load_population(path, zones) == pop);
}

TEST_CASE("synthesis with n = 0 is empty") {
    const auto params = load_synthesis_params(support::kData / "synthesis.json");
    CHECK(synthesize_population(0, params, 1).empty());
}

TEST_CASE("synthesis is deterministic across runs and thread counts") {
    const auto params = load_synthesis_params(support::kData / "synthesis.json");
    const auto serial = synthesize_population(3000, params, 77, Exec::Serial);
    CHECK(serial == synthesize_population(3000, params, 77, Exec::Serial));
    const int saved = omp_get_max_threads();
    for (int threads : {1, 2, 3, 8}) {
        omp_set_num_threads(threads);
        CHECK(synthesize_population(3000, params, 77, Exec::Parallel) == serial);
    }
    omp_set_num_threads(saved);
    CHECK(synthesize_population(3000, params, 78) != serial);
}

TEST_CASE("uniform age marginal converges to its mean") {
    auto params = load_synthesis_params(support::kData / "synthesis.json");
    params.age = UniformInt{20, 60};
    const auto pop = synthesize_population(100000, params, 11);
    double sum = 0.0;
    int lo = 1000;
    int hi = 0;
    for (const auto &ind : pop) {
        sum += ind.age;
        lo = std::min(lo, ind.age);
        hi = std::max(hi, ind.age);
    }
    CHECK(std::abs(sum / static_cast<double>(pop.size()) - 40.0) < 0.5);
    CHECK(lo == 20);
    CHECK(hi == 60);
}

TEST_CASE("categorical marginals converge to their weights") {
    const auto params = load_synthesis_params(support::kData / "synthesis.json");
    const auto pop = synthesize_population(100000, params, 12);
    double college = 0.0;
    double sfo = 0.0;
    for (const auto &ind : pop) {
        college += ind.education == Education::College;
        sfo += ind.dwelling == Dwelling::SingleFamilyOwned;
    }
    const double n = static_cast<double>(pop.size());
    // 4 standard errors of a proportion near 0.5 at n = 1e5
    CHECK(std::abs(college / n - 0.55) < 0.0064);
    CHECK(std::abs(sfo / n - 0.35) < 0.0064);
}

TEST_CASE("weights that do not sum to one are rejected") {
    auto doc = nlohmann::json::parse(std::ifstream(support::kData / "synthesis.json"));
    doc["education"]["weights"]["College"] = 0.5500001;
    CHECK_THROWS_AS(parse_synthesis_params(doc), ValidationError);
    doc["education"]["weights"]["College"] = 0.55 + 1e-12;
    CHECK_NOTHROW(parse_synthesis_params(doc));
}

TEST_CASE("synthesized individuals satisfy the individual invariants") {
    const auto zones = bundled_zones();
    const auto params = load_synthesis_params(support::kData / "synthesis.json");
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        for (const auto &ind : synthesize_population(500, params, seed)) {
            CHECK(check_individual(ind, zones).empty());
        }
    }
}

} // TEST_SUITE
