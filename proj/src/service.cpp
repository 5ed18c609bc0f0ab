#include "evc/service.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include <httplib.h>

#include "evc/error.hpp"

namespace evc {

using nlohmann::json;

namespace {

std::string error_body(const std::vector<std::string> &errors) {
    return json{{"errors", errors}}.dump();
}

HttpReply not_ready(const std::optional<std::string> &load_error) {
    if (load_error) {
        return {503, error_body({"datasets failed to load: " + *load_error}), false};
    }
    return {503, error_body({"datasets are still loading"}), false};
}

json hours_axis() {
    std::vector<int> h(kHours);
    for (int i = 0; i < kHours; ++i) {
        h[static_cast<std::size_t>(i)] = i;
    }
    return h;
}

json request_key(const ScenarioRequest &req, double lambda) {
    std::vector<std::string> policies;
    for (auto p : req.policies) {
        policies.emplace_back(to_string(p));
    }
    return {{"preset", req.preset ? json(std::string(to_string(*req.preset))) : json(nullptr)},
            {"weights", req.weights ? to_json(*req.weights) : json(nullptr)},
            {"wfh_level", to_string(req.wfh_level)},
            {"policies", policies},
            {"seed", req.seed},
            {"name", req.name},
            {"lambda", lambda}};
}

} // namespace

std::optional<ScenarioRequest> parse_scenario_request(const json &doc,
                                                      std::vector<std::string> &errors,
                                                      std::optional<double> &lambda) {
    if (!doc.is_object()) {
        errors.emplace_back("body: expected a JSON object");
        return std::nullopt;
    }
    const std::size_t before = errors.size();
    static const std::set<std::string> known{"preset", "weights", "wfh_level", "policy",
                                             "policies", "seed", "lambda", "name"};
    for (const auto &[k, v] : doc.items()) {
        if (!known.contains(k)) {
            errors.push_back(k + ": unknown field");
        }
    }
    ScenarioRequest req;
    if (doc.contains("preset") && doc.contains("weights")) {
        errors.emplace_back("preset: give either 'preset' or 'weights', not both");
    } else if (doc.contains("preset")) {
        const auto p = doc["preset"].is_string() ? parse_preset(doc["preset"].get<std::string>())
                                                 : std::nullopt;
        if (!p) {
            errors.emplace_back("preset: expected one of Baseline2019, TransitFocused, "
                                "CarFocused, MicromobilityFocused, Mix");
        }
        req.preset = p;
    } else if (doc.contains("weights")) {
        try {
            req.weights = parse_weights(doc["weights"]);
            for (const auto &e : check_weights(*req.weights)) {
                errors.push_back("weights: " + e);
            }
        } catch (const ValidationError &e) {
            for (const auto &d : e.diagnostics()) {
                errors.push_back("weights: " + d);
            }
        }
    } else {
        errors.emplace_back("preset: required unless 'weights' is given");
    }
    if (doc.contains("wfh_level")) {
        const auto l = doc["wfh_level"].is_string()
                           ? parse_wfh_level(doc["wfh_level"].get<std::string>())
                           : std::nullopt;
        if (!l) {
            errors.emplace_back("wfh_level: expected one of High, Medium, Zero");
        } else {
            req.wfh_level = *l;
        }
    }
    if (doc.contains("policy") && doc.contains("policies")) {
        errors.emplace_back("policy: give either 'policy' or 'policies', not both");
    } else if (doc.contains("policy") || doc.contains("policies")) {
        const bool single = doc.contains("policy");
        const auto field = single ? std::string("policy") : std::string("policies");
        json items = single ? json::array({doc["policy"]}) : doc["policies"];
        req.policies.clear();
        if (!items.is_array() || items.empty()) {
            errors.push_back(field + ": expected a non-empty array");
        } else {
            for (const auto &item : items) {
                const auto p = item.is_string() ? parse_policy(item.get<std::string>())
                                                : std::nullopt;
                if (!p) {
                    errors.push_back(field + ": expected earliest, latest or distributed");
                    break;
                }
                if (std::find(req.policies.begin(), req.policies.end(), *p) == req.policies.end()) {
                    req.policies.push_back(*p);
                }
            }
        }
    }
    if (doc.contains("seed")) {
        if (doc["seed"].is_number_unsigned()) {
            req.seed = doc["seed"].get<std::uint64_t>();
        } else {
            errors.emplace_back("seed: expected a non-negative integer");
        }
    }
    if (doc.contains("name")) {
        if (doc["name"].is_string()) {
            req.name = doc["name"].get<std::string>();
        } else {
            errors.emplace_back("name: expected a string");
        }
    }
    if (doc.contains("lambda")) {
        const auto &l = doc["lambda"];
        if (!l.is_number() || !(l.get<double>() >= 0.0) || !std::isfinite(l.get<double>())) {
            errors.emplace_back("lambda: expected a finite number >= 0");
        } else {
            lambda = l.get<double>();
        }
    }
    if (errors.size() != before) {
        return std::nullopt;
    }
    return req;
}

Service::Service(std::size_t cache_capacity) : cache_capacity_(std::max<std::size_t>(1, cache_capacity)) {}

Service::~Service() {
    if (loader_.joinable()) {
        loader_.join();
    }
}

void Service::load(const RunConfig &cfg) {
    try {
        auto data = std::make_shared<const Datasets>(load_datasets(cfg));
        default_lambda_ = cfg.lambda;

        json zones = json::array();
        for (const auto &z : data->zones) {
            zones.push_back({{"id", z.id},
                             {"region", to_string(z.region)},
                             {"centroid_x_km", z.centroid_x_km},
                             {"centroid_y_km", z.centroid_y_km},
                             {"bike_accessible", z.bike_accessible}});
        }
        json presets = json::array();
        for (auto p : kAllPresets) {
            const auto spec = preset(data->presets, p);
            presets.push_back({{"name", to_string(p)},
                               {"weights", to_json(spec.weights)},
                               {"bypass_sampling", spec.bypass_sampling}});
        }
        json specs = json::array();
        for (const auto &[mode, s] : data->specs.specs()) {
            specs.push_back({{"mode", to_string(mode)},
                             {"category", to_string(category_of(mode))},
                             {"kind", to_string(s.kind)},
                             {"range_km", s.range_km},
                             {"efficiency_kwh_per_km", s.efficiency_kwh_per_km},
                             {"charge_power_kw", s.charge_power_kw},
                             {"assumption", s.assumption}});
        }
        json designated = json::array();
        for (auto i : data->network.designated()) {
            designated.push_back(data->network.buses[i].id);
        }
        std::vector<std::string> policies;
        for (auto p : kAllPolicies) {
            policies.emplace_back(to_string(p));
        }
        const json meta{
            {"population", {{"size", data->population.size()}}},
            {"zones", zones},
            {"presets", presets},
            {"mode_specs", specs},
            {"transit", {{"per_rider_kwh", data->transit.per_rider_kwh},
                         {"fixed_kw", std::vector<double>(data->transit.fixed_kw.begin(),
                                                          data->transit.fixed_kw.end())},
                         {"assumption", data->transit.assumption}}},
            {"network", {{"name", data->network.name},
                         {"buses", data->network.buses.size()},
                         {"lines", data->network.lines.size()},
                         {"designated_buses", designated}}},
            {"policies", policies},
            {"wfh_levels", {"High", "Medium", "Zero"}},
            {"default_lambda", default_lambda_},
            {"population_weight", data->population_weight},
            {"hours", hours_axis()}};
        meta_body_ = meta.dump();
        data_ = std::move(data);
        capacity_for(default_lambda_);
        ready_.store(true);
    } catch (const std::exception &e) {
        std::lock_guard lock(mutex_);
        load_error_ = e.what();
        throw;
    }
}

void Service::load_async(RunConfig cfg) {
    loader_ = std::thread([this, cfg = std::move(cfg)] {
        try {
            load(cfg);
        } catch (const std::exception &) {
            // recorded in load_error_
        }
    });
}

void Service::wait_ready() {
    if (loader_.joinable()) {
        loader_.join();
    }
}

std::optional<std::string> Service::load_error() const {
    std::lock_guard lock(mutex_);
    return load_error_;
}

const Service::CapacityEntry &Service::capacity_for(double lambda) {
    std::lock_guard lock(capacity_mutex_);
    auto it = capacity_cache_.find(lambda);
    if (it != capacity_cache_.end()) {
        return *it->second;
    }
    auto entry = std::make_unique<CapacityEntry>();
    entry->envelope = capacity_envelope(data_->network, grid_options(*data_, lambda));
    const auto &res = entry->envelope.result;
    json doc{{"network", data_->network.name},
             {"lambda", lambda},
             {"hours", hours_axis()},
             {"capacity_mw", entry->envelope.mw},
             {"additional_mw", res.total_additional_mw()},
             {"objective", res.objective},
             {"solution", to_json(data_->network, res)}};
    entry->body = doc.dump();
    return *capacity_cache_.emplace(lambda, std::move(entry)).first->second;
}

std::string Service::scenario_body(const ScenarioRequest &req, std::optional<double> lambda) {
    const auto &cap = capacity_for(lambda.value_or(default_lambda_));
    const auto outcome = evaluate_scenario(*data_, req);
    json profiles = json::object();
    json rooms = json::object();
    for (const auto &[policy, demand] : outcome.demand) {
        const auto key = std::string(to_string(policy));
        profiles[key] = to_json(demand.profile);
        rooms[key] = to_json(headroom(demand.profile, cap.envelope.mw));
    }
    std::size_t range = 0;
    std::size_t window = 0;
    for (const auto &i : outcome.demand.front().second.issues) {
        (i.kind == TaskIssue::Kind::RangeExceeded ? range : window) += 1;
    }
    const json doc{{"scenario", scenario_metadata(outcome.scenario)},
                   {"shares", to_json(outcome.shares)},
                   {"zones", to_json(zone_trip_shares(outcome.scenario, data_->population))},
                   {"hours", hours_axis()},
                   {"profiles", profiles},
                   {"headroom", rooms},
                   {"capacity", {{"lambda", lambda.value_or(default_lambda_)},
                                 {"capacity_mw", cap.envelope.mw}}},
                   {"issues", {{"range_exceeded", range}, {"window_too_short", window}}}};
    return doc.dump();
}

HttpReply Service::post_scenario(const std::string &body) {
    if (!ready()) {
        return not_ready(load_error());
    }
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error &) {
        return {400, error_body({"body: invalid JSON"}), false};
    }
    std::vector<std::string> errors;
    std::optional<double> lambda;
    const auto req = parse_scenario_request(doc, errors, lambda);
    if (!req) {
        return {400, error_body(errors), false};
    }
    const auto key = request_key(*req, lambda.value_or(default_lambda_)).dump();
    {
        std::lock_guard lock(mutex_);
        auto it = lru_index_.find(key);
        if (it != lru_index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return {200, it->second->second, true};
        }
    }
    std::string out;
    try {
        out = scenario_body(*req, lambda);
    } catch (const ValidationError &e) {
        return {400, error_body(e.diagnostics()), false};
    } catch (const ConfigError &e) {
        return {400, error_body({e.what()}), false};
    } catch (const std::exception &e) {
        return {500, error_body({e.what()}), false};
    }
    std::lock_guard lock(mutex_);
    if (!lru_index_.contains(key)) {
        lru_.emplace_front(key, out);
        lru_index_[key] = lru_.begin();
        while (lru_.size() > cache_capacity_) {
            lru_index_.erase(lru_.back().first);
            lru_.pop_back();
        }
    }
    return {200, out, false};
}

HttpReply Service::get_capacity(std::optional<std::string> lambda_param) {
    if (!ready()) {
        return not_ready(load_error());
    }
    double lambda = default_lambda_;
    if (lambda_param) {
        const auto &s = *lambda_param;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), lambda);
        if (ec != std::errc() || ptr != s.data() + s.size() || !(lambda >= 0.0) ||
            !std::isfinite(lambda)) {
            return {400, error_body({"lambda: expected a finite number >= 0"}), false};
        }
    }
    bool hit = false;
    {
        std::lock_guard lock(capacity_mutex_);
        hit = capacity_cache_.contains(lambda);
    }
    try {
        return {200, capacity_for(lambda).body, hit};
    } catch (const std::exception &e) {
        return {500, error_body({e.what()}), false};
    }
}

HttpReply Service::get_meta() {
    if (!ready()) {
        return not_ready(load_error());
    }
    return {200, meta_body_, false};
}

void Service::mount(httplib::Server &server) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    const auto send = [](httplib::Response &res, const HttpReply &r) {
        res.status = r.status;
        res.set_header("X-Cache", r.cache_hit ? "HIT" : "MISS");
        res.set_content(r.body, "application/json");
    };
    server.Options(R"(/api/.*)", [](const httplib::Request &, httplib::Response &res) {
        res.status = 204;
    });
    server.Post("/api/scenario", [this, send](const httplib::Request &req, httplib::Response &res) {
        send(res, post_scenario(req.body));
    });
    server.Get("/api/capacity", [this, send](const httplib::Request &req, httplib::Response &res) {
        std::optional<std::string> lambda;
        if (req.has_param("lambda")) {
            lambda = req.get_param_value("lambda");
        }
        send(res, get_capacity(lambda));
    });
    server.Get("/api/meta", [this, send](const httplib::Request &, httplib::Response &res) {
        send(res, get_meta());
    });
}

} // namespace evc
