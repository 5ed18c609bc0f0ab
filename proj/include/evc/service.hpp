#pragma once

#include <atomic>
#include <cstddef>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "evc/config.hpp"
#include "evc/pipeline.hpp"

namespace httplib {
class Server;
}

namespace evc {

struct HttpReply {
    int status = 200;
    std::string body;
    bool cache_hit = false;
};

/// Parses and validates a scenario request body. Field-level problems are
/// appended to `errors` ("wfh_level: expected one of High, Medium, Zero").
std::optional<ScenarioRequest> parse_scenario_request(const nlohmann::json &doc,
                                                      std::vector<std::string> &errors,
                                                      std::optional<double> &lambda);

/// JSON API over immutable datasets. Handlers are thread-safe; the result
/// caches are the only shared mutable state.
class Service {
  public:
    explicit Service(std::size_t cache_capacity = 64);
    ~Service();

    Service(const Service &) = delete;
    Service &operator=(const Service &) = delete;

    /// Loads datasets and solves the default capacity envelope.
    void load(const RunConfig &cfg);
    /// Same as load() on a background thread; handlers answer 503 until done.
    void load_async(RunConfig cfg);
    void wait_ready();
    bool ready() const noexcept { return ready_.load(); }
    std::optional<std::string> load_error() const;

    HttpReply post_scenario(const std::string &body);
    HttpReply get_capacity(std::optional<std::string> lambda_param);
    HttpReply get_meta();

    /// Registers the routes (and CORS headers) on a server.
    void mount(httplib::Server &server);

  private:
    struct CapacityEntry {
        Envelope envelope;
        std::string body;
    };
    const CapacityEntry &capacity_for(double lambda);
    std::string scenario_body(const ScenarioRequest &req, std::optional<double> lambda);

    std::shared_ptr<const Datasets> data_;
    double default_lambda_ = 0.0;
    std::string meta_body_;
    std::atomic<bool> ready_{false};
    std::optional<std::string> load_error_;
    std::thread loader_;

    mutable std::mutex mutex_;
    std::size_t cache_capacity_;
    std::list<std::pair<std::string, std::string>> lru_;
    std::unordered_map<std::string, std::list<std::pair<std::string, std::string>>::iterator>
        lru_index_;
    std::map<double, std::unique_ptr<CapacityEntry>> capacity_cache_;
    std::mutex capacity_mutex_;
};

} // namespace evc
