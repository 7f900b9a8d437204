#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "labscene/optimizer.hpp"

namespace labscene {

enum class ProposerMode { init_room, init_desktop, adjust };
std::string to_string(ProposerMode m);

// A proposed placement. Desktop placements arrive in the tabletop-local
// frame (local_frame = true) and are mapped to global coordinates by the
// caller via desktop_to_global.
struct PlacementProposal {
    std::string asset_id;
    double x = 0.0;
    double y = 0.0;
    double yaw_deg = 0.0;
    std::string initial_location = "floor";
    bool local_frame = false;
};

struct ProposerRequest {
    ProposerMode mode = ProposerMode::adjust;
    const Layout* layout = nullptr;
    const ViolationReport* violations = nullptr;  // adjust mode
    const Protocol* protocol = nullptr;
    OptLevel level = OptLevel::room;
    std::string surface_id;  // init_desktop: which surface to populate
    std::string catalog_digest;
    std::uint64_t seed = 0;
};

struct ProposerResponse {
    std::vector<AdjustCommand> commands;        // adjust mode
    std::vector<PlacementProposal> placements;  // init modes
};

struct ProposerEndpoint {
    std::string url;
    int timeout_s = 60;
    int max_retries = 2;
    std::string auth_env = "LABSCENE_PROPOSER_TOKEN";
};

// Transport failure that survived the retry budget.
struct ProposerUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Response that failed strict schema validation; the raw payload is kept.
struct ResponseRejected : std::runtime_error {
    explicit ResponseRejected(const std::string& what, std::string payload)
        : std::runtime_error(what), raw_payload(std::move(payload)) {}
    std::string raw_payload;
};

// Greedy packing could not fit every requested asset.
struct PlacementInfeasible : std::runtime_error {
    explicit PlacementInfeasible(const std::string& what,
                                 std::vector<std::string> overflow_ids)
        : std::runtime_error(what), overflow(std::move(overflow_ids)) {}
    std::vector<std::string> overflow;
};

nlohmann::json proposer_request_to_json(const ProposerRequest& req);

// Strict parse of a service reply. Only the closed command vocabulary
// {move, rotate, swap} is admitted; anything else rejects the response
// wholesale.
ProposerResponse parse_proposer_response(const std::string& body, ProposerMode mode);

// POSTs the request as JSON and validates the reply. Retries transport
// failures with exponential backoff up to the budget, then throws
// ProposerUnavailable. Schema violations throw ResponseRejected.
ProposerResponse propose_remote(const ProposerRequest& req,
                                const ProposerEndpoint& endpoint);

// Deterministic offline stand-in: greedy wall placement at room level,
// left-to-right grid packing on surfaces, worst-constraint moves plus
// wall-facing rotations in adjust mode. Pure function of (request, seed).
ProposerResponse propose_heuristic(const ProposerRequest& req, const AssetBase& base,
                                   const SafetyConfig& cfg);

// FNV-1a over the sorted asset ids; lets a service detect catalog drift.
std::string catalog_digest(const AssetBase& base);

class HeuristicProposer : public Proposer {
public:
    HeuristicProposer(const AssetBase& base, const SafetyConfig& cfg,
                      std::uint64_t seed)
        : base_(base), cfg_(cfg), seed_(seed) {}

    std::vector<AdjustCommand> propose(const Layout& layout,
                                       const ViolationReport& violations,
                                       OptLevel level,
                                       const Protocol& protocol) override;

private:
    const AssetBase& base_;
    SafetyConfig cfg_;
    std::uint64_t seed_;
};

class RemoteProposer : public Proposer {
public:
    RemoteProposer(const AssetBase& base, ProposerEndpoint endpoint)
        : base_(base), endpoint_(std::move(endpoint)) {}

    std::vector<AdjustCommand> propose(const Layout& layout,
                                       const ViolationReport& violations,
                                       OptLevel level,
                                       const Protocol& protocol) override;

private:
    const AssetBase& base_;
    ProposerEndpoint endpoint_;
};

}  // namespace labscene
