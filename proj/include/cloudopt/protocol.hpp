#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "cloudopt/problem.hpp"
#include "cloudopt/uzawa.hpp"

namespace cloudopt {

// Fixed 3-timestep communication cycle. Every timestep belongs to exactly one
// phase, determined by timestep mod 3:
//   Update    — agents step their own state; the cloud steps the multipliers
//   AgentSend — every agent transmits its state to the cloud (1-step latency)
//   CloudSend — the cloud ingests agent states, then broadcasts (y, mu)
enum class Phase { Update, AgentSend, CloudSend };

Phase phase_of(long timestep);
const char* phase_name(Phase p);

struct AgentToCloud {
    int from;      // 0-based agent index
    double state;
};

struct CloudToAgent {
    int to;                   // 0-based agent index
    std::vector<double> y;    // other agents' states in the recipient's slot order
    std::vector<double> mu;
    long mu_generation;       // index of the cloud multiplier update that produced mu
};

struct Message {
    std::variant<AgentToCloud, CloudToAgent> body;
    long send_time;
    long deliver_time;  // always send_time + 1
};

// One communication-isolated agent. The agent is the sole authority for its
// own scalar state; everything else it knows arrived from the cloud. Under
// privacy relabeling, var_labels holds opaque pseudonyms and the partials are
// rewritten to match, so the agent cannot associate y-slots with identities.
struct AgentNode {
    int id = 0;
    double own_state = 0.0;
    std::string own_label;
    std::vector<double> last_y;                // size N-1, slot s belongs to var_labels[s]
    std::vector<double> last_mu;               // size m, nonnegative
    long last_mu_generation = 0;
    ExprPtr objective_grad;                    // df_i/dx_i
    std::vector<ExprPtr> constraint_partials;  // dg_j/dx_i in the agent's label space
    std::vector<std::string> var_labels;       // size N-1
    std::vector<int> slot_owner;               // size N-1, global agent index behind each slot
    double rho = 0.0;
};

struct CloudNode {
    std::vector<double> x_c;
    std::vector<double> mu_c;
    long mu_generation = 0;  // number of multiplier updates performed so far
    double rho = 0.0;
    std::vector<ExprPtr> constraints;
    std::vector<std::string> var_names;
};

// Raised on internal protocol corruption (missing/duplicate/stale messages):
// a simulator bug, never a user-input condition.
struct ProtocolError : std::logic_error {
    explicit ProtocolError(const std::string& msg) : std::logic_error(msg) {}
};

struct NetworkState {
    std::vector<AgentNode> agents;
    CloudNode cloud;
    std::vector<Message> in_flight;
    long timestep = 0;

    Phase phase() const { return phase_of(timestep); }
};

// Performs the pre-loop handshake atomically: agents report x0, the cloud
// differentiates the constraints and ships each agent its partials, the
// initial neighbor snapshot y, mu0, and rho. Occupies no timesteps; the
// returned state is at timestep 0 (an Update phase).
NetworkState init_network(const Problem& p, const std::vector<double>& x0,
                          const std::vector<double>& mu0, double rho, bool privacy,
                          std::uint64_t seed);

// Deterministic seeded pseudonymization of the other agents' variable names
// for agent i. Returns the name bijection (x_j -> eta_k) and agent i's
// constraint partials rewritten under it.
std::pair<std::unordered_map<std::string, std::string>, std::vector<ExprPtr>>
relabel_for_privacy(const Problem& p, int i, std::uint64_t seed);

// Advances exactly one timestep. All reads precede all writes across the
// whole network within the tick.
void tick(NetworkState& net);

// Per-timestep snapshot. V and in_ball are left untouched by `run`; the
// caller's sink may annotate them against a reference point.
struct TraceRecord {
    long timestep = 0;
    Phase phase = Phase::Update;
    std::vector<double> x_c;
    std::vector<double> mu_c;
    std::vector<double> own_states;
    double V = 0.0;
    bool in_ball = false;
};

class TraceSink {
public:
    virtual ~TraceSink() = default;
    virtual void emit(const TraceRecord& rec) = 0;
};

// Applies `tick` total_timesteps times. Emits one record for the initial
// state and one after every tick (total_timesteps + 1 records). Throws
// DivergenceError (with the offending timestep in the message) if any state
// goes non-finite.
void run(NetworkState& net, long total_timesteps, TraceSink* sink);

}  // namespace cloudopt
