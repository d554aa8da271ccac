#include "cloudopt/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace cloudopt {

Phase phase_of(long timestep) {
    switch (timestep % 3) {
        case 0: return Phase::Update;
        case 1: return Phase::AgentSend;
        default: return Phase::CloudSend;
    }
}

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Update: return "UPDATE";
        case Phase::AgentSend: return "AGENT_SEND";
        case Phase::CloudSend: return "CLOUD_SEND";
    }
    return "?";
}

std::pair<std::unordered_map<std::string, std::string>, std::vector<ExprPtr>>
relabel_for_privacy(const Problem& p, int i, std::uint64_t seed) {
    const int n = p.n_agents();
    std::vector<int> others;
    for (int j = 0; j < n; ++j) {
        if (j != i) others.push_back(j);
    }
    // Independent permutation per (seed, agent) so no two agents share a view.
    std::seed_seq sseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(sseq);
    std::vector<int> slot(others.size());
    std::iota(slot.begin(), slot.end(), 0);
    std::shuffle(slot.begin(), slot.end(), rng);

    std::unordered_map<std::string, std::string> mapping;
    for (std::size_t k = 0; k < others.size(); ++k) {
        mapping.emplace(Problem::var_name(others[k]), "eta" + std::to_string(slot[k] + 1));
    }
    std::vector<ExprPtr> partials;
    partials.reserve(p.n_constraints());
    for (int j = 0; j < p.n_constraints(); ++j) {
        partials.push_back(substitute_names(p.constraint_partial(j, i), mapping));
    }
    return {std::move(mapping), std::move(partials)};
}

NetworkState init_network(const Problem& p, const std::vector<double>& x0,
                          const std::vector<double>& mu0, double rho, bool privacy,
                          std::uint64_t seed) {
    const int n = p.n_agents();
    const int m = p.n_constraints();
    if (static_cast<int>(x0.size()) != n) throw ProblemError("x0 size does not match agent count");
    if (static_cast<int>(mu0.size()) != m) throw ProblemError("mu0 size does not match constraint count");
    for (double v : mu0) {
        if (v < 0.0) throw ProblemError("mu0 must be componentwise nonnegative");
    }
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");

    NetworkState net;
    net.timestep = 0;
    net.cloud.x_c = x0;
    net.cloud.mu_c = mu0;
    net.cloud.mu_generation = 0;
    net.cloud.rho = rho;
    net.cloud.var_names = p.var_names();
    net.cloud.constraints.reserve(m);
    for (int j = 0; j < m; ++j) net.cloud.constraints.push_back(p.constraint(j));

    net.agents.resize(n);
    for (int i = 0; i < n; ++i) {
        AgentNode& a = net.agents[i];
        a.id = i;
        a.own_state = x0[i];
        a.own_label = Problem::var_name(i);
        a.last_mu = mu0;
        a.last_mu_generation = 0;
        a.objective_grad = p.objective_grad(i);
        a.rho = rho;

        if (privacy) {
            auto [mapping, partials] = relabel_for_privacy(p, i, seed);
            a.constraint_partials = std::move(partials);
            a.var_labels.resize(n - 1);
            a.slot_owner.resize(n - 1);
            a.last_y.resize(n - 1);
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const std::string& label = mapping.at(Problem::var_name(j));
                // "eta<k>" -> slot k-1
                const int s = std::stoi(label.substr(3)) - 1;
                a.var_labels[s] = label;
                a.slot_owner[s] = j;
                a.last_y[s] = x0[j];
            }
        } else {
            a.constraint_partials.reserve(m);
            for (int j = 0; j < m; ++j) a.constraint_partials.push_back(p.constraint_partial(j, i));
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                a.var_labels.push_back(Problem::var_name(j));
                a.slot_owner.push_back(j);
                a.last_y.push_back(x0[j]);
            }
        }
    }
    return net;
}

namespace {

// Agent i's view of the full state: own label bound to its own current state,
// every other slot bound to the cloud's last broadcast.
Assignment agent_view(const AgentNode& a) {
    Assignment view;
    view.reserve(a.last_y.size() + 1);
    view.emplace(a.own_label, a.own_state);
    for (std::size_t s = 0; s < a.last_y.size(); ++s) view.emplace(a.var_labels[s], a.last_y[s]);
    return view;
}

void do_update(NetworkState& net) {
    const long t = net.timestep;

    // Deliver the cloud broadcasts staged for this timestep.
    std::vector<const CloudToAgent*> delivered(net.agents.size(), nullptr);
    std::size_t count = 0;
    for (const Message& msg : net.in_flight) {
        if (msg.deliver_time != t) continue;
        const auto* body = std::get_if<CloudToAgent>(&msg.body);
        if (!body) throw ProtocolError("agent-bound traffic expected at an update step");
        if (delivered[body->to]) throw ProtocolError("duplicate broadcast to one agent");
        delivered[body->to] = body;
        ++count;
    }
    if (count != 0 && count != net.agents.size()) {
        throw ProtocolError("partial broadcast delivery: " + std::to_string(count) + " of " +
                            std::to_string(net.agents.size()));
    }
    for (std::size_t i = 0; i < net.agents.size(); ++i) {
        if (!delivered[i]) continue;
        AgentNode& a = net.agents[i];
        if (delivered[i]->mu_generation > net.cloud.mu_generation) {
            throw ProtocolError("agent received a multiplier vector the cloud never produced");
        }
        a.last_y = delivered[i]->y;
        a.last_mu = delivered[i]->mu;
        a.last_mu_generation = delivered[i]->mu_generation;
    }
    std::erase_if(net.in_flight, [t](const Message& m) { return m.deliver_time == t; });

    // Simultaneous computation: every new value is derived from pre-update
    // state only, then written in one batch.
    std::vector<double> new_states(net.agents.size());
    for (std::size_t i = 0; i < net.agents.size(); ++i) {
        const AgentNode& a = net.agents[i];
        const Assignment view = agent_view(a);
        double s = eval(a.objective_grad, view);
        for (std::size_t j = 0; j < a.last_mu.size(); ++j) {
            s += a.last_mu[j] * eval(a.constraint_partials[j], view);
        }
        new_states[i] = a.own_state - a.rho * s;
    }

    CloudNode& c = net.cloud;
    std::vector<double> new_mu(c.mu_c.size());
    {
        Assignment xc;
        xc.reserve(c.x_c.size());
        for (std::size_t i = 0; i < c.x_c.size(); ++i) xc.emplace(c.var_names[i], c.x_c[i]);
        for (std::size_t j = 0; j < c.mu_c.size(); ++j) {
            double raw = c.mu_c[j] + c.rho * eval(c.constraints[j], xc);
            new_mu[j] = raw < 0.0 ? 0.0 : raw;
        }
    }

    for (std::size_t i = 0; i < net.agents.size(); ++i) net.agents[i].own_state = new_states[i];
    c.mu_c = std::move(new_mu);
    c.mu_generation += 1;
}

void do_agent_send(NetworkState& net) {
    const long t = net.timestep;
    for (const AgentNode& a : net.agents) {
        net.in_flight.push_back(Message{AgentToCloud{a.id, a.own_state}, t, t + 1});
    }
}

void do_cloud_send(NetworkState& net) {
    const long t = net.timestep;

    std::vector<bool> seen(net.agents.size(), false);
    std::size_t count = 0;
    for (const Message& msg : net.in_flight) {
        if (msg.deliver_time != t) continue;
        const auto* body = std::get_if<AgentToCloud>(&msg.body);
        if (!body) throw ProtocolError("cloud-bound traffic expected at a cloud-send step");
        if (seen[body->from]) throw ProtocolError("duplicate report from one agent");
        seen[body->from] = true;
        net.cloud.x_c[body->from] = body->state;
        ++count;
    }
    if (count != net.agents.size()) {
        throw ProtocolError("cloud ingested " + std::to_string(count) + " reports, expected " +
                            std::to_string(net.agents.size()));
    }
    std::erase_if(net.in_flight, [t](const Message& m) { return m.deliver_time == t; });

    for (const AgentNode& a : net.agents) {
        CloudToAgent out;
        out.to = a.id;
        out.y.reserve(a.slot_owner.size());
        for (int owner : a.slot_owner) out.y.push_back(net.cloud.x_c[owner]);
        out.mu = net.cloud.mu_c;
        out.mu_generation = net.cloud.mu_generation;
        net.in_flight.push_back(Message{std::move(out), t, t + 1});
    }
}

}  // namespace

void tick(NetworkState& net) {
    for (const Message& msg : net.in_flight) {
        if (msg.deliver_time < net.timestep) throw ProtocolError("stale undelivered message");
        if (msg.deliver_time != msg.send_time + 1) throw ProtocolError("transport latency must be 1");
    }
    switch (net.phase()) {
        case Phase::Update: do_update(net); break;
        case Phase::AgentSend: do_agent_send(net); break;
        case Phase::CloudSend: do_cloud_send(net); break;
    }
    net.timestep += 1;
}

namespace {

void snapshot(const NetworkState& net, TraceRecord& rec) {
    rec.timestep = net.timestep;
    rec.phase = net.phase();
    rec.x_c = net.cloud.x_c;
    rec.mu_c = net.cloud.mu_c;
    rec.own_states.resize(net.agents.size());
    for (std::size_t i = 0; i < net.agents.size(); ++i) rec.own_states[i] = net.agents[i].own_state;
}

bool finite_state(const NetworkState& net) {
    for (const AgentNode& a : net.agents) {
        if (!std::isfinite(a.own_state)) return false;
    }
    for (double v : net.cloud.x_c) {
        if (!std::isfinite(v)) return false;
    }
    for (double v : net.cloud.mu_c) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace

void run(NetworkState& net, long total_timesteps, TraceSink* sink) {
    if (total_timesteps < 0) throw std::invalid_argument("total_timesteps must be nonnegative");
    TraceRecord rec;
    if (sink) {
        snapshot(net, rec);
        sink->emit(rec);
    }
    for (long t = 0; t < total_timesteps; ++t) {
        tick(net);
        if (!finite_state(net)) {
            throw DivergenceError("non-finite network state at timestep " +
                                      std::to_string(net.timestep),
                                  net.timestep);
        }
        if (sink) {
            snapshot(net, rec);
            sink->emit(rec);
        }
    }
}

}  // namespace cloudopt
