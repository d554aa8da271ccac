#include "cloudopt/trace.hpp"

#include <cstdio>

namespace cloudopt {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvTraceWriter::CsvTraceWriter(std::ostream& out, int n_agents, int n_constraints) : out_(out) {
    out_ << "timestep,phase";
    for (int i = 1; i <= n_agents; ++i) out_ << ",xc_" << i;
    for (int j = 1; j <= n_constraints; ++j) out_ << ",muc_" << j;
    for (int i = 1; i <= n_agents; ++i) out_ << ",own_" << i;
    out_ << ",V,in_ball\n";
}

void CsvTraceWriter::emit(const TraceRecord& rec) {
    out_ << rec.timestep << ',' << phase_name(rec.phase);
    for (double v : rec.x_c) out_ << ',' << format_double(v);
    for (double v : rec.mu_c) out_ << ',' << format_double(v);
    for (double v : rec.own_states) out_ << ',' << format_double(v);
    out_ << ',' << format_double(rec.V) << ',' << (rec.in_ball ? 1 : 0) << '\n';
}

AnnotatingSink::AnnotatingSink(TraceSink* inner, PrimalDualPoint reference, double epsilon,
                               BallConvention convention)
    : inner_(inner), reference_(std::move(reference)), epsilon_(epsilon), convention_(convention) {}

void AnnotatingSink::emit(const TraceRecord& rec) {
    TraceRecord annotated = rec;
    const PrimalDualPoint snapshot{rec.x_c, rec.mu_c};
    annotated.V = lyapunov(snapshot, reference_);
    annotated.in_ball = annotated.V <= ball_threshold(epsilon_, convention_);
    if (rec.timestep % 3 == 0) sync_points_.push_back(snapshot);
    if (inner_) inner_->emit(annotated);
}

}  // namespace cloudopt
