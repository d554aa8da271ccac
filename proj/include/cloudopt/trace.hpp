#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cloudopt/analysis.hpp"
#include "cloudopt/protocol.hpp"

namespace cloudopt {

// Floats are printed with 17 significant digits so the text round-trips to
// the identical double.
std::string format_double(double v);

// Comma-delimited trace: one header row, then one row per emitted record with
// columns  timestep,phase,xc_1..xc_N,muc_1..muc_m,own_1..own_N,V,in_ball
class CsvTraceWriter : public TraceSink {
public:
    CsvTraceWriter(std::ostream& out, int n_agents, int n_constraints);
    void emit(const TraceRecord& rec) override;

private:
    std::ostream& out_;
};

// Fills V and in_ball on each record against a reference point before
// forwarding to the wrapped sink, and retains the synchronized (Update-phase)
// cloud snapshots for convergence analysis.
class AnnotatingSink : public TraceSink {
public:
    AnnotatingSink(TraceSink* inner, PrimalDualPoint reference, double epsilon,
                   BallConvention convention);
    void emit(const TraceRecord& rec) override;

    const std::vector<PrimalDualPoint>& sync_points() const { return sync_points_; }

private:
    TraceSink* inner_;
    PrimalDualPoint reference_;
    double epsilon_;
    BallConvention convention_;
    std::vector<PrimalDualPoint> sync_points_;
};

// Buffers every record; for tests.
class CollectingSink : public TraceSink {
public:
    void emit(const TraceRecord& rec) override { records.push_back(rec); }
    std::vector<TraceRecord> records;
};

}  // namespace cloudopt
