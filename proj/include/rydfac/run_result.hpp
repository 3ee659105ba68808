#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rydfac/state.hpp"

namespace rydfac {

/// Worst invariant violations seen during a run.
struct InvariantResiduals {
    double max_trace_error = 0.0;         // |tr rho - 1| or |<psi|psi> - 1|, or per-site norm
    double max_hermiticity_error = 0.0;   // density runs
    double min_eigenvalue = std::numeric_limits<double>::quiet_NaN();  // final rho, density runs
    double min_population = 0.0;
    double max_population = 0.0;
};

struct JumpRecord {
    std::size_t trajectory = 0;
    double t_us = 0.0;
    std::size_t site = 0;
};

struct RunResult {
    std::string variant;  // full_me | mf_qmc | mf_me
    std::string initial;  // product-state bitstring the run started from
    std::vector<double> times_us;
    std::vector<std::vector<double>> populations;  // [sample][site]
    std::vector<std::vector<double>> std_errors;   // ensemble runs only
    InvariantResiduals residuals;
    std::vector<JumpRecord> jumps;
    std::optional<ManyBodyState> final_state;  // exact solver only

    std::size_t n_sites() const { return populations.empty() ? 0 : populations.front().size(); }
    std::size_t n_samples() const { return times_us.size(); }

    /// Index of the sample at t_us (within `tol_us`); throws std::out_of_range if none.
    std::size_t sample_at(double t_us, double tol_us = 1e-9) const;
    std::span<const double> populations_at(double t_us, double tol_us = 1e-9) const {
        return populations[sample_at(t_us, tol_us)];
    }
    std::span<const double> final_populations() const { return populations.back(); }
};

void write_populations_csv(std::ostream& os, const RunResult& r);
void write_std_errors_csv(std::ostream& os, const RunResult& r);
void write_jumps_csv(std::ostream& os, const RunResult& r);

}  // namespace rydfac
