#include "rydfac/run_result.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace rydfac {
namespace {

void write_table(std::ostream& os, const std::vector<double>& times, const std::vector<std::vector<double>>& rows,
                 std::size_t n_sites) {
    os << "t_us";
    for (std::size_t j = 0; j < n_sites; ++j) os << ",n_" << j;
    os << '\n';
    for (std::size_t k = 0; k < rows.size(); ++k) {
        os << fmt::format("{:.12g}", times[k]);
        for (double v : rows[k]) os << fmt::format(",{:.12g}", v);
        os << '\n';
    }
}

}  // namespace

std::size_t RunResult::sample_at(double t_us, double tol_us) const {
    std::size_t best = times_us.size();
    double best_gap = tol_us;
    for (std::size_t k = 0; k < times_us.size(); ++k) {
        const double gap = std::abs(times_us[k] - t_us);
        if (gap <= best_gap) {
            best = k;
            best_gap = gap;
        }
    }
    if (best == times_us.size()) throw std::out_of_range(fmt::format("no output sample at t={} us", t_us));
    return best;
}

void write_populations_csv(std::ostream& os, const RunResult& r) {
    write_table(os, r.times_us, r.populations, r.n_sites());
}

void write_std_errors_csv(std::ostream& os, const RunResult& r) {
    write_table(os, r.times_us, r.std_errors, r.n_sites());
}

void write_jumps_csv(std::ostream& os, const RunResult& r) {
    os << "trajectory,t_us,site\n";
    for (const JumpRecord& j : r.jumps) os << fmt::format("{},{:.12g},{}\n", j.trajectory, j.t_us, j.site);
}

}  // namespace rydfac
