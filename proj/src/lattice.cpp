#include "rydfac/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "rydfac/errors.hpp"
#include "rydfac/rng.hpp"

namespace rydfac {
namespace {

double distance(const Position& a, const Position& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

void check_common(double spacing_um, double c6) {
    if (!(spacing_um > 0.0) || !std::isfinite(spacing_um))
        throw InvalidConfig("geometry.spacing_um", "spacing must be positive");
    if (c6 == 0.0 || !std::isfinite(c6)) throw InvalidConfig("geometry.c6", "C6 must be finite and non-zero");
}

// Pair membership for an ideal-lattice index offset (dr rows, dc columns).
bool included(const Cutoff& cutoff, int dimension, long dr, long dc, double spacing_um) {
    const long d2 = dr * dr + dc * dc;
    if (d2 == 0) return false;
    switch (cutoff.kind) {
        case CutoffKind::nn_only:
            return d2 == 1;
        case CutoffKind::nn_plus_nnn:
            // 1D next-nearest is 2r; 2D next-nearest is the diagonal sqrt(2) r.
            return d2 == 1 || (dimension == 1 ? d2 == 4 : d2 == 2);
        case CutoffKind::radius:
            return std::sqrt(static_cast<double>(d2)) * spacing_um <= cutoff.radius_um * (1.0 + 1e-12);
    }
    return false;
}

}  // namespace

std::span<const Neighbor> Geometry::neighbors(std::size_t site) const {
    if (site >= sites_.size()) throw std::invalid_argument("neighbors: site out of range");
    return {neighbor_list_.data() + neighbor_offsets_[site],
            neighbor_offsets_[site + 1] - neighbor_offsets_[site]};
}

double Geometry::pair_consistency_residual() const {
    double worst = 0.0;
    for (const Pair& p : pairs_) {
        const double v = c6_ / std::pow(distance(sites_[p.i], sites_[p.j]), 6);
        worst = std::max(worst, std::abs(v - p.v_mhz));
    }
    return worst;
}

void Geometry::rebuild_pairs() {
    pairs_.clear();
    pairs_.reserve(pair_index_.size());
    for (auto [i, j] : pair_index_) {
        const double d = distance(sites_[i], sites_[j]);
        pairs_.push_back({i, j, d, c6_ / std::pow(d, 6)});
    }

    std::vector<std::size_t> degree(sites_.size(), 0);
    for (const Pair& p : pairs_) {
        ++degree[p.i];
        ++degree[p.j];
    }
    neighbor_offsets_.assign(sites_.size() + 1, 0);
    for (std::size_t s = 0; s < sites_.size(); ++s) neighbor_offsets_[s + 1] = neighbor_offsets_[s] + degree[s];
    neighbor_list_.assign(neighbor_offsets_.back(), {});
    std::vector<std::size_t> fill(neighbor_offsets_.begin(), neighbor_offsets_.end() - 1);
    for (const Pair& p : pairs_) {
        neighbor_list_[fill[p.i]++] = {p.j, p.v_mhz};
        neighbor_list_[fill[p.j]++] = {p.i, p.v_mhz};
    }
}

double c6_from_nearest(double v_nn_mhz, double spacing_um) {
    return v_nn_mhz * std::pow(spacing_um, 6);
}

Geometry build_chain(std::size_t n_sites, double spacing_um, double c6, Cutoff cutoff) {
    if (n_sites == 0) throw InvalidConfig("geometry.n_sites", "chain needs at least one atom");
    check_common(spacing_um, c6);

    Geometry g;
    g.dimension_ = 1;
    g.width_ = n_sites;
    g.height_ = 1;
    g.spacing_um_ = spacing_um;
    g.c6_ = c6;
    g.cutoff_ = cutoff;
    g.sites_.resize(n_sites);
    for (std::size_t j = 0; j < n_sites; ++j) g.sites_[j] = {static_cast<double>(j) * spacing_um, 0.0};
    for (std::size_t i = 0; i < n_sites; ++i)
        for (std::size_t j = i + 1; j < n_sites; ++j)
            if (included(cutoff, 1, 0, static_cast<long>(j - i), spacing_um)) g.pair_index_.emplace_back(i, j);
    g.rebuild_pairs();
    return g;
}

Geometry build_square(std::size_t width, std::size_t height, double spacing_um, double c6, Cutoff cutoff) {
    if (width == 0) throw InvalidConfig("geometry.width", "lattice needs at least one column");
    if (height == 0) throw InvalidConfig("geometry.height", "lattice needs at least one row");
    check_common(spacing_um, c6);

    Geometry g;
    g.dimension_ = 2;
    g.width_ = width;
    g.height_ = height;
    g.spacing_um_ = spacing_um;
    g.c6_ = c6;
    g.cutoff_ = cutoff;
    const std::size_t n = width * height;
    g.sites_.resize(n);
    for (std::size_t s = 0; s < n; ++s)
        g.sites_[s] = {static_cast<double>(s % width) * spacing_um, static_cast<double>(s / width) * spacing_um};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const long dr = static_cast<long>(j / width) - static_cast<long>(i / width);
            const long dc = static_cast<long>(j % width) - static_cast<long>(i % width);
            if (included(cutoff, 2, dr, dc, spacing_um)) g.pair_index_.emplace_back(i, j);
        }
    }
    g.rebuild_pairs();
    return g;
}

Geometry with_positions(const Geometry& g, std::vector<Position> positions) {
    if (positions.size() != g.size()) throw std::invalid_argument("with_positions: site count mismatch");
    Geometry out = g;
    out.sites_ = std::move(positions);
    out.rebuild_pairs();
    return out;
}

Geometry sample_disorder(const Geometry& g, const DisorderSpec& d, std::size_t k) {
    if (d.n_realizations == 0) throw InvalidConfig("disorder.realizations", "need at least one realization");
    if (!(d.sigma_um >= 0.0)) throw InvalidConfig("disorder.sigma_um", "must be non-negative");
    if (k >= d.n_realizations) throw std::invalid_argument("sample_disorder: realization index out of range");

    const std::uint64_t key = rng::stream_key(d.base_seed, rng::Domain::disorder, {k});
    std::vector<Position> moved(g.sites().begin(), g.sites().end());
    for (std::size_t s = 0; s < moved.size(); ++s) {
        moved[s].x += d.sigma_um * rng::standard_normal(key, 2 * s);
        if (g.dimension() == 2) moved[s].y += d.sigma_um * rng::standard_normal(key, 2 * s + 1);
    }
    return with_positions(g, std::move(moved));
}

double disorder_scale_estimate(double v_r_mhz, double sigma_um, double c6) {
    if (c6 == 0.0) throw std::invalid_argument("disorder_scale_estimate: C6 must be non-zero");
    return 6.0 * std::pow(std::abs(v_r_mhz), 7.0 / 6.0) * std::sqrt(2.0) * sigma_um /
           std::pow(std::abs(c6), 1.0 / 6.0);
}

void write_geometry_csv(std::ostream& os, const Geometry& g) {
    os << "site_index,x_um,y_um\n";
    for (std::size_t s = 0; s < g.size(); ++s)
        os << fmt::format("{},{:.12g},{:.12g}\n", s, g.sites()[s].x, g.sites()[s].y);
}

void write_pairs_csv(std::ostream& os, const Geometry& g) {
    os << "i,j,distance_um,v_mhz\n";
    for (const Pair& p : g.pairs()) os << fmt::format("{},{},{:.12g},{:.12g}\n", p.i, p.j, p.distance_um, p.v_mhz);
}

}  // namespace rydfac
