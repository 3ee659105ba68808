#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace rydfac {

struct Position {
    double x = 0.0;  // um, chain axis / column axis
    double y = 0.0;  // um, row axis (2D only)
};

enum class CutoffKind { nn_only, nn_plus_nnn, radius };

/// Which pairs interact. Pair membership is decided on the ideal lattice, so a
/// disordered geometry keeps the same pair list with updated strengths.
struct Cutoff {
    CutoffKind kind = CutoffKind::nn_only;
    double radius_um = 0.0;  // only for CutoffKind::radius

    static Cutoff nn_only() { return {CutoffKind::nn_only, 0.0}; }
    static Cutoff nn_plus_nnn() { return {CutoffKind::nn_plus_nnn, 0.0}; }
    static Cutoff radius(double r_um) { return {CutoffKind::radius, r_um}; }
};

struct Pair {
    std::size_t i = 0;  // i < j
    std::size_t j = 0;
    double distance_um = 0.0;
    double v_mhz = 0.0;  // c6 / distance^6
};

struct Neighbor {
    std::size_t site = 0;
    double v_mhz = 0.0;
};

/// Sites of a 1D chain or 2D square lattice (row-major, site = row * width + col)
/// together with the van der Waals pair list. Immutable once built.
class Geometry {
public:
    int dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return sites_.size(); }
    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    double spacing_um() const noexcept { return spacing_um_; }
    double c6() const noexcept { return c6_; }
    const Cutoff& cutoff() const noexcept { return cutoff_; }

    std::span<const Position> sites() const noexcept { return sites_; }
    std::span<const Pair> pairs() const noexcept { return pairs_; }
    std::span<const Neighbor> neighbors(std::size_t site) const;

    std::size_t row(std::size_t site) const noexcept { return site / width_; }
    std::size_t col(std::size_t site) const noexcept { return site % width_; }
    std::size_t index(std::size_t row, std::size_t col) const noexcept { return row * width_ + col; }

    /// Largest |V_ij recomputed from positions - V_ij stored| over the pair list.
    double pair_consistency_residual() const;

private:
    friend Geometry build_chain(std::size_t, double, double, Cutoff);
    friend Geometry build_square(std::size_t, std::size_t, double, double, Cutoff);
    friend Geometry with_positions(const Geometry&, std::vector<Position>);

    void rebuild_pairs();

    int dimension_ = 1;
    std::size_t width_ = 0;
    std::size_t height_ = 1;
    double spacing_um_ = 0.0;
    double c6_ = 0.0;
    Cutoff cutoff_;
    std::vector<Position> sites_;
    // Index pairs chosen on the ideal lattice; strengths follow the positions.
    std::vector<std::pair<std::size_t, std::size_t>> pair_index_;
    std::vector<Pair> pairs_;
    std::vector<std::size_t> neighbor_offsets_;
    std::vector<Neighbor> neighbor_list_;
};

/// C6 that reproduces a nearest-neighbour shift `v_nn_mhz` at `spacing_um`.
double c6_from_nearest(double v_nn_mhz, double spacing_um);

/// Open chain with x_j = j * spacing.
Geometry build_chain(std::size_t n_sites, double spacing_um, double c6, Cutoff cutoff = Cutoff::nn_only());

/// Open square lattice with sites at (col * spacing, row * spacing).
Geometry build_square(std::size_t width, std::size_t height, double spacing_um, double c6,
                      Cutoff cutoff = Cutoff::nn_plus_nnn());

/// Same lattice and pair membership, new positions; strengths recomputed.
Geometry with_positions(const Geometry& g, std::vector<Position> positions);

struct DisorderSpec {
    double sigma_um = 0.0;         // rms displacement per sampled axis
    std::size_t n_realizations = 1;
    std::uint64_t base_seed = 0;
};

/// Quenched Gaussian position disorder for realization k. 1D displaces along the
/// chain only, 2D along both in-plane axes. Pure function of (g, d, k).
Geometry sample_disorder(const Geometry& g, const DisorderSpec& d, std::size_t k);

/// Interaction-disorder scale 6 |V|^(7/6) sqrt(2) sigma / |C6|^(1/6), in MHz.
double disorder_scale_estimate(double v_r_mhz, double sigma_um, double c6);

void write_geometry_csv(std::ostream& os, const Geometry& g);
void write_pairs_csv(std::ostream& os, const Geometry& g);

}  // namespace rydfac
