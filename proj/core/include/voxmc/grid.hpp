#pragma once

#include <utility>
#include <vector>

namespace voxmc {

// Voxel address, 1-based on each axis.
struct Voxel {
    int x = 1, y = 1, z = 1;
    friend bool operator==(const Voxel&, const Voxel&) = default;
};

enum class BoundaryKind { Reflecting, Absorbing };

struct Boundary {
    BoundaryKind kind = BoundaryKind::Reflecting;
    // Absorbing: signalling molecules leave through each exposed face of a
    // boundary voxel at rate_fraction * d per molecule.
    double rate_fraction = 1.0 / 50.0;
};

// Rectangular prism of cubic voxels, edge length w (µm), 6-connectivity.
class SpatialGrid {
  public:
    SpatialGrid() = default;
    SpatialGrid(int nx, int ny, int nz, double w, Boundary boundary);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    double w() const { return w_; }
    double voxel_volume() const { return w_ * w_ * w_; }
    const Boundary& boundary() const { return boundary_; }

    int voxel_count() const { return nx_ * ny_ * nz_; }
    bool contains(const Voxel& v) const;

    // flat index, x fastest
    int index_of(const Voxel& v) const;
    Voxel voxel_at(int idx) const;

    bool adjacent(const Voxel& a, const Voxel& b) const;

    // All directed neighbor pairs (i -> j), enumerated in a fixed order:
    // voxels by flat index, neighbors in +x, -x, +y, -y, +z, -z order.
    std::vector<std::pair<int, int>> directed_neighbor_pairs() const;

    // Number of faces of voxel idx on the medium surface.
    int exposed_faces(int idx) const;

  private:
    int nx_ = 1, ny_ = 1, nz_ = 1;
    double w_ = 1.0;
    Boundary boundary_;
};

// Validating constructor wrapper; throws std::invalid_argument on bad input.
SpatialGrid build_grid(int nx, int ny, int nz, double w, Boundary boundary = {});

} // namespace voxmc
