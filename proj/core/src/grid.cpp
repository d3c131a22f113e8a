#include "voxmc/grid.hpp"

#include <stdexcept>
#include <string>

namespace voxmc {

SpatialGrid::SpatialGrid(int nx, int ny, int nz, double w, Boundary boundary)
    : nx_(nx), ny_(ny), nz_(nz), w_(w), boundary_(boundary) {}

bool SpatialGrid::contains(const Voxel& v) const {
    return v.x >= 1 && v.x <= nx_ && v.y >= 1 && v.y <= ny_ && v.z >= 1 && v.z <= nz_;
}

int SpatialGrid::index_of(const Voxel& v) const {
    return (v.x - 1) + nx_ * ((v.y - 1) + ny_ * (v.z - 1));
}

Voxel SpatialGrid::voxel_at(int idx) const {
    Voxel v;
    v.x = idx % nx_ + 1;
    v.y = (idx / nx_) % ny_ + 1;
    v.z = idx / (nx_ * ny_) + 1;
    return v;
}

bool SpatialGrid::adjacent(const Voxel& a, const Voxel& b) const {
    const int dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return (dx * dx + dy * dy + dz * dz) == 1;
}

std::vector<std::pair<int, int>> SpatialGrid::directed_neighbor_pairs() const {
    std::vector<std::pair<int, int>> out;
    const int steps[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (int idx = 0; idx < voxel_count(); ++idx) {
        const Voxel v = voxel_at(idx);
        for (const auto& s : steps) {
            Voxel n{v.x + s[0], v.y + s[1], v.z + s[2]};
            if (contains(n)) out.emplace_back(idx, index_of(n));
        }
    }
    return out;
}

int SpatialGrid::exposed_faces(int idx) const {
    const Voxel v = voxel_at(idx);
    int n = 0;
    n += (v.x == 1) + (v.x == nx_);
    n += (v.y == 1) + (v.y == ny_);
    n += (v.z == 1) + (v.z == nz_);
    return n;
}

SpatialGrid build_grid(int nx, int ny, int nz, double w, Boundary boundary) {
    if (nx < 1 || ny < 1 || nz < 1)
        throw std::invalid_argument("build_grid: all dimensions must be >= 1, got " +
                                    std::to_string(nx) + "x" + std::to_string(ny) + "x" +
                                    std::to_string(nz));
    if (!(w > 0.0)) throw std::invalid_argument("build_grid: voxel edge length must be positive");
    if (boundary.kind == BoundaryKind::Absorbing && boundary.rate_fraction < 0.0)
        throw std::invalid_argument("build_grid: absorbing rate fraction must be >= 0");
    return SpatialGrid(nx, ny, nz, w, boundary);
}

} // namespace voxmc
