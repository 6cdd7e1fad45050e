#include "gridfuse/grid_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "gridfuse/errors.hpp"

namespace gridfuse {

namespace {

constexpr char kMagic[4] = {'E', 'O', 'G', 'M'};
constexpr uint32_t kVersion = 1;
constexpr double kLoadTol = 1e-6;

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }

uint32_t read_u32(std::istream& is) {
    uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    if (!is) throw TruncatedFile{};
    return v;
}

}  // namespace

void save_grid(const EvidentialGrid& grid, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    const GridGeometry& g = grid.geometry();
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    write_u32(os, uint32_t(g.n_x));
    write_u32(os, uint32_t(g.n_y));
    os.write(reinterpret_cast<const char*>(&g.resolution), 8);

    const size_t n = grid.cells().size();
    std::vector<float> plane(n);
    for (size_t k = 0; k < n; ++k) plane[k] = float(grid.cells()[k].m_f);
    os.write(reinterpret_cast<const char*>(plane.data()), std::streamsize(n * 4));
    for (size_t k = 0; k < n; ++k) plane[k] = float(grid.cells()[k].m_o);
    os.write(reinterpret_cast<const char*>(plane.data()), std::streamsize(n * 4));
    if (!os) throw IoError("write failed: " + path);
}

EvidentialGrid load_grid(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw BadMagic{};
    if (read_u32(is) != kVersion) throw VersionMismatch{};
    GridGeometry g;
    g.n_x = int32_t(read_u32(is));
    g.n_y = int32_t(read_u32(is));
    is.read(reinterpret_cast<char*>(&g.resolution), 8);
    if (!is) throw TruncatedFile{};
    if (g.n_x <= 0 || g.n_y <= 0 || !(g.resolution > 0.0))
        throw IoError("invalid geometry in " + path);

    EvidentialGrid grid(g);
    const size_t n = grid.cells().size();
    std::vector<float> mf(n), mo(n);
    is.read(reinterpret_cast<char*>(mf.data()), std::streamsize(n * 4));
    if (!is) throw TruncatedFile{};
    is.read(reinterpret_cast<char*>(mo.data()), std::streamsize(n * 4));
    if (!is) throw TruncatedFile{};
    for (size_t k = 0; k < n; ++k) {
        const double f = mf[k], o = mo[k];
        if (!(f >= 0.0) || !(o >= 0.0) || f + o > 1.0 + kLoadTol) throw InvariantViolation{};
        grid.cells()[k] = {f, o};
    }
    return grid;
}

void render(const EvidentialGrid& grid, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    const GridGeometry& g = grid.geometry();
    os << "P6\n" << g.n_y << " " << g.n_x << "\n255\n";
    std::vector<unsigned char> row(size_t(g.n_y) * 3);
    for (int32_t i = g.n_x - 1; i >= 0; --i) {  // forward axis points up
        for (int32_t j = 0; j < g.n_y; ++j) {
            const MassCell& c = grid.at(i, g.n_y - 1 - j);  // +y points left
            row[size_t(j) * 3 + 0] = (unsigned char)std::lround(255.0 * c.m_o);
            row[size_t(j) * 3 + 1] = (unsigned char)std::lround(255.0 * c.m_f);
            row[size_t(j) * 3 + 2] = 0;
        }
        os.write(reinterpret_cast<const char*>(row.data()), std::streamsize(row.size()));
    }
    if (!os) throw IoError("write failed: " + path);
}

}  // namespace gridfuse
