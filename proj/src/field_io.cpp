#include "rnls/field_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace rnls {

static constexpr char kMagic[5] = {'R', 'N', 'L', 'S', '1'};

static void write_fields(std::ofstream& out, const std::vector<cplx>& f) {
    for (const cplx& z : f) {
        double re = z.real(), im = z.imag();
        out.write(reinterpret_cast<const char*>(&re), sizeof(double));
        out.write(reinterpret_cast<const char*>(&im), sizeof(double));
    }
}

static void read_fields(std::ifstream& in, std::vector<cplx>& f, size_t count) {
    f.resize(count);
    for (size_t i = 0; i < count; ++i) {
        double re = 0, im = 0;
        in.read(reinterpret_cast<char*>(&re), sizeof(double));
        in.read(reinterpret_cast<char*>(&im), sizeof(double));
        f[i] = cplx(re, im);
    }
}

void save_field_pair(const FieldPair& pair, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(kMagic, 5);
    uint8_t tag = pair.is_radial() ? 0 : 1;
    out.write(reinterpret_cast<const char*>(&tag), 1);
    uint32_t n = pair.is_radial() ? static_cast<uint32_t>(pair.rgrid->n())
                                  : static_cast<uint32_t>(pair.cgrid->n());
    out.write(reinterpret_cast<const char*>(&n), sizeof(uint32_t));
    double extent = pair.is_radial() ? pair.rgrid->r_max() : pair.cgrid->L();
    out.write(reinterpret_cast<const char*>(&extent), sizeof(double));
    write_fields(out, pair.u);
    write_fields(out, pair.v);
    if (!out) throw IoError("write failed: " + path.string());
}

FieldPair load_field_pair(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, kMagic, 5) != 0)
        throw IoError("bad field container marker: " + path.string());
    uint8_t tag = 0;
    in.read(reinterpret_cast<char*>(&tag), 1);
    uint32_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(uint32_t));
    double extent = 0;
    in.read(reinterpret_cast<char*>(&extent), sizeof(double));
    FieldPair pair;
    if (tag == 0) {
        auto grid = std::make_shared<RadialGrid>(static_cast<int>(n), extent);
        pair = FieldPair::zero(grid);
        read_fields(in, pair.u, grid->n());
        read_fields(in, pair.v, grid->n());
    } else if (tag == 1) {
        auto grid = std::make_shared<CartesianGrid>(static_cast<int>(n), extent);
        pair = FieldPair::zero(grid);
        read_fields(in, pair.u, grid->npts());
        read_fields(in, pair.v, grid->npts());
    } else {
        throw IoError("unknown backend tag in " + path.string());
    }
    if (!in) throw IoError("truncated field container: " + path.string());
    return pair;
}

} // namespace rnls
