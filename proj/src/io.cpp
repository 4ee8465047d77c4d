#include "crt/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "crt/error.hpp"

namespace crt {

namespace {

template <typename T>
void put_le(std::string& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get(const char* what) {
        if (bytes_.size() - pos_ < sizeof(T)) {
            throw FormatError("CRTF: truncated file reading " + std::string(what) + " at offset " +
                              std::to_string(pos_));
        }
        unsigned char raw[sizeof(T)];
        std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
        T value;
        std::memcpy(&value, raw, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::string encode_crtf(const ScalarField& f) {
    const auto& grid = f.grid();
    std::string out = "CRTF";
    put_le<std::uint32_t>(out, kCrtfVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.spatial_dim()));
    for (int a = 0; a < grid.axes(); ++a) {
        put_le<std::uint64_t>(out, grid.count(a));
        put_le<double>(out, grid.spacing(a));
        put_le<double>(out, grid.origin(a));
    }
    out.reserve(out.size() + 8 * grid.size());
    for (double v : f.values()) put_le<double>(out, v);
    return out;
}

ScalarField decode_crtf(std::string_view bytes) {
    if (bytes.size() < 4 || bytes.substr(0, 4) != "CRTF") {
        throw FormatError("CRTF: bad magic at offset 0 (expected \"CRTF\")");
    }
    Reader r(bytes.substr(4));
    auto at = [&r] { return std::to_string(4 + r.offset()); };
    const std::string version_offset = at();
    const auto version = r.get<std::uint32_t>("version");
    if (version != kCrtfVersion) {
        throw FormatError("CRTF: unsupported version " + std::to_string(version) + " at offset " +
                          version_offset);
    }
    const std::string dim_offset = at();
    const auto m = r.get<std::uint32_t>("spatial_dim");
    if (m < 1 || m > static_cast<std::uint32_t>(kMaxSpatialDim)) {
        throw FormatError("CRTF: spatial_dim " + std::to_string(m) + " out of range at offset " +
                          dim_offset);
    }
    std::vector<std::size_t> counts;
    std::vector<double> spacing;
    std::vector<double> origin;
    for (std::uint32_t a = 0; a <= m; ++a) {
        counts.push_back(static_cast<std::size_t>(r.get<std::uint64_t>("axis count")));
        spacing.push_back(r.get<double>("axis spacing"));
        origin.push_back(r.get<double>("axis origin"));
    }
    const std::string header_end = at();
    GridSpec grid = [&] {
        try {
            return GridSpec(static_cast<int>(m), counts, spacing, origin);
        } catch (const DomainError& e) {
            throw FormatError("CRTF: invalid axis header ending at offset " + header_end + ": " + e.what());
        }
    }();
    if (r.remaining() / 8 < grid.size() || r.remaining() != 8 * grid.size()) {
        throw FormatError("CRTF: payload at offset " + header_end + " holds " +
                          std::to_string(r.remaining()) + " bytes, expected " +
                          std::to_string(8 * grid.size()));
    }
    std::vector<double> values(grid.size());
    for (auto& v : values) {
        const std::string off = at();
        v = r.get<double>("value");
        if (!std::isfinite(v)) throw FormatError("CRTF: non-finite value at offset " + off);
    }
    return ScalarField(std::move(grid), std::move(values));
}

void write_crtf(const std::string& path, const ScalarField& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    const auto bytes = encode_crtf(f);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("failed writing " + path);
}

ScalarField read_crtf(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return decode_crtf(buf.str());
}

void write_csv(std::ostream& out, const ScalarField& f) {
    const auto& grid = f.grid();
    const int m = grid.spatial_dim();
    for (int a = 0; a < m; ++a) out << 'x' << (a + 1) << ',';
    out << "t,value\n";
    out << std::setprecision(17);
    std::vector<std::size_t> idx(static_cast<std::size_t>(grid.axes()));
    const std::size_t nt = grid.t_count();
    for (std::size_t line = 0; line < grid.spatial_size(); ++line) {
        grid.spatial_indices(line, idx);
        const auto v = f.line(line);
        for (std::size_t n = 0; n < nt; ++n) {
            for (int a = 0; a < m; ++a) out << grid.coord(a, idx[a]) << ',';
            out << grid.coord(grid.t_axis(), n) << ',' << v[n] << '\n';
        }
    }
}

void write_pgm(const std::string& path, const ScalarField& f, const PgmSlice& slice) {
    const auto& grid = f.grid();
    const int axes = grid.axes();
    if (slice.row_axis < 0 || slice.row_axis >= axes || slice.col_axis < 0 || slice.col_axis >= axes ||
        slice.row_axis == slice.col_axis) {
        throw DomainError("pgm: row and column axes must be distinct grid axes");
    }
    std::vector<std::size_t> idx(static_cast<std::size_t>(axes), 0);
    for (int a = 0; a < axes; ++a) {
        if (a == slice.row_axis || a == slice.col_axis) continue;
        if (static_cast<std::size_t>(a) >= slice.fixed.size() || slice.fixed[a] >= grid.count(a)) {
            throw DomainError("pgm: axis " + std::to_string(a) + " needs a fixed index inside the grid");
        }
        idx[a] = slice.fixed[a];
    }
    const std::size_t rows = grid.count(slice.row_axis);
    const std::size_t cols = grid.count(slice.col_axis);
    std::vector<double> pixels(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            idx[slice.row_axis] = r;
            idx[slice.col_axis] = c;
            std::size_t flat = 0;
            for (int a = 0; a < axes; ++a) flat += idx[a] * grid.stride(a);
            pixels[r * cols + c] = f[flat];
        }
    }
    const auto [lo_it, hi_it] = std::minmax_element(pixels.begin(), pixels.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double span = hi > lo ? hi - lo : 1.0;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    out << "P5\n" << cols << ' ' << rows << "\n65535\n";
    for (double p : pixels) {
        const auto level = static_cast<std::uint16_t>(std::lround((p - lo) / span * 65535.0));
        const char be[2] = {static_cast<char>(level >> 8), static_cast<char>(level & 0xff)};
        out.write(be, 2);
    }
    if (!out) throw FormatError("failed writing " + path);

    std::ofstream side(path + ".txt");
    if (!side) throw FormatError("cannot open " + path + ".txt for writing");
    side << std::setprecision(17);
    side << "min=" << lo << "\nmax=" << hi << "\nrow_axis=" << slice.row_axis
         << "\ncol_axis=" << slice.col_axis << '\n';
    for (int a = 0; a < axes; ++a) {
        if (a != slice.row_axis && a != slice.col_axis) side << "fixed_axis_" << a << '=' << idx[a] << '\n';
    }
}

std::map<std::string, std::string> parse_kv(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw FormatError("config line " + std::to_string(number) + ": expected key=value");
        }
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

std::map<std::string, std::string> read_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    return parse_kv(in);
}

}  // namespace crt
