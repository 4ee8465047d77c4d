#ifndef CRT_IO_HPP
#define CRT_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "crt/field.hpp"

namespace crt {

/*
 * CRTF layout (all little-endian):
 *   "CRTF" | u32 version = 1 | u32 spatial_dim |
 *   per axis, t-axis last: u64 count, f64 spacing, f64 origin |
 *   values as f64, row-major with the t index varying fastest.
 */
inline constexpr std::uint32_t kCrtfVersion = 1;

std::string encode_crtf(const ScalarField& f);
/// Throws FormatError naming the byte offset of the first bad field.
ScalarField decode_crtf(std::string_view bytes);

void write_crtf(const std::string& path, const ScalarField& f);
ScalarField read_crtf(const std::string& path);

/// One row per sample: x1..xm, t, value, with a header row.
void write_csv(std::ostream& out, const ScalarField& f);

/// A 2-D slice through the field: rows follow `row_axis`, columns `col_axis`,
/// every other axis is pinned at `fixed[axis]`.
struct PgmSlice {
    int row_axis = 0;
    int col_axis = 1;
    std::vector<std::size_t> fixed;
};

/// Binary P5 with maxval 65535 (big-endian samples), linearly mapping [min, max]
/// of the slice onto [0, 65535]. Writes `<path>.txt` with min, max and the slice.
void write_pgm(const std::string& path, const ScalarField& f, const PgmSlice& slice);

/// `key=value` pairs, one per line; `#` starts a comment; blank lines ignored.
std::map<std::string, std::string> parse_kv(std::istream& in);
std::map<std::string, std::string> read_kv_file(const std::string& path);

}  // namespace crt

#endif
