#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cgl/spectral_field.hpp"
#include "cgl/trig_poly.hpp"

namespace cgl {

/// Field snapshot file: magic "CGLF", u32 version, u32 d, u32 n_per_dim,
/// u8 real-flag, then (re, im) little-endian float64 pairs over the retained
/// lattice in row-major signed order (each axis -max_mode..max_mode, axis 0
/// slowest).
void write_field(const std::string& path, const SpectralField& f);
SpectralField read_field(const std::string& path, double dealias_fraction = 2.0 / 3.0);

void write_trig_poly(const std::string& path, const TrigPolynomial& p);
TrigPolynomial read_trig_poly(const std::string& path, int dim);

/// Deterministic shortest-roundtrip decimal rendering used by every CSV.
std::string format_g17(double v);

/// Minimal deterministic CSV writer.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    void add_row(const std::vector<double>& values);
    void add_row_raw(const std::vector<std::string>& cells);
    const std::string& str() const { return body_; }
    void write(const std::string& path) const;

private:
    std::string body_;
    std::size_t columns_;
};

std::uint64_t fnv1a64(const std::string& bytes);
std::uint64_t fnv1a64_file(const std::string& path);
std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& bytes);

}  // namespace cgl
