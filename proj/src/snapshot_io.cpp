#include "cgl/snapshot_io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cgl/errors.hpp"

namespace cgl {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
    if (pos + 4 > in.size()) throw InputError("snapshot file truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + static_cast<std::size_t>(i)])) << (8 * i);
    pos += 4;
    return v;
}

void put_f64(std::string& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

double get_f64(const std::string& in, std::size_t& pos) {
    if (pos + 8 > in.size()) throw InputError("snapshot file truncated");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + static_cast<std::size_t>(i)])) << (8 * i);
    pos += 8;
    double d;
    std::memcpy(&d, &bits, sizeof d);
    return d;
}

}  // namespace

void write_field(const std::string& path, const SpectralField& f) {
    std::string out;
    out += "CGLF";
    put_u32(out, 1u);
    put_u32(out, static_cast<std::uint32_t>(f.grid().d));
    put_u32(out, static_cast<std::uint32_t>(f.grid().n_per_dim));
    out.push_back(f.real_valued() ? '\1' : '\0');
    for_each_retained_mode(f.grid(), [&](const Wavevector& k) {
        const Complex c = f.coeff(k);
        put_f64(out, c.real());
        put_f64(out, c.imag());
    });
    write_file_atomic(path, out);
}

SpectralField read_field(const std::string& path, double dealias_fraction) {
    const std::string in = read_file(path);
    if (in.size() < 17 || in.compare(0, 4, "CGLF") != 0)
        throw InputError("not a field snapshot file: " + path);
    std::size_t pos = 4;
    const std::uint32_t version = get_u32(in, pos);
    if (version != 1u) throw InputError("unsupported snapshot version");
    const int d = static_cast<int>(get_u32(in, pos));
    const int n = static_cast<int>(get_u32(in, pos));
    const bool real_flag = in[pos++] != '\0';
    GridSpec g(d, n, dealias_fraction);
    SpectralField f(g, real_flag);
    for_each_retained_mode(g, [&](const Wavevector& k) {
        const double re = get_f64(in, pos);
        const double im = get_f64(in, pos);
        f.set_coeff(k, Complex(re, im));
    });
    if (pos != in.size()) throw InputError("trailing bytes in snapshot file");
    return f;
}

void write_trig_poly(const std::string& path, const TrigPolynomial& p) {
    std::ostringstream os;
    p.write(os);
    write_file_atomic(path, os.str());
}

TrigPolynomial read_trig_poly(const std::string& path, int dim) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open " + path);
    return TrigPolynomial::read(is, dim);
}

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) body_ += ',';
        body_ += header[i];
    }
    body_ += '\n';
}

void CsvWriter::add_row(const std::vector<double>& values) {
    if (values.size() != columns_) throw InputError("CSV row width mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) body_ += ',';
        body_ += format_g17(values[i]);
    }
    body_ += '\n';
}

void CsvWriter::add_row_raw(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw InputError("CSV row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) body_ += ',';
        body_ += cells[i];
    }
    body_ += '\n';
}

void CsvWriter::write(const std::string& path) const { write_file_atomic(path, body_); }

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::string& path) { return fnv1a64(read_file(path)); }

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw InputError("cannot write " + tmp);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!os) throw InputError("short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace cgl
