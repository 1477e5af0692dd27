#include "scatter/bem/farfield_io.hpp"

#include "scatter/error.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

namespace scatter::bem {

namespace {

constexpr char kMagic[4] = {'S', 'F', 'F', 'D'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary), path_(path)
    {
        if (!out_) throw Error(ErrorKind::IoError, "cannot write " + path);
    }
    template <class T>
    void put(T v) { out_.write(reinterpret_cast<const char*>(&v), sizeof(T)); }
    void finish()
    {
        out_.flush();
        if (!out_) throw Error(ErrorKind::IoError, "write failed: " + path_);
    }
    std::ofstream& stream() { return out_; }

private:
    std::ofstream out_;
    std::string path_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path)
    {
        if (!in_) throw Error(ErrorKind::IoError, "cannot open " + path);
    }
    template <class T>
    T get()
    {
        T v;
        in_.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (!in_) throw Error(ErrorKind::ParseError, path_ + ": truncated far-field file");
        return v;
    }
    void read(char* dst, std::size_t n)
    {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (!in_) throw Error(ErrorKind::ParseError, path_ + ": truncated far-field file");
    }
    bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }
    const std::string& path() const { return path_; }

private:
    std::ifstream in_;
    std::string path_;
};

} // namespace

void save_farfield(const std::string& path, const FarField& data)
{
    const auto n = static_cast<std::uint64_t>(data.grid.size());
    if (data.values.rows() != data.grid.size() || data.values.cols() != data.waves.wave_count())
        throw Error(ErrorKind::ShapeMismatch, "far-field values do not match grid x waves");
    const auto& groups = data.waves.groups;
    const std::size_t per_group = groups.empty() ? 0 : groups.front().directions.size();
    for (const auto& g : groups)
        if (g.directions.size() != per_group)
            throw Error(ErrorKind::ShapeMismatch, "far-field files need the same direction count per wavenumber");
    Writer w(path);
    w.stream().write(kMagic, 4);
    w.put(kVersion);
    w.put(static_cast<std::uint32_t>(groups.size()));
    w.put(static_cast<std::uint32_t>(per_group));
    w.put(n);
    w.put(data.delta ? *data.delta : std::numeric_limits<double>::quiet_NaN());
    for (std::uint64_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) w.put(data.grid.points(i, c));
    for (std::uint64_t i = 0; i < n; ++i) w.put(data.grid.weights[i]);
    for (const auto& g : groups) w.put(g.kappa);
    for (const auto& g : groups)
        for (const Vec3& d : g.directions)
            for (int c = 0; c < 3; ++c) w.put(d[c]);
    for (const auto& g : groups) w.put(g.eta);
    for (Eigen::Index j = 0; j < data.values.cols(); ++j)
        for (Eigen::Index i = 0; i < data.values.rows(); ++i) {
            w.put(data.values(i, j).real());
            w.put(data.values(i, j).imag());
        }
    w.finish();
}

FarField load_farfield(const std::string& path)
{
    Reader r(path);
    char magic[4];
    r.read(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorKind::ParseError, path + ": not a far-field file");
    const auto version = r.get<std::uint32_t>();
    if (version != kVersion)
        throw Error(ErrorKind::ParseError, path + ": unsupported far-field version " + std::to_string(version));
    const auto groups = r.get<std::uint32_t>();
    const auto per_group = r.get<std::uint32_t>();
    const auto n = r.get<std::uint64_t>();
    if (n > (1ull << 32) || groups > (1u << 16) || per_group > (1u << 16))
        throw Error(ErrorKind::ParseError, path + ": implausible far-field header");
    const auto waves = groups * per_group;
    FarField out;
    const double delta = r.get<double>();
    if (!std::isnan(delta)) out.delta = delta;
    out.grid.points.resize(static_cast<Eigen::Index>(n), 3);
    out.grid.weights.resize(static_cast<Eigen::Index>(n));
    for (std::uint64_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) out.grid.points(i, c) = r.get<double>();
    for (std::uint64_t i = 0; i < n; ++i) out.grid.weights[i] = r.get<double>();
    out.waves.groups.resize(groups);
    for (auto& g : out.waves.groups) g.kappa = r.get<double>();
    for (auto& g : out.waves.groups)
        for (std::uint32_t k = 0; k < per_group; ++k) {
            Vec3 d;
            for (int c = 0; c < 3; ++c) d[c] = r.get<double>();
            g.directions.push_back(d);
        }
    for (auto& g : out.waves.groups) g.eta = r.get<double>();
    out.values.resize(static_cast<Eigen::Index>(n), waves);
    for (Eigen::Index j = 0; j < out.values.cols(); ++j)
        for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
            const double re = r.get<double>();
            const double im = r.get<double>();
            out.values(i, j) = cplx(re, im);
        }
    if (!r.at_end()) throw Error(ErrorKind::ParseError, path + ": trailing bytes in far-field file");
    return out;
}

void export_farfield_csv(const std::string& path, const FarField& data)
{
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error(ErrorKind::IoError, "cannot write " + path);
    std::fprintf(f, "x,y,z,weight,wave,kappa,re,im\n");
    int col = 0;
    for (const auto& g : data.waves.groups)
        for (std::size_t k = 0; k < g.directions.size(); ++k, ++col)
            for (int i = 0; i < data.grid.size(); ++i)
                std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g\n", data.grid.points(i, 0),
                             data.grid.points(i, 1), data.grid.points(i, 2), data.grid.weights[i], col, g.kappa,
                             data.values(i, col).real(), data.values(i, col).imag());
    std::fclose(f);
}

} // namespace scatter::bem
