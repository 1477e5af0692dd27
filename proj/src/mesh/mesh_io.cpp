#include "scatter/mesh/mesh_io.hpp"

#include "scatter/error.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace scatter::mesh {

namespace {

std::string lower_extension(const std::filesystem::path& path)
{
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line, const std::string& msg)
{
    throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line) + ": " + msg);
}

/// Drops vertices no face refers to, remapping indices.
TriangleMesh compact_and_build(std::vector<Vec3> verts, std::vector<Tri> faces)
{
    std::vector<int> remap(verts.size(), -1);
    for (const Tri& f : faces)
        for (int k : f) {
            if (k < 0 || k >= static_cast<int>(verts.size()))
                throw Error(ErrorKind::ParseError, "face index " + std::to_string(k) + " out of range");
            remap[k] = 0;
        }
    int next = 0;
    for (int& r : remap)
        if (r == 0) r = next++;
    VertexField pos(next, 3);
    for (std::size_t i = 0; i < verts.size(); ++i)
        if (remap[i] >= 0) pos.row(remap[i]) = verts[i].transpose();
    for (Tri& f : faces)
        for (int& k : f) k = remap[k];
    return TriangleMesh(std::move(pos), std::move(faces));
}

TriangleMesh load_obj(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::vector<Vec3> verts;
    std::vector<Tri> faces;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ls >> p.x() >> p.y() >> p.z())) parse_fail(path, lineno, "malformed vertex");
            verts.push_back(p);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) {
                const std::string head = tok.substr(0, tok.find('/'));
                try {
                    std::size_t used = 0;
                    int k = std::stoi(head, &used);
                    if (used != head.size()) parse_fail(path, lineno, "bad face index '" + tok + "'");
                    k = k < 0 ? static_cast<int>(verts.size()) + k : k - 1;
                    idx.push_back(k);
                } catch (const std::logic_error&) {
                    parse_fail(path, lineno, "bad face index '" + tok + "'");
                }
            }
            if (idx.size() != 3) parse_fail(path, lineno, "only triangular faces are supported");
            faces.push_back({idx[0], idx[1], idx[2]});
        }
    }
    if (faces.empty()) parse_fail(path, lineno, "no faces");
    return compact_and_build(std::move(verts), std::move(faces));
}

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

PlyType ply_type(const std::string& name)
{
    if (name == "char" || name == "int8") return PlyType::Int8;
    if (name == "uchar" || name == "uint8") return PlyType::UInt8;
    if (name == "short" || name == "int16") return PlyType::Int16;
    if (name == "ushort" || name == "uint16") return PlyType::UInt16;
    if (name == "int" || name == "int32") return PlyType::Int32;
    if (name == "uint" || name == "uint32") return PlyType::UInt32;
    if (name == "float" || name == "float32") return PlyType::Float32;
    if (name == "double" || name == "float64") return PlyType::Float64;
    throw Error(ErrorKind::ParseError, "unknown PLY type '" + name + "'");
}

struct PlyProperty {
    std::string name;
    PlyType type;
    bool is_list = false;
    PlyType count_type = PlyType::UInt8;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> props;
};

template <class T>
T read_raw(std::istream& in)
{
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw Error(ErrorKind::ParseError, "unexpected end of binary PLY data");
    return v;
}

double read_value(std::istream& in, PlyType t, bool binary)
{
    if (!binary) {
        double v;
        if (!(in >> v)) throw Error(ErrorKind::ParseError, "malformed ASCII PLY value");
        return v;
    }
    switch (t) {
    case PlyType::Int8: return read_raw<std::int8_t>(in);
    case PlyType::UInt8: return read_raw<std::uint8_t>(in);
    case PlyType::Int16: return read_raw<std::int16_t>(in);
    case PlyType::UInt16: return read_raw<std::uint16_t>(in);
    case PlyType::Int32: return read_raw<std::int32_t>(in);
    case PlyType::UInt32: return read_raw<std::uint32_t>(in);
    case PlyType::Float32: return read_raw<float>(in);
    case PlyType::Float64: return read_raw<double>(in);
    }
    return 0.0;
}

struct PlyData {
    std::vector<Vec3> verts;
    std::vector<Tri> faces;
    PlyAttributes attributes;
};

PlyData read_ply(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line.rfind("ply", 0) != 0) throw Error(ErrorKind::ParseError, path.string() + ": missing 'ply' magic");

    bool binary = false;
    std::vector<PlyElement> elements;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "binary_little_endian") binary = true;
            else if (fmt == "ascii") binary = false;
            else throw Error(ErrorKind::ParseError, path.string() + ": unsupported PLY format " + fmt);
        } else if (tag == "element") {
            PlyElement e;
            ls >> e.name >> e.count;
            elements.push_back(e);
        } else if (tag == "property") {
            if (elements.empty()) throw Error(ErrorKind::ParseError, path.string() + ": property before element");
            PlyProperty p;
            std::string type;
            ls >> type;
            if (type == "list") {
                std::string ct, vt;
                ls >> ct >> vt >> p.name;
                p.is_list = true;
                p.count_type = ply_type(ct);
                p.type = ply_type(vt);
            } else {
                p.type = ply_type(type);
                ls >> p.name;
            }
            elements.back().props.push_back(p);
        } else if (tag == "end_header") {
            break;
        }
    }

    PlyData out;
    for (const PlyElement& e : elements) {
        std::map<std::string, std::vector<double>> scalars;
        for (std::size_t i = 0; i < e.count; ++i) {
            Vec3 p = Vec3::Zero();
            for (const PlyProperty& prop : e.props) {
                if (prop.is_list) {
                    const auto n = static_cast<std::size_t>(read_value(in, prop.count_type, binary));
                    std::vector<int> idx(n);
                    for (auto& k : idx) k = static_cast<int>(read_value(in, prop.type, binary));
                    if (e.name == "face") {
                        if (n != 3) throw Error(ErrorKind::ParseError, path.string() + ": only triangular faces are supported");
                        out.faces.push_back({idx[0], idx[1], idx[2]});
                    }
                    continue;
                }
                const double v = read_value(in, prop.type, binary);
                if (e.name == "vertex" && prop.name == "x") p.x() = v;
                else if (e.name == "vertex" && prop.name == "y") p.y() = v;
                else if (e.name == "vertex" && prop.name == "z") p.z() = v;
                else scalars[prop.name].push_back(v);
            }
            if (e.name == "vertex") out.verts.push_back(p);
        }
        auto& target = e.name == "vertex" ? out.attributes.vertex : out.attributes.face;
        if (e.name == "vertex" || e.name == "face")
            for (auto& [name, vals] : scalars)
                target[name] = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    }
    return out;
}

template <class T>
void write_raw(std::ostream& out, T v)
{
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

} // namespace

TriangleMesh load_mesh(const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path)) throw Error(ErrorKind::IoError, "mesh file not found: " + path.string());
    const std::string ext = lower_extension(path);
    if (ext == ".obj") return load_obj(path);
    if (ext == ".ply") {
        PlyData d = read_ply(path);
        if (d.faces.empty()) throw Error(ErrorKind::ParseError, path.string() + ": no faces");
        return compact_and_build(std::move(d.verts), std::move(d.faces));
    }
    throw Error(ErrorKind::ParseError, "unsupported mesh extension '" + ext + "'");
}

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    char buf[128];
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        const Vec3 p = mesh.vertex(i);
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
        out << buf;
    }
    for (const Tri& t : mesh.triangles()) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

void save_ply(const TriangleMesh& mesh, const std::filesystem::path& path, const PlyAttributes& attributes)
{
    for (const auto& [name, vals] : attributes.vertex)
        if (vals.size() != mesh.vertex_count())
            throw Error(ErrorKind::ShapeMismatch, "vertex attribute '" + name + "' has wrong length");
    for (const auto& [name, vals] : attributes.face)
        if (vals.size() != mesh.face_count())
            throw Error(ErrorKind::ShapeMismatch, "face attribute '" + name + "' has wrong length");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << mesh.vertex_count() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    for (const auto& [name, vals] : attributes.vertex) out << "property double " << name << "\n";
    out << "element face " << mesh.face_count() << "\n";
    out << "property list uchar int vertex_indices\n";
    for (const auto& [name, vals] : attributes.face) out << "property double " << name << "\n";
    out << "end_header\n";
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        for (int c = 0; c < 3; ++c) write_raw<double>(out, mesh.positions()(i, c));
        for (const auto& [name, vals] : attributes.vertex) write_raw<double>(out, vals[i]);
    }
    for (int t = 0; t < mesh.face_count(); ++t) {
        write_raw<std::uint8_t>(out, 3);
        for (int k : mesh.triangles()[t]) write_raw<std::int32_t>(out, k);
        for (const auto& [name, vals] : attributes.face) write_raw<double>(out, vals[t]);
    }
    if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

PlyAttributes load_ply_attributes(const std::filesystem::path& path)
{
    return read_ply(path).attributes;
}

} // namespace scatter::mesh
