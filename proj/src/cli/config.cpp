#include "scatter/cli/config.hpp"

#include "scatter/error.hpp"
#include "scatter/mesh/mesh_io.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace scatter::cli {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& where, const std::string& what)
{
    throw Error(ErrorKind::ConfigError, where.empty() ? what : where + ": " + what);
}

/// Reads one JSON object, remembering which keys were consumed so that
/// leftovers can be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) config_error(path_, "expected an object");
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const Json* find(const std::string& key)
    {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out)
    {
        if (const Json* v = find(key)) {
            if (!v->is_number()) config_error(key_path(key), "expected a number");
            out = v->get<double>();
        }
    }

    template <class Int>
    void integer(const std::string& key, Int& out)
    {
        if (const Json* v = find(key)) {
            if (!v->is_number_integer()) config_error(key_path(key), "expected an integer");
            if constexpr (std::is_unsigned_v<Int>) {
                if (v->is_number_unsigned()) {
                    out = v->get<Int>();
                    return;
                }
                config_error(key_path(key), "expected a nonnegative integer");
            } else {
                out = v->get<Int>();
            }
        }
    }

    void boolean(const std::string& key, bool& out)
    {
        if (const Json* v = find(key)) {
            if (!v->is_boolean()) config_error(key_path(key), "expected true or false");
            out = v->get<bool>();
        }
    }

    void string(const std::string& key, std::string& out)
    {
        if (const Json* v = find(key)) {
            if (!v->is_string()) config_error(key_path(key), "expected a string");
            out = v->get<std::string>();
        }
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) config_error(key_path(it.key()), "unknown key");
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

Vec3 read_vec3(const Json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 3) config_error(where, "expected an array of three numbers");
    Vec3 v;
    for (int i = 0; i < 3; ++i) {
        if (!j[i].is_number()) config_error(where, "expected an array of three numbers");
        v[i] = j[i].get<double>();
    }
    return v;
}

Json vec3_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

MeshSpec read_mesh(const Json& j, const std::string& where)
{
    if (j.is_string()) return j.get<std::string>();
    ObjectReader r(j, where);
    std::string generator;
    r.string("generator", generator);
    if (generator != "icosphere") config_error(r.key_path("generator"), "only \"icosphere\" is available");
    IcosphereSpec s;
    r.integer("level", s.level);
    r.number("radius", s.radius);
    if (const Json* v = r.find("scale")) s.scale = read_vec3(*v, r.key_path("scale"));
    if (const Json* v = r.find("offset")) s.offset = read_vec3(*v, r.key_path("offset"));
    r.finish();
    return s;
}

Json mesh_json(const MeshSpec& spec)
{
    if (const auto* path = std::get_if<std::string>(&spec)) return *path;
    const auto& s = std::get<IcosphereSpec>(spec);
    Json j;
    j["generator"] = "icosphere";
    j["level"] = s.level;
    j["radius"] = s.radius;
    j["scale"] = vec3_json(s.scale);
    j["offset"] = vec3_json(s.offset);
    return j;
}

void read_reconstruction(const Json& j, inverse::GNConfig& gn)
{
    ObjectReader r(j, "reconstruction");
    r.number("alpha0", gn.alpha0);
    r.number("rho", gn.rho);
    r.number("tau", gn.tau);
    r.number("sigma", gn.sigma);
    r.integer("max_iterations", gn.max_iterations);
    r.number("tol_forward", gn.tol_forward);
    r.number("tol_derivative", gn.tol_derivative);
    r.number("tol_update", gn.tol_update);
    r.integer("gmres_max_iterations", gn.gmres_max_iterations);
    r.number("eta", gn.eta);
    if (const Json* v = r.find("stages")) {
        if (!v->is_array()) config_error("reconstruction.stages", "expected an array of wavenumber lists");
        gn.stages.clear();
        for (const auto& stage : *v) {
            if (!stage.is_array()) config_error("reconstruction.stages", "expected an array of wavenumber lists");
            std::vector<double> kappas;
            for (const auto& k : stage) {
                if (!k.is_number()) config_error("reconstruction.stages", "wavenumbers must be numbers");
                kappas.push_back(k.get<double>());
            }
            gn.stages.push_back(std::move(kappas));
        }
    }
    if (const Json* v = r.find("remesh")) {
        ObjectReader m(*v, "reconstruction.remesh");
        m.boolean("enabled", gn.remesh.enabled);
        m.number("max_edge_ratio", gn.remesh.max_edge_ratio);
        m.integer("every", gn.remesh.every);
        m.number("target_edge", gn.remesh.target_edge);
        m.integer("smoothing_rounds", gn.remesh.smoothing_rounds);
        m.finish();
    }
    if (const Json* v = r.find("energy")) {
        ObjectReader e(*v, "reconstruction.energy");
        e.number("p", gn.energy.p);
        e.boolean("exclude_adjacent", gn.energy.exclude_adjacent);
        e.finish();
    }
    if (const Json* v = r.find("block")) {
        ObjectReader b(*v, "reconstruction.block");
        b.integer("tile", gn.block.tile);
        b.integer("max_rhs", gn.block.max_rhs);
        b.finish();
    }
    r.finish();
}

Json reconstruction_json(const inverse::GNConfig& gn)
{
    Json j;
    j["alpha0"] = gn.alpha0;
    j["rho"] = gn.rho;
    j["tau"] = gn.tau;
    j["sigma"] = gn.sigma;
    j["max_iterations"] = gn.max_iterations;
    j["tol_forward"] = gn.tol_forward;
    j["tol_derivative"] = gn.tol_derivative;
    j["tol_update"] = gn.tol_update;
    j["gmres_max_iterations"] = gn.gmres_max_iterations;
    j["eta"] = gn.eta;
    j["stages"] = Json::array();
    for (const auto& s : gn.stages) j["stages"].push_back(s);
    j["remesh"] = {{"enabled", gn.remesh.enabled},
                   {"max_edge_ratio", gn.remesh.max_edge_ratio},
                   {"every", gn.remesh.every},
                   {"target_edge", gn.remesh.target_edge},
                   {"smoothing_rounds", gn.remesh.smoothing_rounds}};
    j["energy"] = {{"p", gn.energy.p}, {"exclude_adjacent", gn.energy.exclude_adjacent}};
    j["block"] = {{"tile", gn.block.tile}, {"max_rhs", gn.block.max_rhs}};
    return j;
}

std::string position_context(const std::string& text, std::size_t byte)
{
    int line = 1, column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return std::to_string(line) + ":" + std::to_string(column);
}

} // namespace

std::filesystem::path RunConfig::resolve(const std::string& path) const
{
    const std::filesystem::path p(path);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

bem::WaveSet RunConfig::wave_set() const
{
    bem::WaveSet set;
    set.groups = waves;
    for (auto& g : set.groups)
        if (g.eta == 0.0) g.eta = g.kappa;
    return set;
}

bem::EvalGrid RunConfig::grid() const { return bem::EvalGrid::icosphere(grid_level); }

void RunConfig::validate() const
{
    if (waves.empty()) config_error("waves", "at least one wavenumber is required");
    for (const auto& g : waves)
        if (g.eta < 0.0) config_error("waves", "eta must be nonnegative (0 means kappa)");
    try {
        wave_set().validate();
        reconstruction.validate();
    } catch (const Error& e) {
        config_error("", e.what());
    }
    if (grid_level < 0 || grid_level > 6) config_error("grid_level", "must lie in 0..6");
    if (!(noise_percent >= 0.0)) config_error("noise_percent", "must be nonnegative");
    if (threads < 0) config_error("threads", "must be nonnegative (0 uses every core)");
    static const std::set<std::string> levels = {"trace", "debug", "info", "warn", "error", "off"};
    if (!levels.count(log_level)) config_error("log_level", "must be one of trace, debug, info, warn, error, off");
    for (const auto* spec : {&truth_mesh, &initial_mesh})
        if (*spec)
            if (const auto* s = std::get_if<IcosphereSpec>(&**spec)) {
                if (s->level < 0 || s->level > 7) config_error("mesh", "icosphere level must lie in 0..7");
                if (!(s->radius > 0.0) || !(s->scale.minCoeff() > 0.0)) config_error("mesh", "radius and scale must be positive");
            }
    if (data.empty()) config_error("data", "must name a file");
    if (output.empty()) config_error("output", "must name a directory");
}

RunConfig parse_config(const std::string& text, const std::string& source)
{
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ParseError, source + ":" + position_context(text, e.byte == 0 ? 0 : e.byte - 1) +
                                               ": malformed JSON");
    }
    RunConfig c;
    ObjectReader r(j, "");
    const Json* version = r.find("schema_version");
    if (!version) config_error("schema_version", "missing");
    if (!version->is_number_integer() || version->get<long long>() != kSchemaVersion)
        config_error("schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
    if (const Json* v = r.find("truth_mesh"); v && !v->is_null()) c.truth_mesh = read_mesh(*v, "truth_mesh");
    if (const Json* v = r.find("initial_mesh"); v && !v->is_null()) c.initial_mesh = read_mesh(*v, "initial_mesh");
    if (const Json* v = r.find("waves")) {
        if (!v->is_array()) config_error("waves", "expected an array");
        for (std::size_t i = 0; i < v->size(); ++i) {
            const std::string where = "waves[" + std::to_string(i) + "]";
            ObjectReader w((*v)[i], where);
            bem::WaveGroup g;
            g.eta = 0.0;
            w.number("kappa", g.kappa);
            w.number("eta", g.eta);
            const Json* dirs = w.find("directions");
            if (!dirs || !dirs->is_array() || dirs->empty()) config_error(where, "directions must be a nonempty array");
            for (const auto& d : *dirs) g.directions.push_back(read_vec3(d, where + ".directions"));
            w.finish();
            c.waves.push_back(std::move(g));
        }
    }
    r.integer("grid_level", c.grid_level);
    r.number("noise_percent", c.noise_percent);
    r.integer("seed", c.seed);
    r.string("data", c.data);
    r.string("output", c.output);
    r.integer("threads", c.threads);
    r.string("log_level", c.log_level);
    if (const Json* v = r.find("reconstruction")) read_reconstruction(*v, c.reconstruction);
    r.finish();
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig c = parse_config(ss.str(), path.string());
    c.base_dir = path.parent_path();
    return c;
}

std::string emit_config(const RunConfig& c)
{
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["truth_mesh"] = c.truth_mesh ? mesh_json(*c.truth_mesh) : Json(nullptr);
    j["initial_mesh"] = c.initial_mesh ? mesh_json(*c.initial_mesh) : Json(nullptr);
    j["waves"] = Json::array();
    for (const auto& g : c.waves) {
        Json w;
        w["kappa"] = g.kappa;
        w["eta"] = g.eta;
        w["directions"] = Json::array();
        for (const auto& d : g.directions) w["directions"].push_back(vec3_json(d));
        j["waves"].push_back(std::move(w));
    }
    j["grid_level"] = c.grid_level;
    j["noise_percent"] = c.noise_percent;
    j["seed"] = c.seed;
    j["data"] = c.data;
    j["output"] = c.output;
    j["threads"] = c.threads;
    j["log_level"] = c.log_level;
    j["reconstruction"] = reconstruction_json(c.reconstruction);
    return j.dump(2) + "\n";
}

mesh::TriangleMesh build_mesh(const MeshSpec& spec, const RunConfig& config)
{
    if (const auto* path = std::get_if<std::string>(&spec)) return mesh::load_mesh(config.resolve(*path));
    const auto& s = std::get<IcosphereSpec>(spec);
    return mesh::translated(mesh::scaled(mesh::icosphere(s.level, s.radius), s.scale), s.offset);
}

} // namespace scatter::cli
