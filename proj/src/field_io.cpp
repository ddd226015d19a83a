#include "fluidrecon/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace fluidrecon::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

static_assert(sizeof(double) == 8 && std::numeric_limits<double>::is_iec559);

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("malformed " + path.string() + ": " + e.what());
    }
}

json grid_json(const DiskGrid& g) { return {{"n_r", g.n_r()}, {"n_theta", g.n_theta()}}; }

GridPtr grid_from(const json& m, const fs::path& where) {
    try {
        if (m.at("format_version").get<int>() != kFormatVersion) {
            throw DataError(where.string() + ": unsupported format_version");
        }
        return build_disk_grid(m.at("grid").at("n_r").get<int>(),
                               m.at("grid").at("n_theta").get<int>());
    } catch (const json::exception& e) {
        throw DataError(where.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(where.string() + ": " + e.what());
    }
}

json file_entry(const std::string& role, const std::string& path, std::size_t count) {
    return {{"role", role}, {"path", path}, {"count", count}};
}

}  // namespace

void write_f64(const fs::path& path, std::span<const double> values) {
    std::vector<unsigned char> bytes(values.size() * 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto bits = std::bit_cast<std::uint64_t>(values[i]);
        for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<double> read_f64(const fs::path& path, std::size_t expected) {
    std::error_code ec;
    const auto size = fs::file_size(path, ec);
    if (ec) throw DataError("missing field file " + path.string());
    if (size != expected * 8) {
        throw DataError(path.string() + ": expected " + std::to_string(expected * 8) +
                        " bytes, found " + std::to_string(size));
    }
    std::ifstream in(path, std::ios::binary);
    std::vector<unsigned char> bytes(size);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
    if (!in) throw DataError("cannot read " + path.string());
    std::vector<double> out(expected);
    for (std::size_t i = 0; i < expected; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= std::uint64_t{bytes[i * 8 + b]} << (8 * b);
        out[i] = std::bit_cast<double>(bits);
    }
    return out;
}

void write_bundle(const MeasurementBundle& b, const fs::path& dir) {
    ensure_dir(dir);
    const std::size_t n = b.grid->size();
    const std::size_t nt = static_cast<std::size_t>(b.grid->n_theta());
    json files = json::array();
    for (std::size_t k = 0; k < b.q.size(); ++k) {
        std::vector<double> re(n), im(n);
        for (std::size_t i = 0; i < n; ++i) {
            re[i] = b.q[k][i].real();
            im[i] = b.q[k][i].imag();
        }
        const std::string sre = "q_re_" + std::to_string(k) + ".f64";
        const std::string sim = "q_im_" + std::to_string(k) + ".f64";
        write_f64(dir / sre, re);
        write_f64(dir / sim, im);
        auto e_re = file_entry("q_re", sre, n);
        auto e_im = file_entry("q_im", sim, n);
        e_re["freq_index"] = k;
        e_im["freq_index"] = k;
        files.push_back(e_re);
        files.push_back(e_im);
    }
    write_f64(dir / "F.f64", b.F.values());
    files.push_back(file_entry("F", "F.f64", n));
    const std::pair<const char*, const std::vector<double>*> traces[] = {
        {"c_boundary", &b.boundary_c},
        {"rho_boundary", &b.boundary_rho},
        {"v1_boundary", &b.boundary_v1},
        {"v2_boundary", &b.boundary_v2},
    };
    for (const auto& [role, data] : traces) {
        const std::string name = std::string(role) + ".f64";
        write_f64(dir / name, *data);
        files.push_back(file_entry(role, name, nt));
    }
    json m = {{"format_version", kFormatVersion},
              {"grid", grid_json(*b.grid)},
              {"freqs", std::vector<double>(b.freqs.values().begin(), b.freqs.values().end())},
              {"files", files},
              {"noise_sigma", b.noise_sigma},
              {"seed", b.seed},
              {"scenario", b.scenario}};
    write_json(dir / "manifest.json", m);
}

MeasurementBundle read_bundle(const fs::path& dir) {
    const fs::path mpath = dir / "manifest.json";
    const json m = read_json(mpath);
    MeasurementBundle b;
    b.grid = grid_from(m, mpath);
    const std::size_t n = b.grid->size();
    const std::size_t nt = static_cast<std::size_t>(b.grid->n_theta());
    try {
        b.freqs = FrequencySet(m.at("freqs").get<std::vector<double>>());
        b.noise_sigma = m.value("noise_sigma", 0.0);
        b.seed = m.value("seed", std::uint64_t{0});
        b.scenario = m.value("scenario", std::string{});
        const std::size_t nf = b.freqs.size();
        std::vector<std::vector<double>> re(nf), im(nf);
        bool have_F = false;
        for (const auto& f : m.at("files")) {
            const auto role = f.at("role").get<std::string>();
            const fs::path path = dir / f.at("path").get<std::string>();
            if (role == "q_re" || role == "q_im") {
                const auto k = f.at("freq_index").get<std::size_t>();
                if (k >= nf) throw DataError("freq_index out of range in " + mpath.string());
                (role == "q_re" ? re : im)[k] = read_f64(path, n);
            } else if (role == "F") {
                b.F = ScalarField(b.grid, read_f64(path, n));
                have_F = true;
            } else if (role == "c_boundary") {
                b.boundary_c = read_f64(path, nt);
            } else if (role == "rho_boundary") {
                b.boundary_rho = read_f64(path, nt);
            } else if (role == "v1_boundary") {
                b.boundary_v1 = read_f64(path, nt);
            } else if (role == "v2_boundary") {
                b.boundary_v2 = read_f64(path, nt);
            }
        }
        if (!have_F) throw DataError(mpath.string() + " declares no F file");
        if (b.boundary_c.empty() || b.boundary_rho.empty() || b.boundary_v1.empty() ||
            b.boundary_v2.empty()) {
            throw DataError(mpath.string() + " is missing a boundary trace");
        }
        for (std::size_t k = 0; k < nf; ++k) {
            if (re[k].empty() || im[k].empty()) {
                throw DataError(mpath.string() + ": missing q file for frequency " +
                                std::to_string(k));
            }
            ComplexField q(b.grid);
            for (std::size_t i = 0; i < n; ++i) q[i] = {re[k][i], im[k][i]};
            b.q.push_back(std::move(q));
        }
    } catch (const json::exception& e) {
        throw DataError(mpath.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(mpath.string() + ": " + e.what());
    }
    return b;
}

void write_field_set(const FieldSet& set, const fs::path& dir) {
    ensure_dir(dir);
    json files = json::array();
    for (const auto& [name, field] : set.fields) {
        require_same_grid(*set.grid, field.grid(), "field set");
        write_f64(dir / (name + ".f64"), field.values());
        files.push_back(file_entry(name, name + ".f64", field.size()));
    }
    json m = {{"format_version", kFormatVersion}, {"grid", grid_json(*set.grid)}, {"files", files}};
    write_json(dir / "manifest.json", m);
}

FieldSet read_field_set(const fs::path& dir) {
    const fs::path mpath = dir / "manifest.json";
    const json m = read_json(mpath);
    FieldSet set;
    set.grid = grid_from(m, mpath);
    try {
        for (const auto& f : m.at("files")) {
            const auto role = f.at("role").get<std::string>();
            set.fields.emplace(role, ScalarField(set.grid, read_f64(dir / f.at("path").get<std::string>(),
                                                                    set.grid->size())));
        }
    } catch (const json::exception& e) {
        throw DataError(mpath.string() + ": " + e.what());
    }
    return set;
}

GridPtr read_manifest_grid(const fs::path& manifest) { return grid_from(read_json(manifest), manifest); }

FieldSet to_field_set(const FluidState& s) {
    FieldSet set{s.grid_ptr(), {}};
    set.fields.emplace("c", s.c);
    set.fields.emplace("v1", s.v.x1);
    set.fields.emplace("v2", s.v.x2);
    set.fields.emplace("rho", s.rho);
    if (s.zeta.grid_ptr()) set.fields.emplace("zeta", s.zeta);
    if (s.alpha0.grid_ptr()) set.fields.emplace("alpha0", s.alpha0);
    return set;
}

FluidState to_fluid_state(const FieldSet& set) {
    auto get = [&](const char* name) -> ScalarField {
        auto it = set.fields.find(name);
        if (it == set.fields.end()) throw DataError(std::string("field set lacks ") + name);
        return it->second;
    };
    auto get_or_zero = [&](const char* name) {
        auto it = set.fields.find(name);
        return it == set.fields.end() ? ScalarField(set.grid) : it->second;
    };
    FluidState s;
    s.c = get("c");
    s.v = VectorField(get("v1"), get("v2"));
    s.rho = get("rho");
    s.zeta = get_or_zero("zeta");
    s.alpha0 = get_or_zero("alpha0");
    return s;
}

}  // namespace fluidrecon::io
