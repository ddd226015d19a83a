#include "fluidrecon/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fluidrecon/field_io.hpp"
#include "fluidrecon/pipeline.hpp"

namespace fluidrecon::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

json norms_json(const ErrorNorms& e) {
    return {{"sup_abs", e.sup_abs}, {"sup_rel", e.sup_rel}, {"l2_abs", e.l2_abs}, {"l2_rel", e.l2_rel}};
}

json report_json(const ReconstructionReport& r, const std::string& mode) {
    json j;
    j["mode"] = mode;
    j["absorption"] = r.absorption;
    j["stages"] = r.stages;
    j["diagnostics"] = json::object();
    for (const auto& [k, v] : r.diagnostics) j["diagnostics"][k] = v;
    if (!r.errors_vs_truth.empty()) {
        json e = json::object();
        for (const auto& [k, v] : r.errors_vs_truth) {
            e[k] = {{"full", norms_json(v.full)}, {"subdisk", norms_json(v.subdisk)}};
        }
        j["errors_vs_truth"] = e;
    }
    return j;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw io::IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw io::IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string scenario;
    int n_r = 64;
    int n_theta = 256;
    std::vector<double> freqs{1.0, 2.0};
    double noise = 0.0;
    std::uint64_t seed = 0;
    bool noise_on_F = false;
    std::string out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
    const Scenario* s = nullptr;
    try {
        s = &find_scenario(a.scenario);
    } catch (const std::out_of_range&) {
        err << "unknown scenario '" << a.scenario << "'; available:\n";
        for (const auto& sc : scenario_catalog()) err << "  " << sc.name << "  " << sc.description << '\n';
        return usage;
    }
    std::vector<double> freqs = a.freqs;
    if (!std::is_sorted(freqs.begin(), freqs.end())) {
        std::sort(freqs.begin(), freqs.end());
        err << "warning: frequencies reordered to increasing order\n";
    }
    if (!(a.noise >= 0.0)) throw UsageError("--noise must be non-negative");
    const GridPtr grid = build_disk_grid(a.n_r, a.n_theta);
    const FrequencySet fs_(freqs);
    const MeasurementBundle bundle = synthesize_bundle(*s, grid, fs_, a.noise, a.seed, a.noise_on_F);
    io::write_bundle(bundle, a.out);
    io::write_field_set(io::to_field_set(sample_state(*s, grid)), fs::path(a.out) / "truth");
    out << "wrote " << a.scenario << " bundle (" << grid->size() << " nodes, " << freqs.size()
        << " frequencies) to " << a.out << '\n';
    return ok;
}

struct ReconstructArgs {
    std::string in;
    std::string mode;
    double eps_d0 = 1e-8;
    std::string gauge = "dirichlet-green";
    std::string out;
    std::string truth;
    double absorption_tol = 1e-6;
    double subdisk = 0.9;
};

int cmd_reconstruct(const ReconstructArgs& a, std::ostream& out, std::ostream& err) {
    const MeasurementBundle bundle = io::read_bundle(a.in);
    const std::size_t nf = bundle.freqs.size();
    if ((a.mode == "two-freq" && nf != 2) || (a.mode == "three-freq" && nf != 3) ||
        (a.mode == "least-squares" && nf < 3)) {
        throw UsageError("mode " + a.mode + " does not accept a bundle with " + std::to_string(nf) +
                         " frequencies");
    }
    PipelineOptions opts;
    opts.gauge = a.gauge == "freespace" ? Gauge::freespace_corrected : Gauge::dirichlet_green;
    opts.eps_d0 = a.eps_d0;
    opts.absorption_tolerance = a.absorption_tol;
    opts.least_squares = a.mode == "least-squares";
    opts.subdisk = a.subdisk;
    if (!a.truth.empty()) {
        io::FieldSet truth = io::read_field_set(a.truth);
        require_same_grid(*bundle.grid, *truth.grid, "truth");
        opts.truth = io::to_fluid_state(truth);
    }
    const fs::path dir(a.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw io::IoError("cannot create output directory " + dir.string());

    ReconstructionReport report;
    try {
        report = a.mode == "two-freq" ? reconstruct_theorem1(bundle, opts)
                                      : reconstruct_theorem2(bundle, opts);
    } catch (const StageError& e) {
        json j = report_json(e.partial(), a.mode);
        j["failed_stage"] = e.stage();
        j["error"] = e.what();
        write_text(dir / "report.json", j.dump(2) + "\n");
        err << "stage " << e.what() << '\n';
        return numeric;
    }
    io::write_field_set(io::to_field_set(report.recovered), dir);
    write_text(dir / "report.json", report_json(report, a.mode).dump(2) + "\n");
    out << "reconstruction finished; positivity margin "
        << report.diagnostics["positivity_margin"] << ", loop defect "
        << report.diagnostics["loop_defect"] << '\n';
    return ok;
}

struct CompareArgs {
    std::string a;
    std::string b;
    double subdisk = 0.9;
    std::string report;
};

int cmd_compare(const CompareArgs& args, std::ostream& out) {
    const io::FieldSet a = io::read_field_set(args.a);
    const io::FieldSet b = io::read_field_set(args.b);
    if (!(*a.grid == *b.grid)) {
        throw UsageError("grids differ: (" + std::to_string(a.grid->n_r()) + ", " +
                         std::to_string(a.grid->n_theta()) + ") vs (" +
                         std::to_string(b.grid->n_r()) + ", " + std::to_string(b.grid->n_theta()) + ")");
    }
    const DiskGrid& g = *a.grid;
    std::vector<bool> all(g.size(), true), inner(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) inner[i] = g.radius(g.ring_of(i)) <= args.subdisk;
    json fields = json::object();
    for (const auto& [name, fa] : a.fields) {
        auto it = b.fields.find(name);
        if (it == b.fields.end()) continue;
        fields[name] = {
            {"full", norms_json(error_norms(fa.values(), it->second.values(), g, all))},
            {"subdisk", norms_json(error_norms(fa.values(), it->second.values(), g, inner))}};
    }
    json j = {{"grid", {{"n_r", g.n_r()}, {"n_theta", g.n_theta()}}},
              {"subdisk", args.subdisk},
              {"reference", args.b},
              {"fields", fields}};
    if (args.report.empty()) {
        out << j.dump(2) << '\n';
    } else {
        write_text(args.report, j.dump(2) + "\n");
    }
    return ok;
}

struct RenderArgs {
    std::string field;
    std::string manifest;
    std::string out;
    std::optional<double> min;
    std::optional<double> max;
};

constexpr int kImageSize = 512;

int cmd_render(const RenderArgs& a, std::ostream& out, std::ostream& err) {
    const GridPtr grid = io::read_manifest_grid(a.manifest);
    const std::vector<double> v = io::read_f64(a.field, grid->size());
    const auto bad = std::count_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); });
    if (bad > 0) {
        err << "field has " << bad << " non-finite node value(s)\n";
        return numeric;
    }
    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    const double lo = a.min.value_or(*lo_it);
    const double hi = a.max.value_or(*hi_it);
    if (!(hi >= lo)) throw UsageError("--max must not be below --min");

    const int nr = grid->n_r(), nt = grid->n_theta();
    const double dr = grid->dr(), dth = grid->dtheta();
    auto value = [&](int ir, int it) { return v[grid->index(ir, (it % nt + nt) % nt)]; };

    std::vector<unsigned char> pix(static_cast<std::size_t>(kImageSize) * kImageSize, 0);
    for (int py = 0; py < kImageSize; ++py) {
        const double x2 = 1.0 - (py + 0.5) * 2.0 / kImageSize;
        for (int px = 0; px < kImageSize; ++px) {
            const double x1 = -1.0 + (px + 0.5) * 2.0 / kImageSize;
            const double r = std::hypot(x1, x2);
            if (r > 1.0) continue;
            double th = std::atan2(x2, x1);
            if (th < 0.0) th += 2.0 * std::numbers::pi;
            const double fr = std::clamp(r / dr - 0.5, 0.0, static_cast<double>(nr - 1));
            const int i0 = std::min(static_cast<int>(fr), nr - 2);
            const double tr = fr - i0;
            const double ft = th / dth;
            const int j0 = static_cast<int>(std::floor(ft));
            const double tt = ft - j0;
            const double val = (1 - tr) * ((1 - tt) * value(i0, j0) + tt * value(i0, j0 + 1)) +
                               tr * ((1 - tt) * value(i0 + 1, j0) + tt * value(i0 + 1, j0 + 1));
            const double s = hi > lo ? (val - lo) / (hi - lo) : 0.5;
            pix[static_cast<std::size_t>(py) * kImageSize + px] =
                static_cast<unsigned char>(std::clamp(std::floor(s * 255.0 + 0.5), 0.0, 255.0));
        }
    }
    std::ofstream img(a.out, std::ios::binary);
    if (!img) throw io::IoError("cannot open " + a.out + " for writing");
    img << "P5\n" << kImageSize << ' ' << kImageSize << "\n255\n";
    img.write(reinterpret_cast<const char*>(pix.data()), static_cast<std::streamsize>(pix.size()));
    if (!img) throw io::IoError("failed writing " + a.out);
    out << "wrote " << a.out << " (range " << lo << " .. " << hi << ")\n";
    return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Recover sound speed, flow, density and absorption of a fluid in the unit disk"};
    app.require_subcommand(1);

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "synthesize a measurement bundle from a scenario");
    synth->add_option("--scenario", sa.scenario, "scenario name")->required();
    synth->add_option("--nr", sa.n_r, "radial nodes")->capture_default_str();
    synth->add_option("--ntheta", sa.n_theta, "angular nodes")->capture_default_str();
    synth->add_option("--freqs", sa.freqs, "comma-separated frequencies")->delimiter(',');
    synth->add_option("--noise", sa.noise, "relative q noise level")->capture_default_str();
    synth->add_option("--seed", sa.seed, "noise seed")->capture_default_str();
    synth->add_flag("--noise-on-F", sa.noise_on_F, "perturb F as well");
    synth->add_option("--out", sa.out, "output bundle directory")->required();

    ReconstructArgs ra;
    auto* rec = app.add_subcommand("reconstruct", "recover (c, v, rho, zeta, alpha0) from a bundle");
    rec->add_option("--in", ra.in, "bundle directory")->required();
    rec->add_option("--mode", ra.mode, "reconstruction mode")
        ->required()
        ->check(CLI::IsMember({"two-freq", "three-freq", "least-squares"}));
    rec->add_option("--eps-d0", ra.eps_d0, "relative tolerance of the D0 test")->capture_default_str();
    rec->add_option("--gauge", ra.gauge, "vector potential gauge")
        ->check(CLI::IsMember({"dirichlet-green", "freespace"}))
        ->capture_default_str();
    rec->add_option("--absorption-tol", ra.absorption_tol,
                    "two-freq mode refuses data with a larger absorption signature")
        ->capture_default_str();
    rec->add_option("--truth", ra.truth, "field set with ground truth");
    rec->add_option("--subdisk", ra.subdisk, "radius of the error subdisk")->capture_default_str();
    rec->add_option("--out", ra.out, "output directory")->required();

    CompareArgs ca;
    auto* cmp = app.add_subcommand("compare", "difference norms between two field sets");
    cmp->add_option("--a", ca.a, "field set directory")->required();
    cmp->add_option("--b", ca.b, "reference field set directory")->required();
    cmp->add_option("--subdisk", ca.subdisk, "subdisk radius")->capture_default_str();
    cmp->add_option("--report", ca.report, "output JSON file (stdout when omitted)");

    RenderArgs rr;
    auto* ren = app.add_subcommand("render", "render a field as a 512x512 PGM heatmap");
    ren->add_option("--field", rr.field, ".f64 field file")->required();
    ren->add_option("--manifest", rr.manifest, "manifest.json declaring the grid")->required();
    ren->add_option("--out", rr.out, "output PGM file")->required();
    ren->add_option("--min", rr.min, "value mapped to 0");
    ren->add_option("--max", rr.max, "value mapped to 255");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : usage;
    }

    try {
        if (synth->parsed()) return cmd_synth(sa, out, err);
        if (rec->parsed()) return cmd_reconstruct(ra, out, err);
        if (cmp->parsed()) return cmd_compare(ca, out);
        if (ren->parsed()) return cmd_render(rr, out, err);
    } catch (const io::IoError& e) {
        err << "error: " << e.what() << '\n';
        return io_failure;
    } catch (const io::DataError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return numeric;
    }
    return usage;
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace fluidrecon::cli
