// Command-line front end: crt <subcommand> [options]. Run `crt --help` for the list.
//
// Exit codes: 0 ok, 1 usage, 2 data or format error, 3 range check failed,
// 4 selftest failed, 5 compare exceeded --max.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "crt/cone.hpp"
#include "crt/dalembertian.hpp"
#include "crt/error.hpp"
#include "crt/field.hpp"
#include "crt/io.hpp"
#include "crt/parallel.hpp"
#include "crt/phantoms.hpp"
#include "crt/range.hpp"
#include "crt/spectral.hpp"

using namespace crt;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kRangeFailed = 3;
constexpr int kSelftestFailed = 4;
constexpr int kCompareFailed = 5;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    int threads = 0;
    std::string input;
    std::string input2;
    std::string output;

    // grid and phantom
    int m = 1;
    std::size_t n = 128;
    std::size_t nt = 0;
    double x_half = 2.0;
    double t_lo = -2.0;
    double t_hi = 2.0;
    std::string kind = "bump";
    std::vector<double> center;
    double radius = 1.0;
    double amplitude = 1.0;

    // operators
    double phi = std::numbers::pi / 4;
    int k = 0;
    int order = 1;
    std::string smoothing = "mesh";
    bool flip_cone = false;
    bool surface_measure = false;
    bool windowed = false;
    std::string pad_t = "auto";
    std::string method = "spatial";
    double eps = 0.0;
    double padding = 2.0;

    // range check
    double tol_support = 0.0;
    double tol_integral = 0.0;
    double tol_halfspace = 0.0;
    std::size_t margin = 2;

    // symbol table
    std::vector<double> omegas{0.5, 1.0, 2.0, 4.0, 8.0};
    std::vector<double> taus{0.5, 1.0, 2.0, 4.0, 8.0};

    // export
    std::string format = "csv";
    int row_axis = 0;
    int col_axis = 1;
    std::vector<std::size_t> fixed;

    double max_error = -1.0;
};

QuadratureSpec quadrature(const RunConfig& c) {
    QuadratureSpec q;
    q.order = c.order == 3 ? Interpolation::cubic : Interpolation::linear;
    q.smoothing = c.smoothing == "none" ? KernelSmoothing::none : KernelSmoothing::mesh_matched;
    return q;
}

ConeParams cone_of(const RunConfig& c) { return ConeParams(c.phi); }

int auto_k(const RunConfig& c, int m) { return c.k > 0 ? c.k : order_for(m); }

std::ostream& text_out(const RunConfig& c, std::ofstream& file) {
    if (c.output.empty() || c.output == "-") return std::cout;
    file.open(c.output, std::ios::binary);
    if (!file) throw FormatError("cannot open " + c.output + " for writing");
    return file;
}

void write_meta(const std::string& path, const std::map<std::string, std::string>& kv) {
    std::ofstream out(path + ".meta");
    if (!out) throw FormatError("cannot open " + path + ".meta for writing");
    for (const auto& [key, value] : kv) out << key << '=' << value << '\n';
}

std::string num(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

// Extends the t axis by cells zero samples, on top or (for a flipped cone) below.
ScalarField pad_t_axis(const ScalarField& f, std::size_t cells, bool below) {
    const auto& grid = f.grid();
    std::vector<std::size_t> counts(grid.counts().begin(), grid.counts().end());
    std::vector<double> spacing(grid.spacings().begin(), grid.spacings().end());
    std::vector<double> origin(grid.origins().begin(), grid.origins().end());
    counts.back() += cells;
    if (below) origin.back() -= static_cast<double>(cells) * grid.t_spacing();
    const GridSpec padded(grid.spatial_dim(), counts, spacing, origin);
    const std::size_t nt = grid.t_count();
    const std::size_t offset = below ? cells : 0;
    std::vector<double> values(padded.size(), 0.0);
    for (std::size_t line = 0; line < grid.spatial_size(); ++line) {
        const auto src = f.line(line);
        std::copy(src.begin(), src.end(), values.begin() + line * padded.t_count() + offset);
    }
    return ScalarField(padded, std::move(values));
}

// Restricts b to a's grid when b is a's grid extended along t; returns b itself on equal grids.
ScalarField match_grid(const ScalarField& a, const ScalarField& b) {
    const auto& ga = a.grid();
    const auto& gb = b.grid();
    if (ga == gb) return b;
    bool spatial_same = ga.spatial_dim() == gb.spatial_dim();
    for (int ax = 0; spatial_same && ax < ga.spatial_dim(); ++ax) {
        spatial_same = ga.count(ax) == gb.count(ax) && ga.spacing(ax) == gb.spacing(ax) && ga.origin(ax) == gb.origin(ax);
    }
    const double shift = (ga.t_min() - gb.t_min()) / gb.t_spacing();
    const long first = std::lround(shift);
    if (!spatial_same || ga.t_spacing() != gb.t_spacing() || std::abs(shift - static_cast<double>(first)) > 1e-9 ||
        first < 0 || static_cast<std::size_t>(first) + ga.t_count() > gb.t_count()) {
        throw ShapeMismatch("grids differ and the second is not a t-extension of the first");
    }
    std::vector<double> values(ga.size());
    for (std::size_t line = 0; line < ga.spatial_size(); ++line) {
        const auto src = b.line(line).subspan(static_cast<std::size_t>(first), ga.t_count());
        std::copy(src.begin(), src.end(), values.begin() + line * ga.t_count());
    }
    return ScalarField(ga, std::move(values));
}

int cmd_phantom(const RunConfig& c) {
    const std::size_t nt = c.nt ? c.nt : c.n;
    const auto grid = GridSpec::isotropic(c.m, c.n, 2.0 * c.x_half / static_cast<double>(c.n - 1), -c.x_half, nt,
                                          (c.t_hi - c.t_lo) / static_cast<double>(nt - 1), c.t_lo);
    std::vector<double> centre = c.center;
    if (centre.empty()) centre.assign(static_cast<std::size_t>(c.m + 1), 0.0);
    if (centre.size() != static_cast<std::size_t>(c.m + 1)) {
        throw UsageError("--center needs " + std::to_string(c.m + 1) + " values");
    }
    const auto kind = c.kind == "gaussian" ? PhantomKind::gaussian : PhantomKind::bump;
    write_crtf(c.output, render_phantom(PhantomSpec::single(kind, centre, c.radius, c.amplitude), grid));
    return 0;
}

int cmd_forward(const RunConfig& c, bool weighted) {
    auto f = read_crtf(c.input);
    const auto cone = cone_of(c);
    std::size_t pad = 0;
    if (c.pad_t == "auto") {
        pad = static_cast<std::size_t>(std::ceil(cone_reach(f.grid(), cone) / f.grid().t_spacing())) + 2;
    } else if (c.pad_t != "none") {
        try {
            pad = std::stoul(c.pad_t);
        } catch (const std::exception&) {
            throw UsageError("--pad-t: expected auto, none or a cell count");
        }
    }
    if (pad > 0) f = pad_t_axis(f, pad, c.flip_cone);

    ForwardOptions opts;
    opts.flip_cone = c.flip_cone;
    opts.surface_measure = c.surface_measure;
    opts.require_compact_support = !c.windowed;
    ScalarField g(f.grid());
    std::map<std::string, std::string> meta;
    if (c.method == "spectral") {
        if (weighted || c.flip_cone || c.surface_measure) {
            throw UsageError("--method spectral supports the plain upward transform only");
        }
        const double eps = c.eps > 0.0 ? c.eps : default_epsilon(f.grid());
        SpectralOptions so;
        so.padding.assign(static_cast<std::size_t>(f.grid().axes()), c.padding);
        auto r = spectral_forward_crt(f, cone, eps, so);
        meta["epsilon"] = num(eps);
        meta["imag_residue"] = num(r.diagnostics.imag_residue);
        if (r.diagnostics.residue_warning) std::cerr << "warning: imaginary residue " << r.diagnostics.imag_residue << '\n';
        g = std::move(r.field);
    } else {
        g = weighted ? weighted_forward_crt(f, cone, quadrature(c), opts) : forward_crt(f, cone, quadrature(c), opts);
    }
    write_crtf(c.output, g);
    meta["transform"] = weighted ? "weighted" : "plain";
    meta["method"] = c.method;
    meta["phi"] = num(c.phi);
    meta["order"] = std::to_string(c.order);
    meta["smoothing"] = c.smoothing;
    meta["flip_cone"] = c.flip_cone ? "true" : "false";
    meta["surface_measure"] = c.surface_measure ? "true" : "false";
    meta["t_pad_cells"] = std::to_string(pad);
    meta["t_pad_side"] = c.flip_cone ? "below" : "above";
    meta["t_pad"] = num(static_cast<double>(pad) * f.grid().t_spacing());
    meta["input"] = c.input;
    write_meta(c.output, meta);
    return 0;
}

int cmd_box(const RunConfig& c) {
    const auto f = read_crtf(c.input);
    write_crtf(c.output, apply_box(f, cone_of(c), c.k > 0 ? c.k : 1));
    return 0;
}

int cmd_invert(const RunConfig& c) {
    const auto g = read_crtf(c.input);
    const int m = g.grid().spatial_dim();
    const int k = auto_k(c, m);
    const auto cone = cone_of(c);
    const auto f = parity_for(m) == Parity::even ? invert_even(g, cone, k) : invert_odd(g, cone, k, quadrature(c));
    write_crtf(c.output, f);
    return 0;
}

int cmd_check_range(const RunConfig& c) {
    const auto g = read_crtf(c.input);
    const int m = g.grid().spatial_dim();
    auto tol = RangeTolerances::defaults_for(g.grid());
    if (c.tol_support > 0.0) tol.support = c.tol_support;
    if (c.tol_integral > 0.0) tol.integral = c.tol_integral;
    if (c.tol_halfspace > 0.0) tol.halfspace = c.tol_halfspace;
    tol.margin_cells = c.margin;
    const auto report = check_range(g, cone_of(c), parity_for(m), auto_k(c, m), tol, quadrature(c));
    std::cout << report.to_text();
    if (!c.output.empty()) {
        std::ofstream out(c.output);
        if (!out) throw FormatError("cannot open " + c.output + " for writing");
        out << report.to_kv();
    }
    return report.all_pass() ? 0 : kRangeFailed;
}

int cmd_symbol_table(const RunConfig& c) {
    const auto cone = cone_of(c);
    const SymbolEvaluator ev(c.m, cone, c.eps > 0.0 ? c.eps : 0.1);
    std::ofstream file;
    auto& out = text_out(c, file);
    out.precision(17);
    out << "omega,tau,re_D,im_D,re_oracle,im_oracle,rel_diff\n";
    const bool with_oracle = std::abs(c.phi - std::numbers::pi / 4) < 1e-15;
    for (double w : c.omegas) {
        for (double tau : c.taus) {
            std::vector<double> omega(static_cast<std::size_t>(c.m), 0.0);
            omega[0] = w;
            const complex d = ev.symbol_D(omega, complex(0.0, -tau));
            out << w << ',' << tau << ',' << d.real() << ',' << d.imag();
            if (with_oracle) {
                const complex o = oracle_symbol(w, tau, c.m);
                out << ',' << o.real() << ',' << o.imag() << ',' << std::abs(d - o) / std::abs(o) << '\n';
            } else {
                out << ",,,\n";
            }
        }
    }
    return 0;
}

int cmd_selftest() {
    const ConeParams cone = ConeParams::right_angle();
    bool ok = true;
    const auto report = [&](const char* name, bool pass, double value) {
        std::printf("%-28s %s  %.3e\n", name, pass ? "PASS" : "FAIL", value);
        ok = ok && pass;
    };

    double worst = 0.0;
    for (int m = 1; m <= 3; ++m) {
        const SymbolEvaluator ev(m, cone, 0.1);
        for (double w : {0.5, 1.0, 2.0, 4.0, 8.0}) {
            for (double tau : {0.5, 1.0, 2.0, 4.0, 8.0}) {
                std::vector<double> omega(static_cast<std::size_t>(m), 0.0);
                omega[0] = w;
                const complex o = oracle_symbol(w, tau, m);
                worst = std::max(worst, std::abs(ev.symbol_D(omega, complex(0.0, -tau)) - o) / std::abs(o));
            }
        }
    }
    report("branch calibration", worst <= 1e-8, worst);

    double beta_rel = 0.0;
    for (int m = 2; m <= 6; ++m) {
        beta_rel = std::max(beta_rel, std::abs(beta(m) * std::sqrt(2.0) * double(1 - m) - alpha(m)) / std::abs(alpha(m)));
    }
    report("constant identities", beta_rel <= 1e-14, beta_rel);

    const auto grid = GridSpec::isotropic(1, 129, 4.0 / 128, -2.0, 129, 4.0 / 128, -2.0);
    const auto spec = PhantomSpec::single(PhantomKind::bump, {0.0, -0.5}, 1.0);
    const auto f = render_phantom(spec, grid);
    const auto g = forward_crt(f, cone);
    const auto boxed = apply_box(g, cone, 1);
    const double exact = relative_l2_error(boxed, scale(partial_t(f), 2.0), interior_box(grid, 1));
    report("discrete even identity", exact <= 1e-10, exact);
    const double analytic = relative_l2_error(boxed, scale(render_phantom_dt(spec, grid), 2.0), interior_box(grid, 4));
    report("even identity vs f_t", analytic <= 0.02, analytic);
    const double roundtrip = relative_l2_error(invert_even(g, cone, 1), f, full_box(grid));
    report("even roundtrip", roundtrip <= 0.02, roundtrip);
    const auto range = check_range(g, cone, Parity::even, 1, RangeTolerances::defaults_for(grid));
    report("range check on forward data", range.all_pass(), range.cond2_residual);
    return ok ? 0 : kSelftestFailed;
}

int cmd_export(const RunConfig& c) {
    const auto f = read_crtf(c.input);
    if (c.format == "csv") {
        std::ofstream file;
        write_csv(text_out(c, file), f);
        return 0;
    }
    if (c.output.empty()) throw UsageError("--output is required for pgm");
    PgmSlice slice{c.row_axis, c.col_axis, c.fixed};
    if (slice.fixed.empty()) slice.fixed.assign(static_cast<std::size_t>(f.grid().axes()), 0);
    write_pgm(c.output, f, slice);
    return 0;
}

int cmd_compare(const RunConfig& c) {
    const auto a = read_crtf(c.input);
    const auto b = match_grid(a, read_crtf(c.input2));
    const double rel = relative_l2_error(b, a, full_box(a.grid()));
    std::printf("relative_l2=%.17g\nmax_abs_diff=%.17g\n", rel, linf_norm(subtract(a, b)));
    return c.max_error >= 0.0 && rel > c.max_error ? kCompareFailed : 0;
}

// key=value pairs become --key=value arguments, placed before the command-line ones so flags win.
std::vector<std::string> with_config(CLI::App& app, std::vector<std::string> args) {
    const auto it = std::find_if(args.begin(), args.end(), [](const std::string& a) {
        return a == "--config" || a.rfind("--config=", 0) == 0;
    });
    if (it == args.end()) return args;
    std::string path;
    if (*it == "--config") {
        if (it + 1 == args.end()) throw UsageError("--config needs a path");
        path = *(it + 1);
        args.erase(it, it + 2);
    } else {
        path = it->substr(9);
        args.erase(it);
    }
    const auto kv = read_kv_file(path);

    const auto sub_at = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
        return app.get_subcommand_no_throw(a) != nullptr;
    });
    CLI::App* sub = sub_at == args.end() ? nullptr : app.get_subcommand(*sub_at);
    std::vector<std::string> global;
    std::vector<std::string> local;
    for (const auto& [key, value] : kv) {
        const std::string flag = "--" + key;
        if (sub != nullptr && sub->get_option_no_throw(flag) != nullptr) {
            local.push_back(flag + "=" + value);
        } else if (app.get_option_no_throw(flag) != nullptr) {
            global.push_back(flag + "=" + value);
        } else {
            throw UsageError("config key '" + key + "' is not an option of this command");
        }
    }
    std::vector<std::string> out;
    out.insert(out.end(), global.begin(), global.end());
    for (auto a = args.begin(); a != args.end(); ++a) {
        out.push_back(*a);
        if (a == sub_at) out.insert(out.end(), local.begin(), local.end());
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig c;
    CLI::App app{"Conical Radon transform toolkit"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.add_option("--threads", c.threads, "Worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);
    app.add_option("--config", "key=value file; keys are long option names");

    const auto add_cone = [&](CLI::App* s) {
        s->add_option("--phi", c.phi, "Cone half-opening in radians")
            ->check(CLI::Range(1e-6, std::numbers::pi / 2 - 1e-6));
    };
    const auto add_quadrature = [&](CLI::App* s) {
        s->add_option("--order", c.order, "t interpolation order (1 or 3)")->check(CLI::IsMember({1, 3}));
        s->add_option("--smoothing", c.smoothing, "Kernel smoothing along t")->check(CLI::IsMember({"mesh", "none"}));
    };
    const auto add_io = [&](CLI::App* s, bool needs_output) {
        s->add_option("-i,--input", c.input, "Input CRTF file")->required();
        auto* o = s->add_option("-o,--output", c.output, "Output file");
        if (needs_output) o->required();
    };

    auto* phantom = app.add_subcommand("phantom", "Render a phantom to CRTF");
    phantom->add_option("-m,--m", c.m, "Spatial dimension")->check(CLI::Range(1, 3));
    phantom->add_option("-n,--n", c.n, "Samples per spatial axis")->check(CLI::Range(4, 4096));
    phantom->add_option("--nt", c.nt, "Samples along t (default: n)")->check(CLI::Range(0, 65536));
    phantom->add_option("--x-half", c.x_half, "Spatial half-width")->check(CLI::PositiveNumber);
    phantom->add_option("--t-lo", c.t_lo, "Lowest t");
    phantom->add_option("--t-hi", c.t_hi, "Highest t");
    phantom->add_option("--kind", c.kind)->check(CLI::IsMember({"bump", "gaussian"}));
    phantom->add_option("--center", c.center, "Centre (m spatial values, then t)");
    phantom->add_option("--radius", c.radius)->check(CLI::PositiveNumber);
    phantom->add_option("--amplitude", c.amplitude);
    phantom->add_option("-o,--output", c.output, "Output CRTF file")->required();

    CLI::App* forwards[2];
    for (int w = 0; w < 2; ++w) {
        auto* s = forwards[w] = app.add_subcommand(w ? "forward-weighted" : "forward",
                                                   w ? "Weighted transform C'" : "Conical Radon transform C");
        add_io(s, true);
        add_cone(s);
        add_quadrature(s);
        s->add_flag("--flip-cone", c.flip_cone, "Cone opens downward");
        s->add_flag("--surface-measure", c.surface_measure, "Integrate against cone surface measure");
        s->add_flag("--windowed", c.windowed, "Accept data touching the grid boundary");
        s->add_option("--pad-t", c.pad_t, "t padding: auto, none or a cell count");
        if (!w) {
            s->add_option("--method", c.method)->check(CLI::IsMember({"spatial", "spectral"}));
            s->add_option("--eps", c.eps, "Damping for the spectral path (default 4/T)")->check(CLI::NonNegativeNumber);
            s->add_option("--padding", c.padding, "FFT padding factor per axis")->check(CLI::Range(1.0, 8.0));
        }
    }

    auto* box = app.add_subcommand("box", "Apply the d'Alembertian k times");
    add_io(box, true);
    add_cone(box);
    box->add_option("-k,--k", c.k, "Power")->check(CLI::Range(1, 8));

    auto* invert = app.add_subcommand("invert", "Invert forward data (parity chosen from m)");
    add_io(invert, true);
    add_cone(invert);
    add_quadrature(invert);
    invert->add_option("-k,--k", c.k, "Order (default from m)")->check(CLI::Range(1, 8));

    auto* range = app.add_subcommand("check-range", "Test the range conditions; exit 3 on failure");
    add_io(range, false);
    add_cone(range);
    add_quadrature(range);
    range->add_option("-k,--k", c.k, "Order (default from m)")->check(CLI::Range(1, 8));
    range->add_option("--tol-support", c.tol_support, "Condition 1 threshold")->check(CLI::NonNegativeNumber);
    range->add_option("--tol-integral", c.tol_integral, "Condition 2 threshold")->check(CLI::NonNegativeNumber);
    range->add_option("--tol-halfspace", c.tol_halfspace, "Condition 3 threshold")->check(CLI::NonNegativeNumber);
    range->add_option("--margin", c.margin, "Boundary band width in cells")->check(CLI::Range(1, 64));

    auto* table = app.add_subcommand("symbol-table", "CSV of the kernel symbol on the imaginary axis");
    table->add_option("-m,--m", c.m)->check(CLI::Range(1, 3));
    add_cone(table);
    table->add_option("--eps", c.eps)->check(CLI::NonNegativeNumber);
    table->add_option("--omega", c.omegas, "|omega| samples")->check(CLI::NonNegativeNumber);
    table->add_option("--tau", c.taus, "tau samples")->check(CLI::PositiveNumber);
    table->add_option("-o,--output", c.output);

    auto* selftest = app.add_subcommand("selftest", "Calibration and identity checks; exit 4 on failure");

    auto* exporter = app.add_subcommand("export", "Export to CSV or a PGM slice");
    add_io(exporter, false);
    exporter->add_option("--format", c.format)->check(CLI::IsMember({"csv", "pgm"}));
    exporter->add_option("--row-axis", c.row_axis)->check(CLI::Range(0, 3));
    exporter->add_option("--col-axis", c.col_axis)->check(CLI::Range(0, 3));
    exporter->add_option("--fixed", c.fixed, "Index on every axis; row and column entries are ignored");

    auto* compare = app.add_subcommand("compare", "Relative l2 difference of two fields");
    compare->add_option("a", c.input, "Reference")->required();
    compare->add_option("b", c.input2, "Candidate; may extend the reference along t")->required();
    compare->add_option("--max", c.max_error, "Exit 5 when the difference exceeds this")->check(CLI::NonNegativeNumber);

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = with_config(app, std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }

    try {
        if (c.threads > 0) set_thread_count(c.threads);
        if (*phantom) return cmd_phantom(c);
        if (*forwards[0]) return cmd_forward(c, false);
        if (*forwards[1]) return cmd_forward(c, true);
        if (*box) return cmd_box(c);
        if (*invert) return cmd_invert(c);
        if (*range) return cmd_check_range(c);
        if (*table) return cmd_symbol_table(c);
        if (*selftest) return cmd_selftest();
        if (*exporter) return cmd_export(c);
        if (*compare) return cmd_compare(c);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}
