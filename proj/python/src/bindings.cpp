#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <numbers>
#include <optional>

#include "crt/cone.hpp"
#include "crt/dalembertian.hpp"
#include "crt/error.hpp"
#include "crt/field.hpp"
#include "crt/io.hpp"
#include "crt/parallel.hpp"
#include "crt/phantoms.hpp"
#include "crt/range.hpp"
#include "crt/spectral.hpp"

namespace py = pybind11;
using namespace crt;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ScalarField from_array(const GridSpec& grid, const Array& a) {
    if (static_cast<std::size_t>(a.size()) != grid.size() || a.ndim() != grid.axes()) {
        throw ShapeMismatch("array shape does not match the grid");
    }
    for (int ax = 0; ax < grid.axes(); ++ax) {
        if (static_cast<std::size_t>(a.shape(ax)) != grid.count(ax)) throw ShapeMismatch("array shape does not match the grid");
    }
    return ScalarField(grid, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const ScalarField& f) {
    std::vector<py::ssize_t> shape(f.grid().counts().begin(), f.grid().counts().end());
    Array out(shape);
    std::copy(f.values().begin(), f.values().end(), out.mutable_data());
    return out;
}

QuadratureSpec quadrature(int order, bool smoothing) {
    return {order == 3 ? Interpolation::cubic : Interpolation::linear,
            smoothing ? KernelSmoothing::mesh_matched : KernelSmoothing::none};
}

ForwardOptions forward_options(bool flip_cone, bool surface_measure, bool windowed) {
    ForwardOptions o;
    o.flip_cone = flip_cone;
    o.surface_measure = surface_measure;
    o.require_compact_support = !windowed;
    return o;
}

constexpr double kQuarter = std::numbers::pi / 4;

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Conical Radon transform on regular grids";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ShapeMismatch>(m, "ShapeMismatch", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    (void)base;

    py::class_<GridSpec>(m, "Grid")
        .def(py::init<int, std::vector<std::size_t>, std::vector<double>, std::vector<double>>(), py::arg("spatial_dim"),
             py::arg("counts"), py::arg("spacing"), py::arg("origin"))
        .def_static("isotropic", &GridSpec::isotropic, py::arg("spatial_dim"), py::arg("spatial_count"),
                    py::arg("spatial_spacing"), py::arg("spatial_origin"), py::arg("t_count"), py::arg("t_spacing"),
                    py::arg("t_origin"))
        .def_property_readonly("spatial_dim", &GridSpec::spatial_dim)
        .def_property_readonly("shape", [](const GridSpec& g) { return std::vector<std::size_t>(g.counts().begin(), g.counts().end()); })
        .def_property_readonly("spacing", [](const GridSpec& g) { return std::vector<double>(g.spacings().begin(), g.spacings().end()); })
        .def_property_readonly("origin", [](const GridSpec& g) { return std::vector<double>(g.origins().begin(), g.origins().end()); })
        .def_property_readonly("max_spacing", &GridSpec::max_spacing)
        .def("coords", [](const GridSpec& g, int axis) {
            std::vector<double> c(g.count(axis));
            for (std::size_t i = 0; i < c.size(); ++i) c[i] = g.coord(axis, i);
            return c;
        })
        .def("__eq__", [](const GridSpec& a, const GridSpec& b) { return a == b; })
        .def("__repr__", [](const GridSpec& g) {
            std::string s = "Grid(m=" + std::to_string(g.spatial_dim()) + ", shape=(";
            for (int a = 0; a < g.axes(); ++a) s += (a ? ", " : "") + std::to_string(g.count(a));
            return s + "))";
        });

    py::class_<ScalarField>(m, "Field")
        .def(py::init(&from_array), py::arg("grid"), py::arg("values"))
        .def(py::init([](const GridSpec& g) { return ScalarField(g); }), py::arg("grid"))
        .def_property_readonly("grid", &ScalarField::grid)
        .def("numpy", &to_array, "Copy of the samples with shape grid.shape (t last)")
        .def("__add__", [](const ScalarField& a, const ScalarField& b) { return add(a, b); })
        .def("__sub__", [](const ScalarField& a, const ScalarField& b) { return subtract(a, b); })
        .def("__mul__", [](const ScalarField& a, double s) { return scale(a, s); })
        .def("__rmul__", [](const ScalarField& a, double s) { return scale(a, s); });

    m.def("set_threads", &set_thread_count, py::arg("threads"));
    m.def("l2_norm", py::overload_cast<const ScalarField&>(&l2_norm));
    m.def("linf_norm", py::overload_cast<const ScalarField&>(&linf_norm));
    m.def(
        "relative_l2_error",
        [](const ScalarField& a, const ScalarField& b, std::size_t margin) {
            return relative_l2_error(a, b, interior_box(a.grid(), margin));
        },
        py::arg("a"), py::arg("b"), py::arg("margin") = 0, "||a - b|| / ||b|| over cells at least margin from the edge");
    m.def("partial_t", &partial_t);
    m.def("cumulative_t_integral", &cumulative_t_integral);

    m.def(
        "bump",
        [](const GridSpec& grid, std::vector<double> center, double radius, double amplitude, bool gaussian) {
            const auto kind = gaussian ? PhantomKind::gaussian : PhantomKind::bump;
            return render_phantom(PhantomSpec::single(kind, std::move(center), radius, amplitude), grid);
        },
        py::arg("grid"), py::arg("center"), py::arg("radius") = 1.0, py::arg("amplitude") = 1.0,
        py::arg("gaussian") = false, "Render a round bump (or gaussian) phantom");
    m.def(
        "bump_dt",
        [](const GridSpec& grid, std::vector<double> center, double radius, double amplitude) {
            return render_phantom_dt(PhantomSpec::single(PhantomKind::bump, std::move(center), radius, amplitude), grid);
        },
        py::arg("grid"), py::arg("center"), py::arg("radius") = 1.0, py::arg("amplitude") = 1.0);

    m.def(
        "forward",
        [](const ScalarField& f, double phi, int order, bool smoothing, bool flip_cone, bool surface_measure,
           bool windowed) {
            return forward_crt(f, ConeParams(phi), quadrature(order, smoothing),
                               forward_options(flip_cone, surface_measure, windowed));
        },
        py::arg("f"), py::arg("phi") = kQuarter, py::arg("order") = 1, py::arg("smoothing") = true,
        py::arg("flip_cone") = false, py::arg("surface_measure") = false, py::arg("windowed") = false,
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "forward_weighted",
        [](const ScalarField& f, double phi, int order, bool windowed) {
            return weighted_forward_crt(f, ConeParams(phi), quadrature(order, true), forward_options(false, false, windowed));
        },
        py::arg("f"), py::arg("phi") = kQuarter, py::arg("order") = 1, py::arg("windowed") = false,
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "forward_spectral",
        [](const ScalarField& f, double phi, std::optional<double> eps, double padding) {
            SpectralOptions o;
            o.padding.assign(static_cast<std::size_t>(f.grid().axes()), padding);
            return spectral_forward_crt(f, ConeParams(phi), eps.value_or(default_epsilon(f.grid())), o).field;
        },
        py::arg("f"), py::arg("phi") = kQuarter, py::arg("eps") = py::none(), py::arg("padding") = 2.0,
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "box", [](const ScalarField& f, double phi, int k) { return apply_box(f, ConeParams(phi), k); }, py::arg("f"),
        py::arg("phi") = kQuarter, py::arg("k") = 1);
    m.def(
        "invert",
        [](const ScalarField& g, double phi, std::optional<int> k) {
            const int mm = g.grid().spatial_dim();
            const int kk = k.value_or(order_for(mm));
            const ConeParams cone(phi);
            return parity_for(mm) == Parity::even ? invert_even(g, cone, kk) : invert_odd(g, cone, kk);
        },
        py::arg("g"), py::arg("phi") = kQuarter, py::arg("k") = py::none(), py::call_guard<py::gil_scoped_release>(),
        "Recover f from forward data; even or odd path chosen from the spatial dimension");
    m.def(
        "check_range",
        [](const ScalarField& g, double phi, std::optional<int> k) {
            const int mm = g.grid().spatial_dim();
            const auto r = check_range(g, ConeParams(phi), parity_for(mm), k.value_or(order_for(mm)),
                                       RangeTolerances::defaults_for(g.grid()));
            py::dict d;
            d["parity"] = to_string(r.parity);
            d["k"] = r.k;
            d["cond1_residual"] = r.cond1_residual;
            d["cond2_residual"] = r.cond2_residual;
            d["cond3_t0"] = r.cond3_t0 ? py::cast(*r.cond3_t0) : py::none();
            d["cond1_pass"] = r.cond1_pass;
            d["cond2_pass"] = r.cond2_pass;
            d["cond3_pass"] = r.cond3_pass;
            d["all_pass"] = r.all_pass();
            d["tolerance"] = r.tolerances.support;
            d["trusted_fraction"] = r.trusted_fraction;
            return d;
        },
        py::arg("g"), py::arg("phi") = kQuarter, py::arg("k") = py::none());

    m.def("alpha", &alpha, py::arg("m"));
    m.def("beta", &beta, py::arg("m"));
    m.def("even_constant", [](int k, double phi) { return even_constant(k, ConeParams(phi)); }, py::arg("k"),
          py::arg("phi") = kQuarter);
    m.def("odd_constant", [](int k, double phi) { return odd_constant(k, ConeParams(phi)); }, py::arg("k"),
          py::arg("phi") = kQuarter);
    m.def(
        "symbol_D",
        [](std::vector<double> omega, complex sigma, double phi, double eps) {
            return SymbolEvaluator(static_cast<int>(omega.size()), ConeParams(phi), eps).symbol_D(omega, sigma);
        },
        py::arg("omega"), py::arg("sigma"), py::arg("phi") = kQuarter, py::arg("eps") = 0.1);
    m.def("oracle_symbol", &oracle_symbol, py::arg("omega"), py::arg("tau"), py::arg("m"), py::arg("rel_tol") = 1e-13);

    m.def("read_crtf", &read_crtf, py::arg("path"));
    m.def("write_crtf", &write_crtf, py::arg("path"), py::arg("f"));
}
