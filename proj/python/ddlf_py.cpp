#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ddlf/harness.hpp"

namespace py = pybind11;

namespace {

ddlf::ExperimentConfig config_from(const py::dict& kwargs, bool paper_scale) {
  auto cfg = paper_scale ? ddlf::ExperimentConfig::paper_scale() : ddlf::ExperimentConfig{};
  for (const auto& [k, v] : kwargs) {
    std::string value;
    if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
      for (const auto& item : v) value += (value.empty() ? "" : ",") + py::str(item).cast<std::string>();
    } else if (py::isinstance<py::bool_>(v)) {
      value = v.cast<bool>() ? "true" : "false";
    } else {
      value = py::str(v).cast<std::string>();
    }
    ddlf::apply_config_value(cfg, k.cast<std::string>(), value);
  }
  cfg.validate();
  return cfg;
}

py::dict placement_dict(const ddlf::PilotPlacement& pl) {
  auto cells = [](const std::vector<ddlf::CellIndex>& v) {
    std::vector<std::pair<int, int>> out;
    for (const auto& c : v) out.emplace_back(c.m, c.n);
    return out;
  };
  py::dict d;
  d["shape"] = std::make_pair(pl.M, pl.N);
  d["data_shape"] = std::make_pair(pl.Mp, pl.Np);
  d["pilots"] = cells(pl.pilot_indices);
  d["data"] = cells(pl.data_indices);
  return d;
}

}  // namespace

PYBIND11_MODULE(_ddlf, m) {
  m.doc() = "Doubly dispersive link-level simulation core";

  py::register_exception<ddlf::Error>(m, "Error", PyExc_RuntimeError);

  py::class_<ddlf::GaborGrid>(m, "GaborGrid")
      .def(py::init(&ddlf::GaborGrid::make), py::arg("M"), py::arg("N"), py::arg("subcarrier_spacing"),
           py::arg("tf") = 1.25)
      .def_readonly("M", &ddlf::GaborGrid::M)
      .def_readonly("N", &ddlf::GaborGrid::N)
      .def_readonly("a", &ddlf::GaborGrid::a)
      .def_readonly("b", &ddlf::GaborGrid::b)
      .def_readonly("L", &ddlf::GaborGrid::L)
      .def_readonly("fs", &ddlf::GaborGrid::fs)
      .def_property_readonly("T", &ddlf::GaborGrid::T)
      .def_property_readonly("F", &ddlf::GaborGrid::F)
      .def_property_readonly("tf", &ddlf::GaborGrid::tf);

  m.def("default_pulse", [](const ddlf::GaborGrid& g, double spread) {
    return ddlf::default_pulse(g, spread).samples;
  }, py::arg("grid"), py::arg("spread") = 1.0);
  m.def("synthesize", [](const ddlf::Frame& x, const ddlf::Signal& pulse, const ddlf::GaborGrid& g) {
    return ddlf::synthesize(x, ddlf::Pulse{pulse}, g);
  });
  m.def("analyze", [](const ddlf::Signal& f, const ddlf::Signal& pulse, const ddlf::GaborGrid& g) {
    return ddlf::analyze(f, ddlf::Pulse{pulse}, g);
  });
  m.def("cross_ambiguity", [](const ddlf::Signal& gamma, const ddlf::Signal& g, double tau, double nu,
                              const ddlf::GaborGrid& grid) {
    return ddlf::cross_ambiguity(ddlf::Pulse{gamma}, ddlf::Pulse{g}, tau, nu, grid);
  });

  m.def("dsft2d", &ddlf::dsft2d);
  m.def("fwht", &ddlf::fwht);
  m.def("precode", [](const ddlf::Frame& X, const std::string& kind, int subframes, std::uint64_t seed) {
    return ddlf::Precoder(ddlf::parse_precoder_kind(kind), static_cast<int>(X.rows()), static_cast<int>(X.cols()),
                          subframes, seed).encode(X);
  }, py::arg("X"), py::arg("kind"), py::arg("subframes") = 1, py::arg("seed") = 0);

  m.def("accordion_placement", [](int Mp, int Np, int Pp) {
    return placement_dict(ddlf::accordion_placement(Mp, Np, Pp));
  }, py::arg("data_rows"), py::arg("data_cols"), py::arg("pilots_per_row"));
  m.def("lattice_min_distance_sq", &ddlf::lattice_min_distance_sq);
  m.def("optimal_shift", &ddlf::optimal_shift);

  m.def("relaxation_delta", [](double sigma2, double sigma_z2, const ddlf::CVector& pilots) {
    return ddlf::relaxation_delta(sigma2, sigma_z2, ddlf::PilotSequence{pilots});
  });

  m.def("conv_code_encode", &ddlf::conv_code_encode);
  m.def("conv_code_decode_hard", &ddlf::conv_code_decode_hard);

  m.def("default_config", [](bool paper_scale) {
    std::ostringstream s;
    ddlf::write_config(s, paper_scale ? ddlf::ExperimentConfig::paper_scale() : ddlf::ExperimentConfig{});
    return s.str();
  }, py::arg("paper_scale") = false);

  m.def("run_sweep", [](const std::string& axis, const std::vector<double>& values, bool paper_scale,
                        const py::kwargs& kwargs) {
    const auto cfg = config_from(kwargs, paper_scale);
    std::vector<ddlf::ResultRow> rows;
    {
      py::gil_scoped_release release;
      rows = ddlf::run_sweep(cfg, ddlf::parse_sweep_axis(axis), values);
    }
    std::ostringstream s;
    ddlf::write_results_csv(s, rows);
    return s.str();
  }, py::arg("axis"), py::arg("values"), py::arg("paper_scale") = false,
     "Runs a sweep and returns the result table as CSV text. Keyword arguments are config keys "
     "(underscores stand for dashes).");
}
