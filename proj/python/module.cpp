#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "ipslab/braco_resem.hpp"
#include "ipslab/cli_io.hpp"
#include "ipslab/error.hpp"
#include "ipslab/oracle.hpp"
#include "ipslab/pde_solvers.hpp"
#include "ipslab/wf_renorm.hpp"

namespace py = pybind11;
using namespace ipslab;

namespace {

CatalyzingFn grid_values(const std::vector<double>& v) {
  if (v.size() < 2) throw py::value_error("need at least two grid values");
  GridFn1D g(v.size() - 1);
  g.v = v;
  return CatalyzingFn(g);
}

UOptions u_options(std::size_t paths, std::uint64_t seed, double dt) {
  UOptions o;
  o.paths = paths;
  o.seed = seed;
  o.dt = dt;
  return o;
}

py::tuple fn_pair(const CatalyzingFn& f) { return py::make_tuple(f.f.v, f.se); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Interacting particle system and renormalization toolkit";

  py::register_exception<Error>(m, "IpslabError", PyExc_ValueError);

  m.def("beta_moment", &beta_moment, py::arg("x"), py::arg("gamma"), py::arg("n"));
  m.def("u_gamma_constant", &u_gamma_constant, py::arg("r"), py::arg("gamma"));
  m.def("maximal_bound", &maximal_bound, py::arg("b"), py::arg("c"), py::arg("d"), py::arg("t"));
  m.def("psi_mean", &psi_mean, py::arg("m"), py::arg("gamma"));
  m.def("kyy_moment", &kyy_moment, py::arg("x"), py::arg("gamma"));

  m.def(
      "contact_duality_gap",
      [](int sites, double right, double left, double delta, double t) {
        const auto lat = GroupLattice::torus(1, sites);
        return contact_duality_gap(drift_kernel_1d(lat, right, left), delta, t);
      },
      py::arg("sites"), py::arg("right"), py::arg("left"), py::arg("delta"), py::arg("t"),
      "Largest duality gap of the contact process on a ring, computed exactly.");

  m.def(
      "u_gamma_apply",
      [](const std::vector<double>& p, double gamma, std::size_t paths, std::uint64_t seed, double dt) {
        return fn_pair(u_gamma_apply(grid_values(p), gamma, u_options(paths, seed, dt)));
      },
      py::arg("p"), py::arg("gamma"), py::arg("paths") = 20000, py::arg("seed") = 1, py::arg("dt") = 0.0,
      "Monte-Carlo log-Laplace operator on grid values; returns (values, standard errors).");

  m.def(
      "iterate_renorm",
      [](const std::vector<double>& p0, double gamma, int n, std::size_t paths, std::uint64_t seed) {
        std::vector<std::vector<double>> out;
        for (const auto& it : iterate_renorm(grid_values(p0), GammaSchedule::constant_gamma(gamma), n,
                                             u_options(paths, seed, 0.0)))
          out.push_back(it.f.v);
        return out;
      },
      py::arg("p0"), py::arg("gamma"), py::arg("n"), py::arg("paths") = 20000, py::arg("seed") = 1);

  m.def(
      "pstar",
      [](double alpha, int l, int r, std::size_t grid) {
        ShootOptions o;
        o.m = grid;
        const auto s = pstar_shoot(alpha, l, r, o);
        py::dict d;
        d["p"] = s.p.f.v;
        d["slope"] = s.slope;
        d["residual"] = s.residual;
        d["boundary_left"] = s.boundary_left;
        d["boundary_right"] = s.boundary_right;
        return d;
      },
      py::arg("alpha"), py::arg("l"), py::arg("r"), py::arg("m") = 40);

  m.def(
      "cauchy",
      [](const std::vector<double>& f, double alpha, double t_end) {
        GridFn1D g(f.size() - 1);
        g.v = f;
        return cauchy_solve(g, alpha, t_end).u.back().v;
      },
      py::arg("f"), py::arg("alpha"), py::arg("t_end"));

  m.def(
      "binsplit",
      [](double alpha, double x0, double T, std::size_t reps, std::uint64_t seed) {
        const auto b = binsplit_simulate(alpha, x0, T, reps, seed);
        return py::make_tuple(b.interior_or_one.mean, b.interior_or_one.se);
      },
      py::arg("alpha"), py::arg("x0"), py::arg("T"), py::arg("reps") = 2000, py::arg("seed") = 1);

  m.def("subcommands", &subcommands);
  m.def(
      "run",
      [](const std::string& sub, const std::map<std::string, std::string>& config, const std::string& out_dir) {
        Config c(subcommand_keys(sub));
        for (const auto& [k, v] : config) c.set(k, v);
        std::vector<std::string> lines;
        for (const auto& r : run(sub, c, {out_dir, nullptr})) lines.push_back(r.to_json_line());
        return lines;
      },
      py::arg("subcommand"), py::arg("config"), py::arg("out_dir") = ".",
      "Runs a CLI subcommand and returns its JSON-lines records.");
}
