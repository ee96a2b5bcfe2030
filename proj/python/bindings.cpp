#include "ramp/audits.hpp"
#include "ramp/config.hpp"
#include "ramp/maze.hpp"
#include "ramp/metrics.hpp"
#include "ramp/oracle.hpp"
#include "ramp/trainer.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace ramp;

namespace {

Dist to_dist(const Vec& p) { return Dist(p, 1e-9); }

py::dict log_dict(const EpochLog& l) {
  py::dict d;
  d["epoch"] = l.epoch;
  d["env_steps"] = l.env_steps;
  d["coverage_pct"] = l.coverage_pct;
  d["entropy_est"] = l.entropy_est;
  d["mean_r_int"] = l.mean_r_int;
  d["rm_loss"] = l.rm_loss;
  d["q1_loss"] = l.q1_loss;
  d["q2_loss"] = l.q2_loss;
  d["actor_loss"] = l.actor_loss;
  d["lambda"] = l.lambda;
  d["wall_s"] = l.wall_s;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ramp, m) {
  m.doc() = "Present-versus-past exploration with KL and Wasserstein intrinsic rewards";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<RampConfig>(m, "Config")
      .def_static("parse", &parse_config, py::arg("text"), py::arg("origin") = "config")
      .def_static("load", &load_config, py::arg("path"))
      .def("to_json", &serialize_config)
      .def_property(
          "variant", [](const RampConfig& c) { return to_string(c.variant); },
          [](RampConfig& c, const std::string& v) {
            if (v != "kl" && v != "w") throw py::value_error("variant must be 'kl' or 'w'");
            c.variant = v == "kl" ? Variant::kl : Variant::w;
          })
      .def_readwrite("seed", &RampConfig::seed)
      .def_property_readonly("total_steps", &RampConfig::total_steps)
      .def("validate", &RampConfig::validate)
      .def("__eq__", [](const RampConfig& a, const RampConfig& b) { return a == b; })
      .def("__repr__", &serialize_config);

  m.def("epoch_csv_header", &epoch_csv_header);
  m.def(
      "run_training",
      [](const RampConfig& cfg, const std::string& out_dir, const py::object& on_epoch) {
        RunOptions opts;
        opts.out_dir = out_dir;
        if (!on_epoch.is_none())
          opts.on_epoch = [on_epoch](const EpochLog& l, double wall) { on_epoch(log_dict(l), wall); };
        py::list out;
        for (const auto& l : run_training(cfg, opts)) out.append(log_dict(l));
        return out;
      },
      py::arg("config"), py::arg("out_dir") = "", py::arg("on_epoch") = py::none());

  py::class_<Trainer>(m, "Trainer")
      .def(py::init<const RampConfig&>())
      .def("run_epoch", [](Trainer& t) { return log_dict(t.run_epoch()); })
      .def("intrinsic", &Trainer::intrinsic)
      .def_property_readonly("epoch", &Trainer::epoch)
      .def_property_readonly("env_steps", &Trainer::env_steps)
      .def_property_readonly("coverage", [](const Trainer& t) { return t.coverage().value(); })
      .def("past_states",
           [](const Trainer& t) {
             Mat out(t.env().state_dim(), static_cast<Eigen::Index>(t.past().size()));
             for (std::size_t i = 0; i < t.past().size(); ++i) out.col(static_cast<Eigen::Index>(i)) = t.past()[i].s;
             return out;
           })
      .def("scatter", [](const Trainer& t, int max_points) {
        std::ostringstream os;
        t.write_scatter(os, max_points);
        return os.str();
      });

  py::class_<MazeSpec>(m, "Maze")
      .def_static("named", &maze_by_name)
      .def_static("parse",
                  [](const std::string& text, const std::string& name) {
                    std::istringstream in(text);
                    return parse_maze(in, name);
                  },
                  py::arg("text"), py::arg("name") = "maze")
      .def("serialize", &serialize_maze)
      .def("step",
           [](const MazeSpec& spec, const Vec& s, const Vec& a) {
             const StepResult r = maze_step(spec, s, a);
             return py::make_tuple(r.s_next, r.r_ext);
           })
      .def("in_free_space", [](const MazeSpec& spec, const Vec& p) { return spec.in_free_space(Point2(p(0), p(1))); })
      .def_property_readonly("start", [](const MazeSpec& s) { return Vec(s.start); })
      .def_property_readonly("goal", [](const MazeSpec& s) { return Vec(s.goal); })
      .def_readonly("dt", &MazeSpec::dt)
      .def_readonly("horizon", &MazeSpec::horizon)
      .def_property_readonly("walls", [](const MazeSpec& s) {
        std::vector<std::array<double, 4>> out;
        for (const auto& w : s.walls) out.push_back({w.a.x(), w.a.y(), w.b.x(), w.b.y()});
        return out;
      });

  m.def(
      "coverage",
      [](const Mat& states, int resolution) {
        CoverageGrid g(GridSpec::square(-1.0, 1.0, resolution));
        for (Eigen::Index j = 0; j < states.cols(); ++j) g.update(states.col(j));
        return g.value();
      },
      py::arg("states"), py::arg("resolution") = 50, "Percent of grid cells over [-1,1]^2 hit by the columns of states.");
  m.def(
      "histogram_entropy",
      [](const Mat& states, int resolution) { return histogram_entropy(states, GridSpec::square(-1.0, 1.0, resolution)); },
      py::arg("states"), py::arg("resolution") = 50);

  py::module_ o = m.def_submodule("oracle", "Exact finite-state reference computations");
  o.def("entropy", [](const Vec& p) { return oracle::exact_entropy(to_dist(p)); });
  o.def("kl", [](const Vec& p, const Vec& q) { return oracle::exact_kl(to_dist(p), to_dist(q)).value; });
  o.def("mixture", [](const Vec& rho, const Vec& mu, double beta) {
    return oracle::mixture(to_dist(rho), to_dist(mu), beta).probs();
  });
  o.def("kl_log_ratio", [](const Vec& rho, const Vec& mu, double beta) {
    return oracle::kl_log_ratio(to_dist(rho), to_dist(mu), beta);
  });
  o.def("theorem1", [](const Vec& rho, const Vec& mu, double beta) {
    const auto d = oracle::theorem1_decomposition(to_dist(rho), to_dist(mu), beta);
    return py::make_tuple(d.delta_h, d.lower_bound, d.residual);
  });
  o.def("w1_chain", [](const Vec& p, const Vec& q) {
    const auto r = oracle::w1_exact(to_dist(p), to_dist(q), oracle::MetricGraph::chain(static_cast<int>(p.size())));
    return py::make_tuple(r.value, r.potential);
  });
  o.def("past_tag_weights", &oracle::past_tag_weights, py::arg("beta"), py::arg("slots"), py::arg("steps_per_epoch"),
        py::arg("n_epochs"));

  m.def(
      "verify",
      [](const std::string& only, std::uint64_t seed) {
        audit::AuditOptions opt;
        opt.seed = seed;
        py::list out;
        for (const auto& r : audit::run_audits(opt, only)) {
          py::dict d;
          d["name"] = r.name;
          d["passed"] = r.passed;
          d["summary"] = r.summary;
          d["counterexamples"] = r.counterexamples;
          out.append(d);
        }
        return out;
      },
      py::arg("only") = "", py::arg("seed") = 7);
}
