#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mouseauth/error.hpp"
#include "mouseauth/eval.hpp"
#include "mouseauth/ingest.hpp"
#include "mouseauth/kinematics.hpp"
#include "mouseauth/mau.hpp"
#include "mouseauth/model.hpp"
#include "mouseauth/sufficiency.hpp"
#include "mouseauth/synth.hpp"

namespace py = pybind11;
namespace ma = mouseauth;

namespace {

ma::VelocitySequence as_sequence(std::vector<double> v, double dt) {
  return {"python", "s0", dt, std::move(v)};
}

ma::ScoredSet as_scored(std::vector<double> scores, std::vector<int> labels) {
  return {std::move(scores), std::move(labels)};
}

std::vector<ma::Mau> as_maus(const std::vector<std::vector<double>>& windows) {
  std::vector<ma::Mau> out;
  out.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) out.push_back({"python", "s0", i, windows[i]});
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Mouse-dynamics authentication: sufficiency, ApEn, LT-AMouse model, metrics";

  static py::exception<ma::Error> error(m, "MouseAuthError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ma::Error& e) {
      const std::string msg = std::string(ma::error_code_name(e.code())) + ": " + e.what();
      PyErr_SetString(error.ptr(), msg.c_str());
    }
  });

  py::class_<ma::SchemaMap>(m, "SchemaMap")
      .def(py::init<>())
      .def_readwrite("timestamp_col", &ma::SchemaMap::timestamp_col)
      .def_readwrite("x_col", &ma::SchemaMap::x_col)
      .def_readwrite("y_col", &ma::SchemaMap::y_col)
      .def_readwrite("state_col", &ma::SchemaMap::state_col)
      .def_readwrite("delimiter", &ma::SchemaMap::delimiter)
      .def_readwrite("has_header", &ma::SchemaMap::has_header)
      .def_readwrite("timestamp_scale", &ma::SchemaMap::timestamp_scale)
      .def_static("preset", &ma::SchemaMap::preset);

  m.def(
      "parse_velocity",
      [](const std::string& content, const ma::SchemaMap& schema, double dt) {
        auto parsed = ma::parse_session(content, schema, "python", "s0");
        return py::make_tuple(ma::velocity_sequence(parsed.session, dt).v,
                              parsed.report.dropped());
      },
      py::arg("content"), py::arg("schema") = ma::SchemaMap{}, py::arg("dt") = 0.01,
      "Parse session text and return (speeds, dropped_rows).");

  m.def("silverman_bandwidth",
        [](const std::vector<double>& s) { return ma::silverman_bandwidth(s); });
  m.def(
      "kde",
      [](const std::vector<double>& samples, const std::vector<double>& grid, double h) {
        return ma::kde(samples, grid, h).density;
      },
      py::arg("samples"), py::arg("grid"), py::arg("bandwidth"));
  m.def(
      "kl_divergence",
      [](const std::vector<double>& grid, const std::vector<double>& p,
         const std::vector<double>& q) {
        return ma::kl_divergence({grid, p, 1.0, 0}, {grid, q, 1.0, 0});
      },
      py::arg("grid"), py::arg("p"), py::arg("q"));
  m.def(
      "sufficiency_point",
      [](std::vector<double> v, std::size_t step_m, double eps1, double eps2) {
        const auto r = ma::sufficiency_point(as_sequence(std::move(v), 0.01), step_m, eps1, eps2);
        std::vector<std::pair<std::size_t, double>> traj;
        for (const auto& p : r.kl_trajectory) traj.emplace_back(p.n, p.kl);
        py::dict out;
        out["n_hat"] = r.n_hat ? py::cast(*r.n_hat) : py::none();
        out["kl_trajectory"] = traj;
        return out;
      },
      py::arg("speeds"), py::arg("step_m") = 200, py::arg("eps1") = 1e-4,
      py::arg("eps2") = 1e-6);

  m.def("chebyshev", [](const std::vector<double>& a, const std::vector<double>& b) {
    return ma::chebyshev(a, b);
  });
  m.def(
      "apen",
      [](const std::vector<double>& seq, std::size_t m, double r) { return ma::apen(seq, m, r); },
      py::arg("seq"), py::arg("m"), py::arg("r"));
  m.def(
      "apen_profile",
      [](std::vector<double> v, std::vector<std::size_t> candidates, double r_factor,
         double slope_threshold, std::size_t cap) {
        ma::ApEnOptions options;
        options.candidates = std::move(candidates);
        options.r_factor = r_factor;
        options.slope_threshold = slope_threshold;
        options.cap = cap;
        const auto p = ma::apen_profile(as_sequence(std::move(v), 0.01), options);
        py::dict out;
        out["candidate_lengths"] = p.candidate_lengths;
        out["apen_values"] = p.apen_values;
        out["slopes"] = p.slopes;
        out["tolerance_r"] = p.tolerance_r;
        out["selected_length"] = p.selected_length;
        out["fallback"] = p.fallback;
        return out;
      },
      py::arg("speeds"), py::arg("candidates") = std::vector<std::size_t>{},
      py::arg("r_factor") = 0.2, py::arg("slope_threshold") = 1e-4, py::arg("cap") = 5000);
  m.def(
      "segment",
      [](std::vector<double> v, std::size_t length) {
        std::vector<std::vector<double>> out;
        for (auto& mau : ma::segment(as_sequence(std::move(v), 0.01), length)) {
          out.push_back(std::move(mau.values));
        }
        return out;
      },
      py::arg("speeds"), py::arg("length"));

  m.def(
      "generate",
      [](const std::string& kind, std::size_t length, std::uint64_t seed, double mean,
         double std_dev, double phi, double sigma, double amplitude, double period,
         double noise_std) {
        ma::SynthSpec s;
        s.kind = ma::parse_synth_kind(kind);
        s.length = length;
        s.seed = seed;
        s.mean = mean;
        s.std = std_dev;
        s.phi = phi;
        s.sigma = sigma;
        s.amplitude = amplitude;
        s.period = period;
        s.noise_std = noise_std;
        return ma::generate(s).v;
      },
      py::arg("kind"), py::arg("length"), py::arg("seed") = 0, py::arg("mean") = 20.0,
      py::arg("std") = 1.0, py::arg("phi") = 0.5, py::arg("sigma") = 1.0,
      py::arg("amplitude") = 5.0, py::arg("period") = 50.0, py::arg("noise_std") = 0.0);

  py::class_<ma::ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("input_length", &ma::ModelConfig::input_length)
      .def_readwrite("conv_channels", &ma::ModelConfig::conv_channels)
      .def_readwrite("kernel_size", &ma::ModelConfig::kernel_size)
      .def_readwrite("res_blocks", &ma::ModelConfig::res_blocks)
      .def_readwrite("res_kernel", &ma::ModelConfig::res_kernel)
      .def_readwrite("gru_hidden", &ma::ModelConfig::gru_hidden)
      .def_property(
          "input_scaling",
          [](const ma::ModelConfig& c) { return std::string(ma::input_scaling_name(c.input_scaling)); },
          [](ma::ModelConfig& c, const std::string& s) { c.input_scaling = ma::parse_input_scaling(s); })
      .def_readwrite("input_shift", &ma::ModelConfig::input_shift)
      .def_readwrite("input_scale", &ma::ModelConfig::input_scale)
      .def_readwrite("seed", &ma::ModelConfig::seed);

  py::class_<ma::TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &ma::TrainConfig::learning_rate)
      .def_readwrite("beta1", &ma::TrainConfig::beta1)
      .def_readwrite("beta2", &ma::TrainConfig::beta2)
      .def_readwrite("epsilon", &ma::TrainConfig::epsilon)
      .def_readwrite("batch_size", &ma::TrainConfig::batch_size)
      .def_readwrite("epochs", &ma::TrainConfig::epochs)
      .def_readwrite("pos_neg_ratio", &ma::TrainConfig::pos_neg_ratio)
      .def_readwrite("grad_clip_norm", &ma::TrainConfig::grad_clip_norm)
      .def_readwrite("seed", &ma::TrainConfig::seed);

  py::class_<ma::ModelParams>(m, "ModelParams")
      .def_property_readonly("config", &ma::ModelParams::config)
      .def("values", [](const ma::ModelParams& p) {
        return std::vector<double>(p.values().begin(), p.values().end());
      });

  m.def("init_params", &ma::init_params);
  m.def(
      "train",
      [](const std::vector<std::vector<double>>& windows, const std::vector<int>& labels,
         const ma::ModelConfig& mcfg, const ma::TrainConfig& tcfg) {
        auto maus = as_maus(windows);
        ma::TrainResult result = [&] {
          py::gil_scoped_release release;
          return ma::train(maus, labels, mcfg, tcfg);
        }();
        return py::make_tuple(std::move(result.params), result.loss_history);
      },
      py::arg("windows"), py::arg("labels"), py::arg("model_config"),
      py::arg("train_config"));
  m.def("predict", [](const ma::ModelParams& p, const std::vector<double>& window) {
    return ma::predict(p, window);
  });
  m.def("forward", [](const ma::ModelParams& p, const std::vector<std::vector<double>>& w) {
    return ma::forward(p, as_maus(w)).probs;
  });
  m.def("cross_entropy", [](const std::vector<std::vector<double>>& probs,
                            const std::vector<int>& labels) {
    return ma::cross_entropy(probs, labels);
  });

  m.def("f1_score",
        [](std::vector<double> s, std::vector<int> y, double threshold) {
          return ma::f1_score(as_scored(std::move(s), std::move(y)), threshold);
        },
        py::arg("scores"), py::arg("labels"), py::arg("threshold") = 0.5);
  m.def("roc_auc", [](std::vector<double> s, std::vector<int> y) {
    return ma::roc_auc(as_scored(std::move(s), std::move(y)));
  });
  m.def("eer", [](std::vector<double> s, std::vector<int> y) {
    const auto e = ma::eer(as_scored(std::move(s), std::move(y)));
    return py::make_tuple(e.eer, e.threshold);
  });
  m.def("dsr", [](const std::vector<double>& s, double threshold) { return ma::dsr(s, threshold); },
        py::arg("attack_scores"), py::arg("threshold") = 0.5);
}
