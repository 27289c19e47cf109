// Python bindings for the pseudodice core.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pseudodice/bitseq.hpp"
#include "pseudodice/constdigits.hpp"
#include "pseudodice/error.hpp"
#include "pseudodice/harness.hpp"
#include "pseudodice/mlp.hpp"
#include "pseudodice/mtprng.hpp"
#include "pseudodice/stats.hpp"

namespace py = pybind11;
namespace pd = pseudodice;

namespace {

template <typename T>
py::array_t<T> to_array(std::span<const T> values) {
  py::array_t<T> out(static_cast<py::ssize_t>(values.size()));
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

std::vector<std::uint8_t> from_array(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
  return {a.data(), a.data() + a.size()};
}

std::string digit_text(const pd::DigitStream& s) {
  std::string out;
  out.reserve(s.count());
  for (auto d : s.digits()) out += static_cast<char>('0' + d);
  return out;
}

py::dict normality_dict(const pd::NormalityReport& r) {
  py::dict d;
  d["n"] = r.n;
  d["length"] = r.length;
  d["windows"] = r.windows;
  d["k"] = r.k;
  d["statistic"] = r.statistic;
  d["bound"] = r.bound;
  d["violated"] = r.violated;
  d["counts"] = r.counts;
  d["frequencies"] = r.frequencies;
  return d;
}

}  // namespace

PYBIND11_MODULE(_pseudodice, m) {
  m.doc() = "Next-bit predictability and normality tests for pseudo-random 0-1 sequences";

  static py::exception<pd::Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<pd::ConfigError> config_error(m, "ConfigError", error.ptr());
  static py::exception<pd::CapacityError> capacity_error(m, "CapacityError", error.ptr());
  static py::exception<pd::DivergenceError> divergence_error(m, "DivergenceError", error.ptr());
  static py::exception<pd::ValidationError> validation_error(m, "ValidationError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const pd::BoundsError& e) {
      PyErr_SetString(PyExc_IndexError, e.what());
    } catch (const pd::ConfigError& e) {
      config_error(e.what());
    } catch (const pd::CapacityError& e) {
      capacity_error(e.what());
    } catch (const pd::DivergenceError& e) {
      divergence_error(e.what());
    } catch (const pd::ValidationError& e) {
      validation_error(e.what());
    } catch (const pd::Error& e) {
      error(e.what());
    }
  });

  // digits
  py::class_<pd::DigitStream>(m, "DigitStream")
      .def_property_readonly("constant", [](const pd::DigitStream& s) { return std::string(pd::constant_name(s.constant())); })
      .def_property_readonly("count", &pd::DigitStream::count)
      .def("at", &pd::DigitStream::at, py::arg("position"), "1-indexed digit")
      .def("text", &digit_text)
      .def("digits", [](const pd::DigitStream& s) { return to_array(s.digits()); })
      .def("__len__", &pd::DigitStream::count)
      .def("__eq__", [](const pd::DigitStream& a, const pd::DigitStream& b) { return a == b; });

  m.def(
      "gen_digits",
      [](const std::string& constant, std::size_t n, std::size_t max_digits) {
        py::gil_scoped_release release;
        return pd::gen_digits(pd::parse_constant(constant), n, max_digits);
      },
      py::arg("constant"), py::arg("n"), py::arg("max_digits") = pd::kDefaultMaxDigits,
      "First n fractional digits of pi, e or sqrt2");
  m.def(
      "gen_digits_alt",
      [](const std::string& constant, std::size_t n) {
        py::gil_scoped_release release;
        return pd::gen_digits_alt(pd::parse_constant(constant), n);
      },
      py::arg("constant"), py::arg("n"));

  // bits
  py::class_<pd::BitSequence>(m, "BitSequence")
      .def(py::init([](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& bits,
                       const std::string& label) {
             return pd::BitSequence(from_array(bits), {pd::BitSource::Kind::Synthetic, label});
           }),
           py::arg("bits"), py::arg("label") = "synthetic:python")
      .def_property_readonly("count", &pd::BitSequence::count)
      .def_property_readonly("label", [](const pd::BitSequence& b) { return b.source().label; })
      .def("at", &pd::BitSequence::at, py::arg("position"), "1-indexed bit")
      .def("bits", [](const pd::BitSequence& b) { return to_array(b.bits()); })
      .def("ones_frequency", [](const pd::BitSequence& b, std::size_t n) { return pd::ones_frequency(b, n); },
           py::arg("n"))
      .def("__len__", &pd::BitSequence::count)
      .def("__eq__", [](const pd::BitSequence& a, const pd::BitSequence& b) { return a == b; });

  m.def("binarize_digits", &pd::binarize_digits, py::arg("digits"), py::arg("threshold") = 5,
        py::arg("inclusive") = true);

  // mt19937
  py::class_<pd::Mt19937>(m, "Mt19937")
      .def(py::init<std::uint32_t>(), py::arg("seed") = pd::Mt19937::kDefaultSeed)
      .def_static("from_array",
                  [](const std::vector<std::uint32_t>& key) { return pd::Mt19937::from_array(key); },
                  py::arg("key"))
      .def("next_u32", &pd::Mt19937::next_u32)
      .def("next_real53", &pd::Mt19937::next_real53);
  m.def("mt_binary_sequence", &pd::mt_binary_sequence, py::arg("seed"), py::arg("count"),
        py::arg("threshold") = 0.5);

  // census and statistics
  m.def(
      "pattern_census",
      [](const pd::BitSequence& bits, std::size_t n, int length) {
        return pd::pattern_census(bits, n, length).counts;
      },
      py::arg("bits"), py::arg("n"), py::arg("length") = 7, "Overlapping counts of every length-L string");
  m.def(
      "ideal_predictor_rate",
      [](const pd::BitSequence& bits, std::size_t n, int length) {
        return pd::ideal_predictor_rate(pd::pattern_census(bits, n, length));
      },
      py::arg("bits"), py::arg("n"), py::arg("length") = 7);
  m.def(
      "majority_label",
      [](const pd::BitSequence& bits, std::size_t n, const std::string& prefix) {
        const auto census = pd::pattern_census(bits, n, static_cast<int>(prefix.size()) + 1);
        const auto ml = pd::majority_label(census, prefix);
        return py::make_tuple(ml.label, ml.count0, ml.count1);
      },
      py::arg("bits"), py::arg("n"), py::arg("prefix"), "(label, count0, count1); ties go to 1");
  m.def(
      "normality_test",
      [](const pd::BitSequence& bits, std::size_t n, int length, double k) {
        return normality_dict(pd::normality_test(pd::pattern_census(bits, n, length), k));
      },
      py::arg("bits"), py::arg("n"), py::arg("length") = 7, py::arg("k") = 5.0);
  m.def("normality_bound", &pd::normality_bound, py::arg("windows"), py::arg("k") = 5.0, py::arg("b") = 2);
  m.def("null_sigma", &pd::null_sigma, py::arg("b"), py::arg("n"));
  m.def("sigma_exceeds", &pd::sigma_exceeds, py::arg("rate"), py::arg("n"), py::arg("b"), py::arg("k"));
  m.def(
      "subgroup_lcl", [](const std::vector<double>& rates, double confidence) { return pd::subgroup_lcl(rates, confidence); },
      py::arg("rates"), py::arg("confidence") = 0.99);

  // learning
  m.def(
      "train_and_score",
      [](const pd::BitSequence& bits, std::size_t start, std::size_t count, std::uint32_t init_seed,
         int max_epochs, double learning_rate, double momentum) {
        pd::TrainConfig tc;
        tc.init_seed = init_seed;
        tc.max_epochs = max_epochs;
        tc.learning_rate = learning_rate;
        tc.momentum = momentum;
        const auto ds = pd::make_windows(bits, start, count);
        std::vector<double> losses;
        double acc = 0, ideal = 0;
        {
          py::gil_scoped_release release;
          const auto result = pd::train(pd::init_model(pd::kDefaultLayers, init_seed), ds, tc);
          for (const auto& e : result.log.epochs) losses.push_back(e.loss);
          acc = pd::accuracy(result.model, ds);
          ideal = pd::ideal_predictor_rate(pd::dataset_census(ds));
        }
        py::dict d;
        d["accuracy"] = acc;
        d["ideal_rate"] = ideal;
        d["losses"] = losses;
        return d;
      },
      py::arg("bits"), py::arg("start"), py::arg("count"), py::arg("init_seed") = 1, py::arg("max_epochs") = 100,
      py::arg("learning_rate") = 0.05, py::arg("momentum") = 0.95,
      "Train a 6-30-20-1 network on windows of `bits` and return its in-sample accuracy");

  // experiments
  m.def(
      "run_experiment",
      [](const std::string& which, const std::string& config_text) {
        const auto id = pd::parse_experiment(which);
        const auto config = pd::parse_config_text(config_text, pd::ExperimentConfig::defaults(id));
        if (config.experiment != id) throw pd::ConfigError("config declares a different experiment");
        py::gil_scoped_release release;
        return pd::report_json(pd::run_experiment(config));
      },
      py::arg("experiment"), py::arg("config") = "", "Run experiment a, b or c; returns the report as JSON text");
}
