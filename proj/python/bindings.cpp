#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "quizforge/cli.hpp"
#include "quizforge/corpus.hpp"
#include "quizforge/dataset.hpp"
#include "quizforge/eval.hpp"
#include "quizforge/quiz_parser.hpp"
#include "quizforge/rouge.hpp"
#include "quizforge/transform.hpp"
#include "quizforge/version.hpp"

namespace py = pybind11;
using namespace quizforge;

namespace {

py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_py(const py::handle& obj) {
  const auto text = py::module_::import("json").attr("dumps")(obj, py::arg("ensure_ascii") = false).cast<std::string>();
  return Json::parse(text);
}

py::object score_to_py(const rouge::RougeScore& s) { return to_py(rouge::to_json(s)); }

py::object gate(const py::handle& quiz, const py::handle& doc, double min_rouge_l, std::optional<double> max_rouge_l,
                const std::string& aggregate, bool include_options) {
  rouge::GateConfig cfg{min_rouge_l, max_rouge_l, rouge::parse_aggregate(aggregate), include_options};
  cfg.validate();
  const auto qs = from_json<QuizSet>(from_py(quiz));
  const auto result = rouge::quality_gate(qs, from_json<SourceDocument>(from_py(doc)), cfg);
  Json items = Json::array();
  for (std::size_t i = 0; i < result.scores.items.size(); ++i) {
    items.push_back({{"item_id", result.scores.items[i].item_id},
                     {"scores", rouge::to_json(result.scores.items[i].report)},
                     {"passed", static_cast<bool>(result.item_passed[i])}});
  }
  return to_py(Json{{"items", items},
                    {"mean_rouge_l_f1", result.scores.mean_rouge_l_f1},
                    {"set_passed", result.set_passed}});
}

py::object split_records(const py::handle& records, std::size_t train_docs, std::size_t eval_docs,
                         std::uint64_t seed) {
  std::vector<dataset::InstructRecord> rs;
  for (const auto& r : from_py(records)) rs.push_back(dataset::record_from_json(r));
  const auto s = dataset::split(rs, train_docs, eval_docs, seed);
  auto side = [](const std::vector<dataset::InstructRecord>& v) {
    Json out = Json::array();
    for (const auto& r : v) out.push_back(dataset::to_json(r));
    return out;
  };
  return to_py(Json{{"train", side(s.train)}, {"eval", side(s.eval)}, {"manifest", s.manifest()}});
}

py::object ratings(const py::handle& annotations) {
  std::vector<Annotation> log;
  for (const auto& a : from_py(annotations)) log.push_back(from_json<Annotation>(a));
  return to_py(eval::to_json(eval::aggregate_ratings(log)));
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = cli::run(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = std::string(kVersion);

  static py::exception<Error> base(m, "QuizforgeError");
  static py::exception<ValidationError> validation(m, "ValidationError", base.ptr());
  static py::exception<IoError> io_error(m, "IoError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      PyErr_SetString(validation.ptr(), e.what());
    } catch (const IoError& e) {
      PyErr_SetString(io_error.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(e.category() == Error::Category::Io ? io_error.ptr() : validation.ptr(), e.what());
    } catch (const Json::exception& e) {
      PyErr_SetString(validation.ptr(), e.what());
    }
  });

  m.def("normalize_tr", &rouge::normalize_tr, py::arg("text"));
  m.def(
      "rouge_n",
      [](const rouge::Tokens& c, const rouge::Tokens& r, int n) { return score_to_py(rouge::rouge_n(c, r, n)); },
      py::arg("candidate"), py::arg("reference"), py::arg("n"));
  m.def(
      "rouge_l", [](const rouge::Tokens& c, const rouge::Tokens& r) { return score_to_py(rouge::rouge_l(c, r)); },
      py::arg("candidate"), py::arg("reference"));
  m.def(
      "rouge",
      [](const std::string& c, const std::string& r) {
        return to_py(rouge::to_json(rouge::rouge_report(rouge::normalize_tr(c), rouge::normalize_tr(r))));
      },
      py::arg("candidate"), py::arg("reference"));
  m.def(
      "clean_text", [](const std::string& raw) { return corpus::clean(raw); }, py::arg("raw"));
  m.def(
      "parse_quiz",
      [](const std::string& raw, const std::string& format, const std::string& doc_id, int options_per_question,
         std::optional<int> num_questions) {
        return to_py(to_json(parse_quiz(raw, {parse_quiz_kind(format), options_per_question, num_questions}, doc_id)));
      },
      py::arg("raw"), py::arg("format"), py::arg("doc_id"), py::arg("options_per_question") = 0,
      py::arg("num_questions") = py::none());
  m.def(
      "format_quiz",
      [](const py::handle& quiz, const std::string& layout) {
        if (layout != "json" && layout != "lettered") throw ValidationError("layout", "expected json or lettered");
        return format_quiz(from_json<QuizSet>(from_py(quiz)), layout == "json" ? QuizLayout::Json : QuizLayout::Lettered);
      },
      py::arg("quiz"), py::arg("layout") = "json");
  m.def(
      "mcq_to_saq", [](const py::handle& quiz) { return to_py(to_json(transform::mcq_to_saq(from_json<QuizSet>(from_py(quiz))))); },
      py::arg("quiz"));
  m.def("quality_gate", &gate, py::arg("quiz"), py::arg("doc"), py::arg("min_rouge_l") = 0.05,
        py::arg("max_rouge_l") = py::none(), py::arg("aggregate") = "per-item", py::arg("include_options") = true);
  m.def("split", &split_records, py::arg("records"), py::arg("train_docs"), py::arg("eval_docs"), py::arg("seed"));
  m.def(
      "finetune_config",
      [](const std::string& model) { return to_py(dataset::to_json(dataset::finetune_config_for(dataset::parse_model_kind(model)))); },
      py::arg("model"));
  m.def("aggregate_ratings", &ratings, py::arg("annotations"));
  m.def("run_cli", &run_cli, py::arg("args"));
}
